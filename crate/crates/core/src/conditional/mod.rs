//! Detector models, heralding, and the conditional maps induced on mode `u`.

mod detection;
mod ops;

pub use detection::{detection_module, DetectionModule, MeasurementSqueezer, Partner, PreparedDetection};
pub use ops::{
    analytic_o1, analytic_o0, analytic_o3_ops, circuit_ops, circuit_prefactor, corrected_ops, gaussian_x_filter,
    paper_zeta, vacuum_transparent_filter, x_function, CorrectionSpec, CorrectionStage, FILTER_GAIN_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::linalg::{c, CMatrix, CVector};
use crate::fock::{DensityOperator, ModeLabel, StateVector, HERALD_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    /// Click / no-click with POVM `{1 − |0⟩⟨0|, |0⟩⟨0|}`.
    OnOff,
    /// Projective photon counting.
    FockResolving,
    /// No measurement, the mode is discarded.
    TraceOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub mode: ModeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Click,
    NoClick,
    Count(usize),
    /// The only outcome of a trace-out detector.
    Discarded,
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, mode: ModeLabel) -> Self {
        Self { kind, mode }
    }

    /// Outcomes of this detector on a mode with `dim` Fock levels.
    pub fn outcomes(&self, dim: usize) -> Vec<Outcome> {
        match self.kind {
            DetectorKind::OnOff => vec![Outcome::NoClick, Outcome::Click],
            DetectorKind::FockResolving => (0..dim).map(Outcome::Count).collect(),
            DetectorKind::TraceOut => vec![Outcome::Discarded],
        }
    }

    /// Fock levels whose projectors add up to the POVM element of `outcome`.
    pub fn levels(&self, outcome: Outcome, dim: usize) -> Result<Vec<usize>> {
        let levels = match (self.kind, outcome) {
            (DetectorKind::OnOff, Outcome::NoClick) => vec![0],
            (DetectorKind::OnOff, Outcome::Click) => (1..dim).collect(),
            (DetectorKind::FockResolving, Outcome::Count(n)) if n < dim => vec![n],
            (DetectorKind::TraceOut, Outcome::Discarded) => (0..dim).collect(),
            (kind, outcome) => {
                return Err(Error::Config(format!("outcome {outcome:?} is not available for a {kind:?} detector on {dim} levels")))
            }
        };
        Ok(levels)
    }

    /// POVM element of `outcome` as a matrix on the detector mode.
    pub fn povm_element(&self, outcome: Outcome, dim: usize) -> Result<CMatrix> {
        let mut m = CMatrix::zeros(dim, dim);
        for n in self.levels(outcome, dim)? {
            m[(n, n)] = c(1.0);
        }
        Ok(m)
    }
}

/// Result of conditioning on a detector outcome: unnormalized branches on the
/// remaining modes whose squared norms add up to the outcome probability.
#[derive(Debug, Clone)]
pub struct Heralded {
    pub branches: Vec<StateVector>,
    pub probability: f64,
}

impl Heralded {
    fn from_branches(branches: Vec<StateVector>) -> Result<Self> {
        let probability: f64 = branches.iter().map(StateVector::norm_sqr).sum();
        if !(probability > HERALD_FLOOR) {
            return Err(Error::DegenerateHerald(probability));
        }
        let branches = branches.into_iter().filter(|b| b.norm_sqr() > 0.0).collect();
        Ok(Self { branches, probability })
    }

    /// The single branch of a projective outcome.
    pub fn pure(&self) -> Option<&StateVector> {
        match self.branches.as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }

    /// Normalized conditional state.
    pub fn density(&self) -> Result<DensityOperator> {
        let comps = self
            .branches
            .iter()
            .map(|b| b.normalize().map(|(s, w)| (w / self.probability, s)))
            .collect::<Result<Vec<_>>>()?;
        DensityOperator::from_ensemble(comps)
    }
}

/// Applies the POVM element of `outcome` to `detector.mode` and removes the mode.
pub fn herald(state: &StateVector, detector: DetectorModel, outcome: Outcome) -> Result<Heralded> {
    let dim = state.layout().dim_of(detector.mode)?;
    let branches = detector
        .levels(outcome, dim)?
        .into_iter()
        .map(|n| state.project_fock(detector.mode, n))
        .collect::<Result<Vec<_>>>()?;
    Heralded::from_branches(branches)
}

/// Mixed-state version of [`herald`]: returns the unnormalized conditional
/// state and its trace.
pub fn herald_density(rho: &DensityOperator, detector: DetectorModel, outcome: Outcome) -> Result<(DensityOperator, f64)> {
    let dim = rho.layout().dim_of(detector.mode)?;
    let mut acc: Option<DensityOperator> = None;
    for n in detector.levels(outcome, dim)? {
        let mut bra = CVector::zeros(dim);
        bra[n] = c(1.0);
        let part = rho.project_mode(detector.mode, &bra)?;
        acc = Some(match acc {
            None => part,
            Some(prev) => DensityOperator::new(prev.layout().clone(), prev.matrix() + part.matrix())?,
        });
    }
    let out = acc.ok_or_else(|| Error::Config("detector outcome selects no Fock level".into()))?;
    let p = out.trace();
    if !(p > HERALD_FLOOR) {
        return Err(Error::DegenerateHerald(p));
    }
    Ok((out, p))
}
