use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::linalg::{c, CMatrix, C64};
use crate::fock::{ModeLabel, StateVector};
use crate::fock::linalg::HermitianEig;
use crate::fock::operator::quadrature_matrix;
use crate::gaussian::{beam_splitter_block, squeezed_vacuum_amplitudes, DEFAULT_R_TR};

use super::{DetectorKind, Heralded};

/// Treatment of the central beam splitter's undetected output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Partner {
    /// Partial trace over every photon number.
    #[default]
    Trace,
    /// Projection onto vacuum.
    Vacuum,
}

/// Central detection: beam splitter C on `(u', d')`, a detector on the `u'`
/// output port and the `d'` output either traced out or projected on vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModule {
    pub t_c: f64,
    /// Phase `e^{iφ n̂}` imprinted on `d'` before the beam splitter.
    pub phase_dprime: f64,
    pub detector: DetectorKind,
    /// Photon number registered by a resolving detector.
    pub count: usize,
    pub partner: Partner,
}

impl DetectionModule {
    pub fn new(t_c: f64) -> Self {
        Self {
            t_c,
            phase_dprime: 0.0,
            detector: DetectorKind::FockResolving,
            count: 1,
            partner: Partner::Trace,
        }
    }

    fn herald_levels(&self, max_total: usize) -> Result<Vec<usize>> {
        match self.detector {
            DetectorKind::FockResolving => Ok(vec![self.count]),
            DetectorKind::OnOff => Ok((1..=max_total).collect()),
            DetectorKind::TraceOut => Err(Error::Config("the central detector must register photons".into())),
        }
    }
}

/// Runs the detection module on `state` and returns the unnormalized branches
/// on the remaining modes, one per photon number leaving the undetected port.
///
/// Each photon-number manifold of the beam splitter is exponentiated exactly,
/// so the output ports are not limited by the input cutoffs.
pub fn detection_module(state: &StateVector, module: &DetectionModule) -> Result<Heralded> {
    let layout = state.layout();
    PreparedDetection::new(*module, layout.dim_of(ModeLabel::UPrime)?, layout.dim_of(ModeLabel::DPrime)?)?.herald(state)
}

/// A detection module with its beam splitter manifolds computed once for
/// fixed `u'` and `d'` cutoffs, for heralding many states.
#[derive(Debug, Clone)]
pub struct PreparedDetection {
    module: DetectionModule,
    du: usize,
    dd: usize,
    /// `(herald level, total photon number, manifold block)`.
    terms: Vec<(usize, usize, CMatrix)>,
}

impl PreparedDetection {
    pub fn new(module: DetectionModule, du: usize, dd: usize) -> Result<Self> {
        let max_total = du + dd - 2;
        let partner_levels: Vec<usize> = match module.partner {
            Partner::Trace => (0..=max_total).collect(),
            Partner::Vacuum => vec![0],
        };
        let mut terms = Vec::new();
        for n in module.herald_levels(max_total)? {
            for &m in &partner_levels {
                let total = n + m;
                if total <= max_total {
                    terms.push((n, total, beam_splitter_block(total, module.t_c)));
                }
            }
        }
        Ok(Self { module, du, dd, terms })
    }

    pub fn module(&self) -> &DetectionModule {
        &self.module
    }

    /// `(herald level n, total photon number N, manifold block)` for every
    /// contributing manifold; the amplitude for `k` photons entering from `u'`
    /// to leave as `n` in the detected port is `block[(n, k)]`.
    pub fn terms(&self) -> &[(usize, usize, CMatrix)] {
        &self.terms
    }

    pub fn herald(&self, state: &StateVector) -> Result<Heralded> {
        let layout = state.layout();
        let (du, dd) = (self.du, self.dd);
        if layout.dim_of(ModeLabel::UPrime)? != du || layout.dim_of(ModeLabel::DPrime)? != dd {
            return Err(Error::Layout("detection prepared for other ancilla cutoffs".into()));
        }
        let mut proj: Vec<Vec<StateVector>> = Vec::with_capacity(du);
        for k in 0..du {
            let on_k = state.project_fock(ModeLabel::UPrime, k)?;
            let mut row = Vec::with_capacity(dd);
            for j in 0..dd {
                let phase = C64::from_polar(1.0, self.module.phase_dprime * j as f64);
                row.push(on_k.project_fock(ModeLabel::DPrime, j)?.scale(phase));
            }
            proj.push(row);
        }
        let rest = proj[0][0].layout().clone();
        let mut branches = Vec::new();
        for (n, total, block) in &self.terms {
            let (n, total) = (*n, *total);
            let mut acc = StateVector::new(rest.clone(), crate::fock::CVector::zeros(rest.composite_dim()))?;
            for k in total.saturating_sub(dd - 1)..=total.min(du - 1) {
                let w = block[(n, k)];
                if w != c(0.0) {
                    acc = acc.add(&proj[k][total - k].scale(w))?;
                }
            }
            if acc.norm_sqr() > 0.0 {
                branches.push(acc);
            }
        }
        Heralded::from_branches(branches)
    }
}

/// Photon-number herald on a squeezed auxiliary mode `a` coupled to `u'` by
/// the X-X form of beam splitter A: the physical origin of the
/// measurement-induced squeezing. The map on `u'` is
/// `M = ⟨count|_a exp(iκ' X_{u'} X_a) |r'⟩_a`, a function of `X_{u'}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSqueezer {
    pub r_prime: f64,
    pub kappa_prime: f64,
    pub count: usize,
    pub dim_a: usize,
}

impl Default for MeasurementSqueezer {
    fn default() -> Self {
        Self::from_splitter(-1.04, 0.1, DEFAULT_R_TR)
    }
}

impl MeasurementSqueezer {
    /// Coupling of a splitter with angle `t_a` converted with squeezing `r_tr`:
    /// `κ' = 2 T_A cosh r_tr`.
    pub fn from_splitter(r_prime: f64, t_a: f64, r_tr: f64) -> Self {
        Self {
            r_prime,
            kappa_prime: 2.0 * t_a * r_tr.cosh(),
            count: 2,
            dim_a: 40,
        }
    }

    /// Amplitude `⟨count| e^{iκ' x X_a} |r'⟩` for each eigenvalue `x` of `X_{u'}`.
    fn gains(&self, xs: &[f64]) -> Result<Vec<C64>> {
        if self.dim_a < 2 || self.count >= self.dim_a {
            return Err(Error::InvalidDimension(self.dim_a));
        }
        let sq = squeezed_vacuum_amplitudes(self.dim_a, self.r_prime);
        let xa = HermitianEig::new(&quadrature_matrix(self.dim_a, 0.0));
        // ⟨count|V e^{iκ'x y} V†|r'⟩
        let left: Vec<C64> = (0..self.dim_a).map(|j| xa.vectors[(self.count, j)]).collect();
        let right: Vec<C64> = (0..self.dim_a)
            .map(|j| (0..self.dim_a).map(|n| xa.vectors[(n, j)].conj() * sq[n]).sum())
            .collect();
        Ok(xs
            .iter()
            .map(|&x| {
                (0..self.dim_a)
                    .map(|j| left[j] * right[j] * C64::from_polar(1.0, self.kappa_prime * x * xa.values[j]))
                    .sum()
            })
            .collect())
    }

    pub fn operator(&self, dim_up: usize) -> Result<CMatrix> {
        let eig = HermitianEig::new(&quadrature_matrix(dim_up, 0.0));
        let g = self.gains(&eig.values)?;
        let mut scaled = eig.vectors.clone();
        for (j, gj) in g.iter().enumerate() {
            for i in 0..dim_up {
                scaled[(i, j)] *= gj;
            }
        }
        Ok(scaled * eig.vectors.adjoint())
    }

    /// Strength ζ of the Gaussian filter `e^{−ζX²}` with the same ratio of
    /// vacuum to single-photon gain, `⟨0|M|0⟩/⟨1|M|1⟩ − 1`.
    pub fn effective_zeta(&self, dim_up: usize) -> Result<f64> {
        let m = self.operator(dim_up)?;
        let g1 = m[(1, 1)];
        if g1.norm() == 0.0 {
            return Err(Error::DegenerateHerald(0.0));
        }
        Ok((m[(0, 0)] / g1).re - 1.0)
    }

    /// Leading-order filter strength of the two-photon herald,
    /// `ζ ≈ (5 − e^{2r'}) κ'² / (2(1 − e^{4r'}))`.
    pub fn leading_order_zeta(&self) -> f64 {
        let e = (2.0 * self.r_prime).exp();
        (5.0 - e) * self.kappa_prime * self.kappa_prime / (2.0 * (1.0 - e * e))
    }
}
