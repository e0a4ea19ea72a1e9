//! Full circuit simulations of the heralded Rabi schemes, the ideal references
//! they are compared against, and steering of the output by qubit projections.

mod reference;
mod run;

pub use reference::{ideal_jc, ideal_rabi, process_output, taylor_rabi, taylor_rabi_factorized};
pub use run::{resolve, run_setup, run_setup_on, steer, LeakageReport, Resolved, SimulationResult, Steering, LEAKAGE_LIMIT};

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conditional::{DetectorKind, Partner};
use crate::error::{Error, Result};
use crate::fock::linalg::{c, C64};
use crate::fock::{DensityOperator, Mode, ModeLabel, StateVector};
use crate::gaussian::{coherent_state, fock_state, prc_state, thermal_state, DEFAULT_R_TR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Variant {
    #[serde(rename = "u2-tmsv")]
    U2Tmsv,
    #[default]
    #[serde(rename = "u2-photon")]
    U2Photon,
    #[serde(rename = "u3-tmsv")]
    U3Tmsv,
    #[serde(rename = "u3-photon")]
    U3Photon,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::U2Tmsv, Variant::U2Photon, Variant::U3Tmsv, Variant::U3Photon];

    /// Order of the Taylor expansion the scheme reproduces.
    pub fn order(self) -> usize {
        match self {
            Variant::U2Tmsv | Variant::U2Photon => 2,
            Variant::U3Tmsv | Variant::U3Photon => 3,
        }
    }

    pub fn uses_photon(self) -> bool {
        matches!(self, Variant::U2Photon | Variant::U3Photon)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::U2Tmsv => "u2-tmsv",
            Variant::U2Photon => "u2-photon",
            Variant::U3Tmsv => "u3-tmsv",
            Variant::U3Photon => "u3-photon",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the free circuit parameters follow from the target strength `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Matching {
    /// The X-X strength supplies the Gaussian factor itself where the scheme
    /// allows it, splitters are chosen symmetric:
    /// u2-photon `κ = √2 t`, `T_C = T_D`; u2-tmsv balanced C and `κ = √2 λ t`;
    /// third order `κ = √2 t` with the splitter ratio absorbing `(1+ζ)^{3/2}`.
    Auto,
    /// `κ` and `T_C` from the configuration, the remaining splitter solved for.
    /// The default, with the weak `κ = 0.1` that keeps `u'` near vacuum.
    #[default]
    FixedKappa,
    /// Every parameter from the configuration; only checked for consistency.
    Manual,
}

/// Qubit state of mode `d` before the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QubitInput {
    #[default]
    Zero,
    One,
    /// `c₊|+⟩ + c₋|−⟩`, normalized on use.
    General { c_plus: C64, c_minus: C64 },
}

impl QubitInput {
    /// Normalized amplitudes on `|0⟩, |1⟩`.
    pub fn amplitudes(&self) -> Result<[C64; 2]> {
        let (p, m) = match *self {
            QubitInput::Zero => return Ok([c(1.0), c(0.0)]),
            QubitInput::One => return Ok([c(0.0), c(1.0)]),
            QubitInput::General { c_plus, c_minus } => (c_plus, c_minus),
        };
        let norm = (p.norm_sqr() + m.norm_sqr()).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Config("qubit input has zero norm".into()));
        }
        Ok([(p + m) * FRAC_1_SQRT_2 / norm, (p - m) * FRAC_1_SQRT_2 / norm])
    }

    pub fn state(&self, dim_d: usize) -> Result<StateVector> {
        let [a0, a1] = self.amplitudes()?;
        let mut amps = vec![c(0.0); dim_d];
        amps[0] = a0;
        amps[1] = a1;
        StateVector::from_fock_amplitudes(ModeLabel::D, &amps)
    }

    /// The Fock state a heralded scheme can realize for this input, when it
    /// is one: the schemes attach the two conditional maps to `|0⟩` and `|1⟩`,
    /// which covers exactly `c₊ = ±c₋`.
    pub fn basis_level(&self) -> Result<usize> {
        let [a0, a1] = self.amplitudes()?;
        match (a0.norm() > 1e-9, a1.norm() > 1e-9) {
            (true, false) => Ok(0),
            (false, true) => Ok(1),
            _ => Err(Error::ConfigInconsistency(
                "the heralded schemes need c+ = ±c- (qubit input |0⟩ or |1⟩)".into(),
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            QubitInput::Zero => "0".into(),
            QubitInput::One => "1".into(),
            QubitInput::General { c_plus, c_minus } => format!("general({c_plus},{c_minus})"),
        }
    }
}

/// State of mode `u` before the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CvInput {
    #[default]
    Vacuum,
    Coherent { beta: f64 },
    Thermal { nbar: f64 },
    Prc { beta: f64 },
    Fock { n: usize },
}

impl CvInput {
    /// Normalized input state; thermal and phase-randomized inputs keep their
    /// Fock-diagonal ensemble.
    pub fn state(&self, dim_u: usize) -> Result<DensityOperator> {
        let mode = Mode::new(ModeLabel::U, dim_u);
        match *self {
            CvInput::Vacuum => Ok(fock_state(mode, 0)?.to_density()),
            CvInput::Fock { n } => Ok(fock_state(mode, n)?.to_density()),
            CvInput::Coherent { beta } => Ok(coherent_state(mode, c(beta))?.normalize()?.0.to_density()),
            CvInput::Thermal { nbar } => thermal_state(mode, nbar)?.normalized(),
            CvInput::Prc { beta } => prc_state(mode, beta)?.normalized(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CvInput::Vacuum => "vacuum".into(),
            CvInput::Coherent { beta } => format!("coherent({beta})"),
            CvInput::Thermal { nbar } => format!("thermal({nbar})"),
            CvInput::Prc { beta } => format!("prc({beta})"),
            CvInput::Fock { n } => format!("fock({n})"),
        }
    }
}

/// Fock cutoffs of the simulated modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dims {
    pub u: usize,
    pub u_prime: usize,
    pub d: usize,
    pub d_prime: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Self {
            u: ModeLabel::U.default_dim(),
            u_prime: ModeLabel::UPrime.default_dim(),
            d: ModeLabel::D.default_dim(),
            d_prime: ModeLabel::DPrime.default_dim(),
        }
    }
}

/// Parameters of one scheme run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetupConfig {
    pub variant: Variant,
    /// Target Rabi strength.
    pub t: f64,
    /// Jaynes-Cummings strength of the comparison reference; `t` when unset.
    pub tau: Option<f64>,
    pub matching: Matching,
    /// X-X strength, used by the fixed and manual matchings.
    pub kappa: f64,
    /// TMSV weight.
    pub lambda: f64,
    /// Displacement and squeezing of the `u'` ancilla.
    pub alpha: f64,
    pub r: f64,
    /// Strength of the measurement-induced squeezing `e^{−ζX²}`.
    pub zeta: f64,
    /// Auxiliary squeezing, splitter A and transformation squeezing, kept for
    /// the comparison squeezer model.
    pub r_prime: f64,
    pub t_a: f64,
    pub r_tr: f64,
    pub t_c: f64,
    pub t_d: f64,
    /// Phase on `d'` before splitter C; the variant's default when unset.
    pub phase: Option<f64>,
    pub qubit_input: QubitInput,
    pub cv_input: CvInput,
    /// Loss fraction on the `u` output.
    pub gamma: f64,
    pub detector: DetectorKind,
    pub partner: Partner,
    pub dims: Dims,
}

impl Default for SetupConfig {
    fn default() -> Self {
        Self {
            variant: Variant::default(),
            t: 0.5,
            tau: None,
            matching: Matching::default(),
            kappa: 0.1,
            lambda: 0.01,
            alpha: 0.0,
            r: 0.0,
            zeta: 2.0,
            r_prime: -1.04,
            t_a: 0.1,
            r_tr: DEFAULT_R_TR,
            t_c: std::f64::consts::FRAC_PI_4,
            t_d: std::f64::consts::FRAC_PI_4,
            phase: None,
            qubit_input: QubitInput::default(),
            cv_input: CvInput::default(),
            gamma: 0.0,
            detector: DetectorKind::FockResolving,
            partner: Partner::default(),
            dims: Dims::default(),
        }
    }
}

impl SetupConfig {
    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.t)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite = [self.t, self.kappa, self.lambda, self.alpha, self.r, self.zeta, self.t_c, self.t_d, self.gamma];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite setup parameter".into());
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return bad(format!("TMSV weight {} outside [0, 1)", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("loss fraction {} outside [0, 1]", self.gamma));
        }
        if self.zeta <= -1.0 {
            return bad(format!("filter strength {} must exceed -1", self.zeta));
        }
        let d = self.dims;
        if d.u < 2 || d.u_prime < 2 || d.d < 2 || d.d_prime < 2 {
            return bad(format!("every cutoff must be at least 2, got {d:?}"));
        }
        if self.detector == DetectorKind::TraceOut {
            return bad("the central detector must register photons".into());
        }
        if !self.variant.uses_photon() && self.lambda == 0.0 {
            return bad("TMSV variants need a nonzero weight".into());
        }
        Ok(())
    }
}
