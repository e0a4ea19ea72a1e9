use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::linalg::{c, CMatrix, HermitianEig, C64, I};
use crate::fock::operator::{quadrature_matrix, OperatorKind};
use crate::fock::{Mode, ModeLabel, ModeLayout, OperatorMatrix, StateVector};
use crate::gaussian::{displacement, squeezing, QndGate};

/// Largest gain a Gaussian X filter may have on the truncated space.
pub const FILTER_GAIN_LIMIT: f64 = 1e6;

/// `f(X)` on a mode with `dim` levels, through the eigenbasis of `X`.
pub fn x_function<F: Fn(f64) -> C64>(dim: usize, f: F) -> CMatrix {
    HermitianEig::new(&quadrature_matrix(dim, 0.0)).map(f)
}

fn on_u(dim: usize, m: CMatrix) -> Result<OperatorMatrix> {
    OperatorMatrix::new(ModeLayout::single(ModeLabel::U, dim)?, m, OperatorKind::ConditionalMap)
}

// shared pieces of the single-photon and vacuum maps for the ancilla |α, r⟩
struct AncillaTerms {
    e2r: f64,
    alpha: C64,
    kappa: f64,
}

impl AncillaTerms {
    fn new(kappa: f64, alpha: C64, r: f64) -> Self {
        Self {
            e2r: (2.0 * r).exp(),
            alpha,
            kappa,
        }
    }

    fn denom(&self) -> f64 {
        2.0 * self.e2r + 2.0
    }

    /// `e^{−2e^{2r}α²/(2e^{2r}+2)} / √(e^{2r}+1)`
    fn common(&self) -> C64 {
        (-(self.alpha * self.alpha) * 2.0 * self.e2r / self.denom()).exp() / (self.e2r + 1.0).sqrt()
    }

    /// `e^{2i√2 e^{2r} κ α x/(2e^{2r}+2)}`
    fn displacement_phase(&self, x: f64) -> C64 {
        (I * 2.0 * 2f64.sqrt() * self.e2r * self.kappa * self.alpha * x / self.denom()).exp()
    }

    /// `e^{−κ²x²/(2e^{2r}+2)}`
    fn squeeze(&self, x: f64) -> f64 {
        (-self.kappa * self.kappa * x * x / self.denom()).exp()
    }

    /// `√2(√2 e^{2r} α + iκx) / (e^{2r}+1)`
    fn x_gate(&self, x: f64) -> C64 {
        (self.alpha * 2f64.sqrt() * self.e2r + I * self.kappa * x) * 2f64.sqrt() / (self.e2r + 1.0)
    }

    fn o1(&self, x: f64) -> C64 {
        self.x_gate(x) * self.common() * self.displacement_phase(x) * self.squeeze(x)
    }

    fn o0(&self, x: f64) -> C64 {
        self.common() * self.displacement_phase(x) * self.squeeze(x)
    }
}

/// Map on `u` heralded by a single photon in the ancilla `|α, r⟩_{u'}` after
/// `exp(iκ X_u X_{u'})`:
///
/// `√2(√2 e^{2r}α + iκX)/(e^{2r}+1)^{3/2} · e^{−2e^{2r}α²/(2e^{2r}+2) + 2i√2 e^{2r}κα X/(2e^{2r}+2) − κ²X²/(2e^{2r}+2)}`.
///
/// The literal projection `⟨1|_{u'}` of the circuit equals this operator times
/// [`circuit_prefactor`].
pub fn analytic_o1(dim: usize, kappa: f64, alpha: C64, r: f64) -> Result<OperatorMatrix> {
    let terms = AncillaTerms::new(kappa, alpha, r);
    on_u(dim, x_function(dim, |x| terms.o1(x)))
}

/// Vacuum-heralded counterpart of [`analytic_o1`]:
/// `e^{−2e^{2r}α²/(2e^{2r}+2) + 2i√2 e^{2r}κα X/(2e^{2r}+2) − κ²X²/(2e^{2r}+2)} / √(e^{2r}+1)`.
pub fn analytic_o0(dim: usize, kappa: f64, alpha: C64, r: f64) -> Result<OperatorMatrix> {
    let terms = AncillaTerms::new(kappa, alpha, r);
    on_u(dim, x_function(dim, |x| terms.o0(x)))
}

/// Ratio between the projections `⟨n|_{u'}` of the physical circuit and
/// [`analytic_o1`] / [`analytic_o0`]: `√2 e^{r/2}`.
pub fn circuit_prefactor(r: f64) -> f64 {
    2f64.sqrt() * (r / 2.0).exp()
}

/// `(⟨1|, ⟨0|)` projections of `exp(iκ X_u X_{u'}) D[α]S[r]|0⟩_{u'}` as
/// operators on `u`, evaluated on the truncated circuit column by column.
pub fn circuit_ops(dim_u: usize, dim_up: usize, kappa: f64, alpha: C64, r: f64) -> Result<(CMatrix, CMatrix)> {
    let ancilla_layout = ModeLayout::single(ModeLabel::UPrime, dim_up)?;
    let ancilla = displacement(dim_up, alpha)?
        .on(ModeLabel::UPrime)
        .apply(&squeezing(dim_up, r)?.on(ModeLabel::UPrime).apply(&StateVector::vacuum(ancilla_layout))?)?;
    let gate = QndGate::new(Mode::new(ModeLabel::U, dim_u), Mode::new(ModeLabel::UPrime, dim_up), kappa)?;
    let u_layout = ModeLayout::single(ModeLabel::U, dim_u)?;
    let mut o1 = CMatrix::zeros(dim_u, dim_u);
    let mut o0 = CMatrix::zeros(dim_u, dim_u);
    for n in 0..dim_u {
        let out = gate.apply(&StateVector::fock(u_layout.clone(), &[n])?.tensor(&ancilla)?)?;
        o1.set_column(n, out.project_fock(ModeLabel::UPrime, 1)?.amplitudes());
        o0.set_column(n, out.project_fock(ModeLabel::UPrime, 0)?.amplitudes());
    }
    Ok((o1, o0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionStage {
    /// Physical displacement and anti-squeezing on `u` before the gate.
    Pre,
    /// Physical displacement and anti-squeezing on `u` after heralding.
    Post,
    /// Exact inverse applied to the simulated output.
    #[default]
    Numerical,
}

/// Gaussian corrections that turn the heralded maps into `iκX/√2` and `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSpec {
    /// Anti-squeezing `S[r_corr]` that compensates the redundant Gaussian factor.
    pub r_corr: f64,
    /// Amplitude of the displacement that cancels the redundant phase `e^{icX}`.
    pub inverse_displacement: C64,
    pub stage: CorrectionStage,
}

impl CorrectionSpec {
    /// `r_corr = −log[κ²/(e^{2r}+1) + 1]/2` and the inverse of the displacement
    /// `e^{2i√2 e^{2r}κα X/(2e^{2r}+2)}`.
    pub fn derive(kappa: f64, alpha: C64, r: f64, stage: CorrectionStage) -> Self {
        let e2r = (2.0 * r).exp();
        let r_corr = -(kappa * kappa / (e2r + 1.0) + 1.0).ln() / 2.0;
        let shift = alpha * 2.0 * 2f64.sqrt() * e2r * kappa / (2.0 * e2r + 2.0);
        // e^{i s X} = D[i s/√2]
        let inverse_displacement = -I * shift / 2f64.sqrt();
        Self {
            r_corr,
            inverse_displacement,
            stage,
        }
    }

    pub fn none() -> Self {
        Self {
            r_corr: 0.0,
            inverse_displacement: c(0.0),
            stage: CorrectionStage::Numerical,
        }
    }

    /// Physical correction `S[r_corr] D[inverse]` on mode `u` of `state`.
    pub fn apply_physical(&self, state: &StateVector) -> Result<StateVector> {
        let dim = state.layout().dim_of(ModeLabel::U)?;
        let mut out = state.clone();
        if self.inverse_displacement != c(0.0) {
            out = out.apply_local(displacement(dim, self.inverse_displacement)?.matrix(), &[ModeLabel::U])?;
        }
        if self.r_corr != 0.0 {
            out = out.apply_local(squeezing(dim, self.r_corr)?.matrix(), &[ModeLabel::U])?;
        }
        Ok(out)
    }
}

/// Heralded maps after dropping the common prefactor, cancelling the redundant
/// displacement and removing the redundant Gaussian factor exactly. At
/// `α = r = 0` they are `iκX/√2` and the identity.
pub fn corrected_ops(dim: usize, kappa: f64, alpha: C64, r: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let terms = AncillaTerms::new(kappa, alpha, r);
    let undo = |x: f64| terms.common().inv() * terms.displacement_phase(x).inv() / terms.squeeze(x);
    let o1 = x_function(dim, |x| terms.o1(x) * undo(x));
    let o0 = x_function(dim, |x| terms.o0(x) * undo(x));
    Ok((on_u(dim, o1)?, on_u(dim, o0)?))
}

/// `exp(−ζX²)`; contracting for `ζ > 0`.
pub fn gaussian_x_filter(dim: usize, zeta: f64) -> Result<OperatorMatrix> {
    let eig = HermitianEig::new(&quadrature_matrix(dim, 0.0));
    let gain = eig.values.iter().map(|&x| (-zeta * x * x).exp()).fold(0.0, f64::max);
    if !gain.is_finite() || gain > FILTER_GAIN_LIMIT {
        return Err(Error::Leakage {
            mode: ModeLabel::U,
            population: gain,
        });
    }
    on_u(dim, eig.map(|x| c((-zeta * x * x).exp())))
}

/// `|0⟩⟨0| + Q e^{−ζX²} Q` with `Q = 1 − |0⟩⟨0|`: the measurement-induced
/// squeezing that only acts when the ancilla carries photons.
///
/// A contracting filter is evaluated on a padded space and cut back, which keeps
/// the truncated spectrum of `X` from feeding the top levels.
pub fn vacuum_transparent_filter(dim: usize, zeta: f64) -> Result<CMatrix> {
    let f = if zeta >= 0.0 {
        gaussian_x_filter(2 * dim + 20, zeta)?.into_matrix().view((0, 0), (dim, dim)).into_owned()
    } else {
        gaussian_x_filter(dim, zeta)?.into_matrix()
    };
    let mut q = CMatrix::identity(dim, dim);
    q[(0, 0)] = c(0.0);
    let mut out = &q * f * &q;
    out[(0, 0)] = c(1.0);
    Ok(out)
}

/// Maps of the third-order scheme:
/// `O1 = iκX e^{−κ²X²/(4ζ+4)} / (√2(ζ+1)^{3/2})` and `O0 = e^{−κ²X²/4}`.
pub fn analytic_o3_ops(dim: usize, kappa: f64, zeta: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if !(zeta > -1.0) {
        return Err(Error::Config(format!("filter strength {zeta} must exceed -1")));
    }
    let k2 = kappa * kappa;
    let o1 = x_function(dim, |x| {
        I * kappa * x * (-k2 * x * x / (4.0 * zeta + 4.0)).exp() / (2f64.sqrt() * (zeta + 1.0).powf(1.5))
    });
    let o0 = x_function(dim, |x| c((-k2 * x * x / 4.0).exp()));
    Ok((on_u(dim, o1)?, on_u(dim, o0)?))
}

/// Squeezing strength quoted for the two-photon herald on the auxiliary mode,
/// `ζ = −(4e^{2r'}+5)κ'²/(2(e^{2r'}+1))`. Negative for every real input, so the
/// simulations take ζ directly instead.
pub fn paper_zeta(r_prime: f64, kappa_prime: f64) -> f64 {
    let e = (2.0 * r_prime).exp();
    -(4.0 * e + 5.0) * kappa_prime * kappa_prime / (2.0 * (e + 1.0))
}
