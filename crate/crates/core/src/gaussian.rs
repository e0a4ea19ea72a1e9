//! Gaussian states and unitaries, the X-X gate and photon loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::linalg::{c, expm_i_hermitian, CMatrix, CVector, HermitianEig, C64, I};
use crate::fock::operator::{annihilation_matrix, quadrature_matrix, OperatorKind};
use crate::fock::{DensityOperator, Mode, ModeLabel, ModeLayout, OperatorMatrix, StateVector};

/// Top-level population of the ideal squeezed vacuum above which a
/// truncated squeezer is refused.
pub const SQUEEZE_EDGE_LIMIT: f64 = 1e-2;

/// Neglected tail weight above which a truncated thermal state is refused.
pub const THERMAL_TAIL_LIMIT: f64 = 1e-6;

/// Squeezing used by the beam-splitter realisation of the X-X gate.
pub const DEFAULT_R_TR: f64 = 2.0;

/// Parameters of the Gaussian building blocks.
///
/// Beam-splitter angles give transmittance `cos T` and reflectance `sin T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub alpha: C64,
    pub r: f64,
    pub r_tr: f64,
    pub t_u: f64,
    pub t_c: f64,
    pub t_d: f64,
    pub t_a: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub nbar: f64,
    pub gamma: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            alpha: c(0.0),
            r: 0.0,
            r_tr: DEFAULT_R_TR,
            t_u: 0.0,
            t_c: std::f64::consts::FRAC_PI_4,
            t_d: std::f64::consts::FRAC_PI_4,
            t_a: 0.1,
            kappa: 0.1,
            lambda: 0.01,
            nbar: 0.0,
            gamma: 0.0,
        }
    }
}

impl GaussianParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("loss fraction {} outside [0, 1]", self.gamma)));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("TMSV weight {} outside [0, 1)", self.lambda)));
        }
        if self.nbar < 0.0 {
            return Err(Error::Config(format!("negative mean photon number {}", self.nbar)));
        }
        Ok(())
    }

    /// Reflectance `sin T` and transmittance `cos T` of an angle.
    pub fn splitter(t: f64) -> (f64, f64) {
        (t.sin(), t.cos())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

/// `D[α] = exp(α a† − α* a)`, exponentiated on the truncated space.
pub fn displacement(dim: usize, alpha: C64) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    if alpha.norm_sqr() >= dim as f64 / 4.0 {
        return Err(Error::TruncationRisk(format!(
            "|alpha|^2 = {} needs more than {dim} Fock levels",
            alpha.norm_sqr()
        )));
    }
    let a = annihilation_matrix(dim);
    // exp(G) with G anti-Hermitian equals exp(i H) for H = -i G
    let g = a.adjoint().map(|z| z * alpha) - a.map(|z| z * alpha.conj());
    let h = g.map(|z| z * -I);
    OperatorMatrix::new(ModeLayout::single(ModeLabel::U, dim)?, expm_i_hermitian(&h, 1.0), OperatorKind::Unitary)
        .map(OperatorMatrix::with_edge_exemption)
}

/// Fock amplitudes of the untruncated squeezed vacuum `S[r]|0⟩`, cut at `dim`.
pub fn squeezed_vacuum_amplitudes(dim: usize, r: f64) -> Vec<f64> {
    let mut amps = vec![0.0; dim];
    let t = -r.tanh();
    let mut coef = 1.0 / r.cosh().sqrt();
    for m in 0..dim.div_ceil(2) {
        if 2 * m < dim {
            amps[2 * m] = coef;
        }
        // c_{m+1}/c_m = t sqrt((2m+1)(2m+2)) / (2(m+1))
        let k = (m + 1) as f64;
        coef *= t * ((2.0 * k - 1.0) * (2.0 * k)).sqrt() / (2.0 * k);
    }
    amps
}

/// `S[r] = exp(−r/2 a†² + r/2 a²)`; for `r > 0` the X variance of `S[r]|0⟩` is `e^{−2r}/2`.
pub fn squeezing(dim: usize, r: f64) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    let ideal = squeezed_vacuum_amplitudes(dim, r);
    let top = ideal[dim - 1].powi(2).max(ideal[dim - 2].powi(2));
    if top > SQUEEZE_EDGE_LIMIT {
        return Err(Error::Leakage {
            mode: ModeLabel::U,
            population: top,
        });
    }
    squeezing_unchecked(dim, r)
}

pub(crate) fn squeezing_unchecked(dim: usize, r: f64) -> Result<OperatorMatrix> {
    let a = annihilation_matrix(dim);
    let a2 = &a * &a;
    let g = (a2.clone() - a2.adjoint()).scale(r / 2.0);
    let h = g.map(|z| z * -I);
    OperatorMatrix::new(ModeLayout::single(ModeLabel::U, dim)?, expm_i_hermitian(&h, 1.0), OperatorKind::Unitary)
        .map(OperatorMatrix::with_edge_exemption)
}

/// Exact action of `exp[iT(a1†a2 + a1 a2†)]` on the `N`-photon manifold,
/// indexed by the photon number of the first mode.
pub fn beam_splitter_block(total: usize, t: f64) -> CMatrix {
    let n = total + 1;
    let mut gen = CMatrix::zeros(n, n);
    for k in 0..total {
        // ⟨k+1, N−k−1| a1† a2 |k, N−k⟩
        let v = (((k + 1) * (total - k)) as f64).sqrt();
        gen[(k + 1, k)] = c(v);
        gen[(k, k + 1)] = c(v);
    }
    expm_i_hermitian(&gen, t)
}

/// Two-mode beam splitter `exp[iT(a1†a2 + a1 a2†)]`.
///
/// Every photon-number manifold is exponentiated exactly and then cut to the
/// truncated space, so manifolds that fit entirely are reproduced without
/// error and the operator never couples different photon numbers.
pub fn beam_splitter(first: Mode, second: Mode, t: f64) -> Result<OperatorMatrix> {
    check_dim(first.dim)?;
    check_dim(second.dim)?;
    let layout = ModeLayout::new([(first.label, first.dim), (second.label, second.dim)])?;
    let (d1, d2) = (first.dim, second.dim);
    let mut m = CMatrix::zeros(d1 * d2, d1 * d2);
    for total in 0..(d1 + d2 - 1) {
        let block = beam_splitter_block(total, t);
        let lo = total.saturating_sub(d2 - 1);
        let hi = total.min(d1 - 1);
        for i in lo..=hi {
            for j in lo..=hi {
                m[(i * d2 + (total - i), j * d2 + (total - j))] = block[(i, j)];
            }
        }
    }
    let limit = d1.min(d2);
    let interior = (0..d1 * d2).filter(|k| k / d2 + k % d2 < limit).collect();
    Ok(OperatorMatrix::new(layout, m, OperatorKind::Unitary)?.with_interior(interior))
}

/// `exp(iκ X1 X2)` applied through the eigenbases of the two quadratures,
/// without forming the composite matrix.
#[derive(Debug, Clone)]
pub struct QndGate {
    first: ModeLabel,
    second: ModeLabel,
    x1: HermitianEig,
    x2: HermitianEig,
    kappa: f64,
}

impl QndGate {
    pub fn new(first: Mode, second: Mode, kappa: f64) -> Result<Self> {
        check_dim(first.dim)?;
        check_dim(second.dim)?;
        if first.label == second.label {
            return Err(Error::LayoutConflict(first.label));
        }
        Ok(Self {
            first: first.label,
            second: second.label,
            x1: HermitianEig::new(&quadrature_matrix(first.dim, 0.0)),
            x2: HermitianEig::new(&quadrature_matrix(second.dim, 0.0)),
            kappa,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.kappa == 0.0 {
            return Ok(state.clone());
        }
        let layout = state.layout();
        for (label, eig) in [(self.first, &self.x1), (self.second, &self.x2)] {
            if layout.dim_of(label)? != eig.values.len() {
                return Err(Error::Layout(format!("gate built for another cutoff of mode {label}")));
            }
        }
        let (s1, s2) = (layout.stride_of(self.first)?, layout.stride_of(self.second)?);
        let (d1, d2) = (self.x1.values.len(), self.x2.values.len());
        let mut phased = state
            .apply_local(&self.x1.vectors.adjoint(), &[self.first])?
            .apply_local(&self.x2.vectors.adjoint(), &[self.second])?;
        phased.map_flat(|flat| {
            let (i, j) = ((flat / s1) % d1, (flat / s2) % d2);
            C64::from_polar(1.0, self.kappa * self.x1.values[i] * self.x2.values[j])
        });
        phased
            .apply_local(&self.x1.vectors, &[self.first])?
            .apply_local(&self.x2.vectors, &[self.second])
    }

    /// Dense matrix `(V1⊗V2) diag(e^{iκ x_i y_j}) (V1⊗V2)†`.
    pub fn matrix(&self) -> CMatrix {
        let v = self.x1.vectors.kronecker(&self.x2.vectors);
        let d2 = self.x2.values.len();
        let mut scaled = v.clone();
        for col in 0..scaled.ncols() {
            let phase = C64::from_polar(1.0, self.kappa * self.x1.values[col / d2] * self.x2.values[col % d2]);
            for row in 0..scaled.nrows() {
                scaled[(row, col)] *= phase;
            }
        }
        scaled * v.adjoint()
    }
}

/// Quantum-non-demolition gate `exp(iκ X1 X2)` as a dense operator.
pub fn qnd_xx(first: Mode, second: Mode, kappa: f64) -> Result<OperatorMatrix> {
    let gate = QndGate::new(first, second, kappa)?;
    let layout = ModeLayout::new([(first.label, first.dim), (second.label, second.dim)])?;
    Ok(OperatorMatrix::new(layout, gate.matrix(), OperatorKind::Unitary)?.with_edge_exemption())
}

/// Beam-splitter realisation of the X-X gate, `S1[r_tr] B(T_U) S1[−r_tr]`
/// with `T_U = κ / (2 cosh r_tr)`. Only meant for validating [`qnd_xx`].
///
/// The squeezers are absorbed into the generator through
/// `S[r] a S[−r] = a cosh r + a† sinh r`, which is exact, so no heavily
/// squeezed intermediate state has to fit in the truncation. What remains is
/// `exp(iT_U [e^{r} X1X2 + e^{−r} P1P2])`.
pub fn qnd_sandwich(first: Mode, second: Mode, kappa: f64, r_tr: f64) -> Result<OperatorMatrix> {
    check_dim(first.dim)?;
    check_dim(second.dim)?;
    let t_u = kappa / (2.0 * r_tr.cosh());
    let a1 = annihilation_matrix(first.dim).kronecker(&CMatrix::identity(second.dim, second.dim));
    let a2 = CMatrix::identity(first.dim, first.dim).kronecker(&annihilation_matrix(second.dim));
    let hop = a1.adjoint() * &a2;
    let pair = &a1 * &a2;
    let gen = (&hop + hop.adjoint()).scale(r_tr.cosh()) + (&pair + pair.adjoint()).scale(r_tr.sinh());
    let layout = ModeLayout::new([(first.label, first.dim), (second.label, second.dim)])?;
    Ok(OperatorMatrix::new(layout, expm_i_hermitian(&gen, t_u), OperatorKind::Unitary)?.with_edge_exemption())
}

pub fn fock_state(mode: Mode, n: usize) -> Result<StateVector> {
    StateVector::fock(ModeLayout::single(mode.label, mode.dim)?, &[n])
}

/// Analytic coherent state `|β⟩` cut at the mode cutoff.
pub fn coherent_state(mode: Mode, beta: C64) -> Result<StateVector> {
    check_dim(mode.dim)?;
    if beta.norm_sqr() >= mode.dim as f64 / 4.0 {
        return Err(Error::TruncationRisk(format!(
            "|beta|^2 = {} needs more than {} Fock levels",
            beta.norm_sqr(),
            mode.dim
        )));
    }
    let mut amps = Vec::with_capacity(mode.dim);
    let mut a = c((-beta.norm_sqr() / 2.0).exp());
    for n in 0..mode.dim {
        amps.push(a);
        a *= beta / ((n + 1) as f64).sqrt();
    }
    StateVector::from_fock_amplitudes(mode.label, &amps)
}

/// Two-mode squeezed vacuum `∝ Σ λⁿ |n, n⟩`, normalized on the truncated space.
pub fn tmsv_state(first: Mode, second: Mode, lambda: f64) -> Result<StateVector> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Config(format!("TMSV weight {lambda} outside [0, 1)")));
    }
    let layout = ModeLayout::new([(first.label, first.dim), (second.label, second.dim)])?;
    let mut amps = CVector::zeros(layout.composite_dim());
    let mut w = 1.0;
    for n in 0..first.dim.min(second.dim) {
        amps[layout.flat_index(&[n, n])?] = c(w);
        w *= lambda;
    }
    Ok(StateVector::new(layout, amps)?.normalize()?.0)
}

fn fock_mixture(mode: Mode, weights: Vec<f64>) -> Result<DensityOperator> {
    let layout = ModeLayout::single(mode.label, mode.dim)?;
    let comps = weights
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .map(|(n, w)| Ok((w, StateVector::fock(layout.clone(), &[n])?)))
        .collect::<Result<Vec<_>>>()?;
    DensityOperator::from_ensemble(comps)
}

/// `ρ = (n̄/(n̄+1))^n̂ / (n̄+1)` as a Fock-diagonal ensemble (weights are not renormalized).
pub fn thermal_state(mode: Mode, nbar: f64) -> Result<DensityOperator> {
    check_dim(mode.dim)?;
    if nbar < 0.0 {
        return Err(Error::Config(format!("negative mean photon number {nbar}")));
    }
    let q = nbar / (nbar + 1.0);
    let tail = q.powi(mode.dim as i32);
    if tail > THERMAL_TAIL_LIMIT {
        return Err(Error::TruncationRisk(format!(
            "thermal tail {tail:e} beyond {} Fock levels",
            mode.dim
        )));
    }
    let weights = (0..mode.dim).map(|n| q.powi(n as i32) / (nbar + 1.0)).collect();
    fock_mixture(mode, weights)
}

/// Phase-randomized coherent state: a Poisson mixture of Fock states with mean `|β|²`.
pub fn prc_state(mode: Mode, beta: f64) -> Result<DensityOperator> {
    check_dim(mode.dim)?;
    let mean = beta * beta;
    if mean >= mode.dim as f64 / 4.0 {
        return Err(Error::TruncationRisk(format!(
            "mean photon number {mean} needs more than {} Fock levels",
            mode.dim
        )));
    }
    let mut weights = Vec::with_capacity(mode.dim);
    let mut p = (-mean).exp();
    for n in 0..mode.dim {
        weights.push(p);
        p *= mean / (n + 1) as f64;
    }
    fock_mixture(mode, weights)
}

/// Kraus operators of pure loss with fraction `gamma`:
/// `K_k = Σ_n √C(n,k) (1−γ)^{(n−k)/2} γ^{k/2} |n−k⟩⟨n|`.
pub fn loss_kraus(dim: usize, gamma: f64) -> Result<Vec<CMatrix>> {
    check_dim(dim)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("loss fraction {gamma} outside [0, 1]")));
    }
    let mut ops = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut m = CMatrix::zeros(dim, dim);
        for n in k..dim {
            let amp = binomial(n, k).sqrt() * (1.0 - gamma).powf((n - k) as f64 / 2.0) * gamma.powf(k as f64 / 2.0);
            m[(n - k, n)] = c(amp);
        }
        ops.push(m);
    }
    Ok(ops)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Pure loss on `mode`, applied through its Kraus operators.
pub fn loss_channel(rho: &DensityOperator, mode: ModeLabel, gamma: f64) -> Result<DensityOperator> {
    if gamma == 0.0 {
        rho.layout().position(mode)?;
        return Ok(rho.clone());
    }
    let dim = rho.layout().dim_of(mode)?;
    rho.apply_kraus(&loss_kraus(dim, gamma)?, &[mode])
}

/// Pure loss modelled as a beam splitter with `cos²T = 1−γ` onto a vacuum
/// environment of the same cutoff, which is then traced out.
pub fn loss_channel_beam_splitter(rho: &DensityOperator, mode: ModeLabel, gamma: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("loss fraction {gamma} outside [0, 1]")));
    }
    let dim = rho.layout().dim_of(mode)?;
    let env = StateVector::vacuum(ModeLayout::single(ModeLabel::Env, dim)?).to_density();
    let joint = rho.tensor(&env)?;
    let t = (1.0 - gamma).sqrt().acos();
    let bs = beam_splitter(Mode::new(mode, dim), Mode::new(ModeLabel::Env, dim), t)?;
    let coupled = joint.apply_local(bs.matrix(), &[mode, ModeLabel::Env])?;
    let keep: Vec<ModeLabel> = rho.layout().labels().collect();
    coupled.partial_trace(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::linalg::MaxAbs;
    use crate::fock::operator::number_matrix;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    const U25: Mode = Mode::new(ModeLabel::U, 25);
    const UP6: Mode = Mode::new(ModeLabel::UPrime, 6);

    // scaling-and-squaring Taylor exponential, independent of the eigen route
    fn expm_taylor(m: &CMatrix) -> CMatrix {
        let n = m.nrows();
        let norm = m.iter().map(|z| z.norm()).sum::<f64>();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let a = m.unscale(2f64.powi(squarings));
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &a / c(k as f64);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    fn overlap_sqr(a: &StateVector, b: &StateVector) -> f64 {
        a.inner(b).unwrap().norm_sqr() / (a.norm_sqr() * b.norm_sqr())
    }

    fn interior_block(m: &CMatrix, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
    }

    #[test]
    fn displacement_basics() {
        let d0 = displacement(25, c(0.0)).unwrap();
        assert!((d0.matrix() - CMatrix::identity(25, 25)).max_abs() < 1e-14);

        let coh = displacement(25, c(1.0))
            .unwrap()
            .apply(&StateVector::vacuum(ModeLayout::single(ModeLabel::U, 25).unwrap()))
            .unwrap();
        let n = coh.expectation(&number_matrix(25), &[ModeLabel::U]).unwrap();
        assert!((n.re - 1.0).abs() < 1e-6);

        assert!(matches!(displacement(8, c(1.5)), Err(Error::TruncationRisk(_))));
    }

    #[test]
    fn displacement_is_position_kick() {
        let t = 0.7;
        let d = displacement(25, C64::new(0.0, t * FRAC_1_SQRT_2)).unwrap();
        let oracle = expm_taylor(&quadrature_matrix(25, 0.0).map(|z| z * C64::new(0.0, t)));
        let idx = d.interior_indices();
        assert!((interior_block(d.matrix(), &idx) - interior_block(&oracle, &idx)).max_abs() < 1e-8);
        d.check_unitary().unwrap();
    }

    #[test]
    fn squeezing_variance_and_inverse() {
        assert!((squeezing(25, 0.0).unwrap().matrix() - CMatrix::identity(25, 25)).max_abs() < 1e-14);

        let vac = StateVector::vacuum(ModeLayout::single(ModeLabel::U, 25).unwrap());
        let sq = squeezing(25, 0.5).unwrap().apply(&vac).unwrap();
        let x = quadrature_matrix(25, 0.0);
        let var = sq.expectation(&(&x * &x), &[ModeLabel::U]).unwrap().re;
        assert!((var - (-1.0f64).exp() / 2.0).abs() < 1e-5);

        let s = squeezing(25, 0.8).unwrap();
        let s_inv = squeezing(25, -0.8).unwrap();
        let prod = s.compose(&s_inv).unwrap();
        let idx = prod.interior_indices();
        assert!((interior_block(prod.matrix(), &idx) - CMatrix::identity(idx.len(), idx.len())).max_abs() < 1e-8);
    }

    #[test]
    fn squeezed_amplitudes_match_builder() {
        let vac = StateVector::vacuum(ModeLayout::single(ModeLabel::U, 40).unwrap());
        let sq = squeezing(40, 0.4).unwrap().apply(&vac).unwrap();
        for (n, a) in squeezed_vacuum_amplitudes(40, 0.4).iter().enumerate().take(20) {
            assert!((sq.amplitudes()[n] - c(*a)).norm() < 1e-10, "level {n}");
        }
    }

    #[test]
    fn squeezing_guard() {
        assert!(squeezing(25, 1.5).is_ok());
        assert!(matches!(squeezing(25, 2.0), Err(Error::Leakage { .. })));
    }

    #[test]
    fn beam_splitter_single_photon() {
        let a = Mode::new(ModeLabel::D, 3);
        let b = Mode::new(ModeLabel::DPrime, 3);
        let id = beam_splitter(a, b, 0.0).unwrap();
        assert!((id.matrix() - CMatrix::identity(9, 9)).max_abs() < 1e-14);

        let t = 0.37;
        let bs = beam_splitter(a, b, t).unwrap();
        let layout = bs.layout().clone();
        let out = bs.apply(&StateVector::fock(layout.clone(), &[1, 0]).unwrap()).unwrap();
        let oracle = expm_taylor(&CMatrix::from_row_slice(2, 2, &[c(0.0), c(t), c(t), c(0.0)]).map(|z| z * I));
        assert!((out.amplitude(&[1, 0]).unwrap() - oracle[(0, 0)]).norm() < 1e-12);
        assert!((out.amplitude(&[0, 1]).unwrap() - oracle[(1, 0)]).norm() < 1e-12);

        let swap = beam_splitter(a, b, FRAC_PI_2).unwrap();
        let out = swap.apply(&StateVector::fock(layout, &[1, 0]).unwrap()).unwrap();
        assert!((out.amplitude(&[0, 1]).unwrap() - I).norm() < 1e-12);
        swap.check_unitary().unwrap();
    }

    #[test]
    fn qnd_identity_and_sandwich() {
        let id = qnd_xx(U25, UP6, 0.0).unwrap();
        assert!((id.matrix() - CMatrix::identity(150, 150)).max_abs() < 1e-12);

        let kappa = 0.1;
        let exact = qnd_xx(U25, UP6, kappa).unwrap();
        let sandwich = qnd_sandwich(U25, UP6, kappa, DEFAULT_R_TR).unwrap();
        let layout = exact.layout().clone();
        for levels in [[0, 0], [1, 0]] {
            let input = StateVector::fock(layout.clone(), &levels).unwrap();
            let f = overlap_sqr(&exact.apply(&input).unwrap(), &sandwich.apply(&input).unwrap());
            assert!(f >= 0.999, "input {levels:?}: fidelity {f}");
        }
    }

    #[test]
    fn qnd_gate_matches_dense() {
        let gate = QndGate::new(U25, UP6, 0.3).unwrap();
        let dense = qnd_xx(U25, UP6, 0.3).unwrap();
        let layout = ModeLayout::new([(ModeLabel::D, 2), (ModeLabel::U, 25), (ModeLabel::UPrime, 6)]).unwrap();
        let input = StateVector::fock(layout, &[1, 2, 1]).unwrap();
        let a = gate.apply(&input).unwrap();
        let b = dense.apply(&input).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).max_abs() < 1e-12);
    }

    #[test]
    fn qnd_kicks_conjugate_mode_by_position() {
        let (kappa, xbar) = (0.5, 1.0);
        let single_u = ModeLayout::single(ModeLabel::U, 25).unwrap();
        let pointer = displacement(25, c(xbar * FRAC_1_SQRT_2))
            .unwrap()
            .apply(&squeezing(25, 1.2).unwrap().apply(&StateVector::vacuum(single_u)).unwrap())
            .unwrap();
        let probe = StateVector::vacuum(ModeLayout::single(ModeLabel::UPrime, 6).unwrap());
        let out = QndGate::new(U25, UP6, kappa)
            .unwrap()
            .apply(&pointer.tensor(&probe).unwrap())
            .unwrap();
        let rho2 = out.to_density().partial_trace(&[ModeLabel::UPrime]).unwrap();
        let target = displacement(6, C64::new(0.0, kappa * xbar * FRAC_1_SQRT_2))
            .unwrap()
            .on(ModeLabel::UPrime)
            .apply(&probe)
            .unwrap();
        let f = target.amplitudes().dotc(&(rho2.matrix() * target.amplitudes())).re;
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn qnd_small_kappa_expansion() {
        let kappa = 0.1;
        let gate = qnd_xx(U25, UP6, kappa).unwrap();
        let x1x2 = quadrature_matrix(25, 0.0).kronecker(&quadrature_matrix(6, 0.0));
        let linear = CMatrix::identity(150, 150) + x1x2.map(|z| z * I * kappa);
        let idx = gate.interior_indices();
        let diff = interior_block(&(gate.matrix() - linear), &idx);
        let c_bound = crate::fock::linalg::op_norm(&diff) / (kappa * kappa);
        assert!(c_bound <= QND_EXPANSION_BOUND, "c = {c_bound}");
    }

    // measured once at kappa = 0.1 on 25x6 and frozen
    const QND_EXPANSION_BOUND: f64 = 58.0;

    #[test]
    fn tmsv_weights() {
        let d = Mode::new(ModeLabel::D, 3);
        let dp = Mode::new(ModeLabel::DPrime, 3);
        let vac = tmsv_state(d, dp, 0.0).unwrap();
        assert_eq!(vac.amplitude(&[0, 0]).unwrap(), c(1.0));
        let s = tmsv_state(d, dp, 0.01).unwrap();
        let a00 = s.amplitude(&[0, 0]).unwrap();
        assert!((s.amplitude(&[1, 1]).unwrap() / a00 - c(0.01)).norm() < 1e-12);
        assert!((s.amplitude(&[2, 2]).unwrap() / a00 - c(1e-4)).norm() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_weights() {
        let t0 = thermal_state(U25, 0.0).unwrap();
        assert_eq!(t0.matrix()[(0, 0)], c(1.0));
        assert!((t0.trace() - 1.0).abs() < 1e-15);
        let t1 = thermal_state(U25, 1.0).unwrap();
        assert!((t1.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((t1.matrix()[(1, 1)].re - 0.25).abs() < 1e-15);
        assert!(matches!(thermal_state(Mode::new(ModeLabel::U, 6), 3.0), Err(Error::TruncationRisk(_))));
    }

    #[test]
    fn prc_matches_phase_average() {
        let prc = prc_state(U25, 1.0).unwrap();
        let mut avg = CMatrix::zeros(25, 25);
        for k in 0..64 {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let coh = coherent_state(U25, C64::from_polar(1.0, phi)).unwrap();
            avg += coh.to_density().matrix() / c(64.0);
        }
        assert!((prc.matrix() - &avg).max_abs() < 1e-12);
        let off = (0..25)
            .flat_map(|i| (0..25).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| prc.matrix()[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-12);
        assert!((prc.matrix()[(0, 0)].re - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn loss_on_coherent_and_thermal() {
        let coh = coherent_state(U25, c(1.0)).unwrap().to_density();
        assert!((loss_channel(&coh, ModeLabel::U, 0.0).unwrap().matrix() - coh.matrix()).max_abs() < 1e-15);

        let lost = loss_channel(&coh, ModeLabel::U, 0.15).unwrap();
        let target = coherent_state(U25, c(0.85f64.sqrt())).unwrap();
        let f = target.amplitudes().dotc(&(lost.matrix() * target.amplitudes())).re;
        assert!((f - 1.0).abs() < 1e-8);

        let th = thermal_state(U25, 1.0).unwrap();
        let n0 = th.expectation(&number_matrix(25), &[ModeLabel::U]).unwrap().re;
        let n1 = loss_channel(&th, ModeLabel::U, 0.15)
            .unwrap()
            .expectation(&number_matrix(25), &[ModeLabel::U])
            .unwrap()
            .re;
        assert!((n1 - 0.85 * n0).abs() < 1e-12);
    }

    fn random_state(dim: usize, seed: &[f64]) -> StateVector {
        let amps: Vec<C64> = (0..dim).map(|k| C64::new(seed[2 * k], seed[2 * k + 1])).collect();
        StateVector::from_fock_amplitudes(ModeLabel::U, &amps).unwrap().normalize().unwrap().0
    }

    proptest! {
        #[test]
        fn loss_routes_agree(seed in prop::collection::vec(-1.0f64..1.0, 16), gamma in 0.0f64..=1.0) {
            prop_assume!(seed.iter().any(|x| x.abs() > 0.1));
            let rho = random_state(8, &seed).to_density();
            let kraus = loss_channel(&rho, ModeLabel::U, gamma).unwrap();
            let bs = loss_channel_beam_splitter(&rho, ModeLabel::U, gamma).unwrap();
            prop_assert!((kraus.matrix() - bs.matrix()).max_abs() < 1e-9);
            prop_assert!((kraus.trace() - 1.0).abs() < 1e-10);
            prop_assert!(kraus.min_eigenvalue() >= -1e-9);
        }

        #[test]
        fn beam_splitter_conserves_number(t in -3.2f64..3.2) {
            let bs = beam_splitter(Mode::new(ModeLabel::U, 5), Mode::new(ModeLabel::Env, 4), t).unwrap();
            let n_tot = number_matrix(5).kronecker(&CMatrix::identity(4, 4))
                + CMatrix::identity(5, 5).kronecker(&number_matrix(4));
            let comm = bs.matrix() * &n_tot - &n_tot * bs.matrix();
            prop_assert!(comm.max_abs() < 1e-12);
            prop_assert!(bs.interior_unitarity_defect() < 1e-12);
        }
    }
}
