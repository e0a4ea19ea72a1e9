use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{Matching, SetupConfig};
use crate::conditional::{
    vacuum_transparent_filter, x_function, CorrectionSpec, CorrectionStage, DetectionModule, MeasurementSqueezer,
    PreparedDetection, FILTER_GAIN_LIMIT,
};
use crate::error::{Error, Result};
use crate::fock::linalg::{c, kron, op_norm, CMatrix, CVector, CompensatedSum, HermitianEig, C64};
use crate::fock::operator::quadrature_matrix;
use crate::fock::{DensityOperator, Mode, ModeLabel, ModeLayout, StateVector, HERALD_FLOOR};
use crate::gaussian::{beam_splitter, displacement, loss_channel, squeezed_vacuum_amplitudes, tmsv_state};

/// Largest population tolerated on the top Fock level of `u` or `u'`.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Circuit parameters derived from a [`SetupConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub kappa: f64,
    pub t_c: f64,
    pub t_d: f64,
    pub phase: f64,
    /// Strength of the Gaussian `e^{−ζ_s X²}` that completes the second-order
    /// factor on `u`; negative values undo excess squeezing.
    pub completion_zeta: f64,
    /// Phase `c` of the redundant `e^{icX}` removed from `u` (nonzero only for a displaced ancilla).
    pub displacement_shift: f64,
    pub kappa_prime: f64,
    pub r_corr: f64,
    /// The scheme attaches the vacuum map to the opposite qubit level, so the
    /// rails of `d` are exchanged after heralding.
    pub swap_rails: bool,
    /// Converts the herald probability into the per-resource success
    /// probability (1 for the single photon, `N²/(2λ²)` for the TMSV).
    pub resource_scale: f64,
}

fn angle_from_cot(cot: f64) -> f64 {
    1f64.atan2(cot)
}

/// Derives the circuit parameters for the configured target strength.
pub fn resolve(config: &SetupConfig) -> Result<Resolved> {
    config.validate()?;
    let t = config.t;
    let order3 = config.variant.order() == 3;
    let photon = config.variant.uses_photon();
    let e2r1 = (2.0 * config.r).exp() + 1.0;
    let gain = if order3 { (1.0 + config.zeta).powf(1.5) } else { 1.0 };
    if order3 && (config.alpha != 0.0 || config.r != 0.0) {
        return Err(Error::ConfigInconsistency("the third-order scheme needs a vacuum u' ancilla".into()));
    }
    // heralded maps: O1/O0 = i ρ1 X, common Gaussian e^{−κ²X²/(2(e^{2r}+1))}
    let rho1 = |kappa: f64| SQRT_2 * kappa / e2r1;
    let lam = config.lambda;
    let no_solution = || Error::ConfigInconsistency(format!("no splitter setting reaches t = {t} with these parameters"));
    let (kappa, t_c, t_d) = match config.matching {
        Matching::Auto if photon => {
            let kappa = if order3 { SQRT_2 * t } else { t * e2r1.sqrt() };
            let k = gain * e2r1.sqrt() / SQRT_2;
            let each = angle_from_cot(k.sqrt());
            (kappa, each, each)
        }
        Matching::Auto if order3 => (SQRT_2 * t, angle_from_cot(gain * lam), config.t_d),
        Matching::Auto => (t * lam * e2r1 / SQRT_2, std::f64::consts::FRAC_PI_4, config.t_d),
        Matching::FixedKappa => {
            let kappa = config.kappa;
            if rho1(kappa) == 0.0 && t != 0.0 {
                return Err(no_solution());
            }
            let ratio = if t == 0.0 { 0.0 } else { t * gain / rho1(kappa) };
            if photon {
                let cot_c = 1.0 / config.t_c.tan();
                if !(cot_c > 0.0) {
                    return Err(no_solution());
                }
                (kappa, config.t_c, angle_from_cot(ratio / cot_c))
            } else {
                (kappa, angle_from_cot(ratio * lam), config.t_d)
            }
        }
        Matching::Manual => {
            let (tc, td) = (config.t_c, config.t_d);
            let implied = if photon {
                rho1(config.kappa) / (tc.tan() * td.tan() * gain)
            } else {
                rho1(config.kappa) / (tc.tan() * lam * gain)
            };
            if (implied - t).abs() > 1e-6 {
                return Err(Error::ConfigInconsistency(format!(
                    "splitters and kappa realize t = {implied}, not the target {t}"
                )));
            }
            (config.kappa, tc, td)
        }
    };
    if order3 && (kappa - SQRT_2 * t).abs() > 1e-6 {
        return Err(Error::ConfigInconsistency(format!(
            "the third-order scheme needs kappa = sqrt(2) t = {}, got {kappa}",
            SQRT_2 * t
        )));
    }
    let completion_zeta = if order3 { 0.0 } else { t * t / 2.0 - kappa * kappa / (2.0 * e2r1) };
    let correction = CorrectionSpec::derive(kappa, c(config.alpha), config.r, CorrectionStage::Numerical);
    let displacement_shift = 2.0 * SQRT_2 * (e2r1 - 1.0) * kappa * config.alpha / (2.0 * e2r1);
    let resource_scale = if photon {
        1.0
    } else {
        let n = config.dims.d.min(config.dims.d_prime);
        let norm: f64 = (0..n).map(|k| lam.powi(2 * k as i32)).sum();
        norm / (2.0 * lam * lam)
    };
    Ok(Resolved {
        kappa,
        t_c,
        t_d,
        phase: config.phase.unwrap_or(if photon { PI } else { -FRAC_PI_2 }),
        completion_zeta,
        displacement_shift,
        kappa_prime: MeasurementSqueezer::from_splitter(config.r_prime, config.t_a, config.r_tr).kappa_prime,
        r_corr: correction.r_corr,
        swap_rails: config.qubit_input.basis_level()? != usize::from(!photon),
        resource_scale,
    })
}

/// Populations found on the top Fock levels during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct LeakageReport {
    pub u: f64,
    pub u_prime: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    /// Normalized state on `(u, d)`.
    pub joint_state: DensityOperator,
    pub success_probability: f64,
    pub config: SetupConfig,
    pub resolved: Resolved,
    pub leakage: LeakageReport,
}

impl SimulationResult {
    pub fn steer(&self, outcome: Steering) -> Result<(DensityOperator, f64)> {
        steer(&self.joint_state, outcome)
    }
}

/// Runs the configured scheme on the configured `u` input.
pub fn run_setup(config: &SetupConfig) -> Result<SimulationResult> {
    config.validate()?;
    let input = config.cv_input.state(config.dims.u)?;
    run_setup_on(&input, config)
}

/// The heralded circuit as Kraus maps `u → (u, d)`. Everything between the
/// input and the detector acts on `u` only through `X_u`, so with
/// `G_k = ⟨k|_{u'} F e^{iκ X_u X_{u'}} |anc⟩` each undetected photon number
/// contributes `K = Σ_k w_k G_k ⊗ ℓ_k`, with `w_k` the splitter amplitude and
/// `ℓ_k` the lower arm projected on the matching `d'` count. The truncation is
/// that of the full state-vector circuit.
struct Circuit {
    resolved: Resolved,
    layout: ModeLayout,
    kraus: Vec<CMatrix>,
    /// `‖lower‖² G_top† G_top`, the `u'` top-level population as a quadratic form.
    top: CMatrix,
}

impl Circuit {
    fn new(config: &SetupConfig) -> Result<Self> {
        let resolved = resolve(config)?;
        let dims = config.dims;
        let (du, dup, dd, ddp) = (dims.u, dims.u_prime, dims.d, dims.d_prime);
        let lower = lower_arm(config, &resolved)?;
        let mut lower_m = CMatrix::from_row_slice(dd, ddp, lower.amplitudes().as_slice());
        for j in 0..ddp {
            let mut col = lower_m.column_mut(j);
            col *= C64::from_polar(1.0, resolved.phase * j as f64);
        }
        let g = ancilla_maps(config, &resolved)?;
        let (zs, shift) = (resolved.completion_zeta, resolved.displacement_shift);
        let post_u = x_function(du, |x| C64::from_polar((-zs * x * x).exp(), -shift * x));
        let gain = op_norm(&post_u);
        if !gain.is_finite() || gain > FILTER_GAIN_LIMIT {
            return Err(Error::Leakage {
                mode: ModeLabel::U,
                population: gain,
            });
        }
        if resolved.swap_rails {
            lower_m.swap_rows(0, 1);
        }
        let g_post: Vec<CMatrix> = g.iter().map(|gk| &post_u * gk).collect();
        let mut module = DetectionModule::new(resolved.t_c);
        module.detector = config.detector;
        module.partner = config.partner;
        let detection = PreparedDetection::new(module, dup, ddp)?;
        let mut kraus = Vec::new();
        for (n, total, block) in detection.terms() {
            let mut k_map = CMatrix::zeros(du * dd, du);
            for k in total.saturating_sub(ddp - 1)..=(*total).min(dup - 1) {
                let w = block[(*n, k)];
                if w != c(0.0) {
                    k_map += kron(&g_post[k], &lower_m.columns(total - k, 1).into_owned()) * w;
                }
            }
            if k_map.iter().any(|z| *z != c(0.0)) {
                kraus.push(k_map);
            }
        }
        let g_top = &g[dup - 1];
        let top = g_top.adjoint() * g_top * c(lower.norm_sqr());
        Ok(Self {
            resolved,
            layout: ModeLayout::new([(ModeLabel::U, du), (ModeLabel::D, dd)])?,
            kraus,
            top,
        })
    }

    /// Unnormalized heralded branches on `(u, d)` for one pure input, and the
    /// absolute population on the top level of `u'` before detection.
    fn branches(&self, psi: &StateVector) -> Result<(Vec<StateVector>, f64)> {
        let v = psi.amplitudes();
        let leak = v.dotc(&(&self.top * v)).re;
        let out = self
            .kraus
            .iter()
            .map(|k| StateVector::new(self.layout.clone(), k * v))
            .collect::<Result<Vec<_>>>()?;
        Ok((out.into_iter().filter(|b| b.norm_sqr() > 0.0).collect(), leak))
    }
}

/// State of `(d, d')` entering the detection module.
fn lower_arm(config: &SetupConfig, resolved: &Resolved) -> Result<StateVector> {
    let dims = config.dims;
    let (mode_d, mode_dp) = (Mode::new(ModeLabel::D, dims.d), Mode::new(ModeLabel::DPrime, dims.d_prime));
    if config.variant.uses_photon() {
        let one = StateVector::fock(ModeLayout::new([(ModeLabel::D, dims.d), (ModeLabel::DPrime, dims.d_prime)])?, &[1, 0])?;
        beam_splitter(mode_d, mode_dp, resolved.t_d)?.apply(&one)
    } else {
        tmsv_state(mode_d, mode_dp, config.lambda)
    }
}

/// `G_k = ⟨k|_{u'} F e^{iκ X_u X_{u'}} |anc⟩` for every level `k` of `u'`, as
/// matrices on `u`.
fn ancilla_maps(config: &SetupConfig, resolved: &Resolved) -> Result<Vec<CMatrix>> {
    let (du, dup) = (config.dims.u, config.dims.u_prime);
    let sq: Vec<C64> = squeezed_vacuum_amplitudes(dup, config.r).into_iter().map(c).collect();
    let mut anc = CVector::from_vec(sq);
    if config.alpha != 0.0 {
        anc = displacement(dup, c(config.alpha))?.matrix() * anc;
    }
    let filter = if config.variant.order() == 3 {
        Some(vacuum_transparent_filter(dup, config.zeta)?)
    } else {
        None
    };
    let xu = HermitianEig::new(&quadrature_matrix(du, 0.0));
    let xp = HermitianEig::new(&quadrature_matrix(dup, 0.0));
    let anc_rot = xp.vectors.adjoint() * anc;
    // column i: the u' state attached to the X_u eigenvalue x_i
    let mut cols = CMatrix::zeros(dup, du);
    for (i, &x) in xu.values.iter().enumerate() {
        let phased = CVector::from_iterator(
            dup,
            anc_rot.iter().zip(&xp.values).map(|(a, &y)| a * C64::from_polar(1.0, resolved.kappa * x * y)),
        );
        let mut v = &xp.vectors * phased;
        if let Some(f) = &filter {
            v = f * v;
        }
        cols.set_column(i, &v);
    }
    Ok((0..dup)
        .map(|k| {
            let mut m = xu.vectors.clone();
            for i in 0..du {
                let mut col = m.column_mut(i);
                col *= cols[(k, i)];
            }
            m * xu.vectors.adjoint()
        })
        .collect())
}

/// Runs the scheme on an arbitrary `u` input. Mixed inputs run component by
/// component over their ensemble (Fock-diagonal for thermal and
/// phase-randomized states) and are recombined with compensated sums.
pub fn run_setup_on(input: &DensityOperator, config: &SetupConfig) -> Result<SimulationResult> {
    config.validate()?;
    if input.layout().len() != 1 || input.layout().dim_of(ModeLabel::U)? != config.dims.u {
        return Err(Error::Layout(format!("input must live on u with cutoff {}", config.dims.u)));
    }
    let circuit = Circuit::new(config)?;
    let components = input.components();
    let total_weight: f64 = components.iter().map(|(w, _)| w).sum();
    let mut parts = Vec::new();
    let mut leak_up = 0.0;
    for (w, psi) in &components {
        let (branches, leak) = circuit.branches(psi)?;
        leak_up += w * leak;
        parts.extend(branches.into_iter().map(|b| (*w, b)));
    }
    if parts.is_empty() {
        return Err(Error::DegenerateHerald(0.0));
    }
    let heralded = if parts.len() == 1 {
        DensityOperator::from_ensemble(parts)?
    } else {
        // one weighted Gram product per input component keeps large ensembles cheap
        let n = circuit.layout.composite_dim();
        let mut acc = CompensatedSum::zeros(n, n);
        for chunk in parts.chunk_by(|a, b| a.0 == b.0) {
            let cols: Vec<CVector> = chunk.iter().map(|(_, b)| b.amplitudes().clone()).collect();
            let m = CMatrix::from_columns(&cols);
            acc.add(&(&m * m.adjoint()).scale(chunk[0].0));
        }
        DensityOperator::new(circuit.layout.clone(), acc.finish())?
    };
    let raw = heralded.trace() / total_weight;
    if !(raw > HERALD_FLOOR) {
        return Err(Error::DegenerateHerald(raw));
    }
    let leak_up = leak_up / total_weight;
    if leak_up > LEAKAGE_LIMIT {
        return Err(Error::Leakage {
            mode: ModeLabel::UPrime,
            population: leak_up,
        });
    }
    let leak_u = heralded.top_level_population(ModeLabel::U)?;
    if leak_u > LEAKAGE_LIMIT {
        return Err(Error::Leakage {
            mode: ModeLabel::U,
            population: leak_u,
        });
    }
    let lossy = loss_channel(&heralded, ModeLabel::U, config.gamma)?;
    Ok(SimulationResult {
        joint_state: lossy.normalized()?,
        success_probability: raw * circuit.resolved.resource_scale,
        config: config.clone(),
        resolved: circuit.resolved,
        leakage: LeakageReport { u: leak_u, u_prime: leak_up },
    })
}

/// Projection of the qubit mode `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Steering {
    P0,
    P1,
    PPlus,
    PMinus,
    /// `⟨0| + δ⟨1|` (normalized), which turns the ideal output on `|0⟩_d`
    /// into `(cos tX + iδ sin tX)|ψ⟩`.
    General { delta: C64 },
}

impl Steering {
    pub fn label(&self) -> String {
        match self {
            Steering::P0 => "P0".into(),
            Steering::P1 => "P1".into(),
            Steering::PPlus => "P+".into(),
            Steering::PMinus => "P-".into(),
            Steering::General { delta } => format!("general({delta})"),
        }
    }

    fn ket(&self, dim: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        let s = FRAC_1_SQRT_2;
        let (a, b) = match *self {
            Steering::P0 => (c(1.0), c(0.0)),
            Steering::P1 => (c(0.0), c(1.0)),
            Steering::PPlus => (c(s), c(s)),
            Steering::PMinus => (c(s), c(-s)),
            Steering::General { delta } => {
                let n = (1.0 + delta.norm_sqr()).sqrt();
                (c(1.0 / n), delta.conj() / n)
            }
        };
        v[0] = a;
        v[1] = b;
        v
    }
}

/// Projects `d` of a joint `(u, d)` state and returns the normalized state of
/// `u` with the outcome probability.
pub fn steer(joint: &DensityOperator, outcome: Steering) -> Result<(DensityOperator, f64)> {
    let dim = joint.layout().dim_of(ModeLabel::D)?;
    let projected = joint.project_mode(ModeLabel::D, &outcome.ket(dim))?;
    let p = projected.trace() / joint.trace();
    if !(p > HERALD_FLOOR) {
        return Err(Error::DegenerateHerald(p));
    }
    Ok((projected.normalized()?, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditional::{detection_module, Partner};
    use crate::gaussian::QndGate;
    use crate::metrics::{fidelity, negativity};
    use crate::setups::{ideal_rabi, process_output, taylor_rabi_factorized, CvInput, QubitInput, Variant};

    fn small(variant: Variant, t: f64) -> SetupConfig {
        let mut cfg = SetupConfig { variant, t, matching: Matching::Auto, ..Default::default() };
        cfg.dims.u = 10;
        cfg.dims.u_prime = 30;
        cfg
    }

    /// The circuit composed literally on the full `(u, u', d, d')` state.
    fn literal(cfg: &SetupConfig, psi: &StateVector) -> DensityOperator {
        let r = resolve(cfg).unwrap();
        let d = cfg.dims;
        let qnd = QndGate::new(Mode::new(ModeLabel::U, d.u), Mode::new(ModeLabel::UPrime, d.u_prime), r.kappa).unwrap();
        let anc = StateVector::from_fock_amplitudes(
            ModeLabel::UPrime,
            &squeezed_vacuum_amplitudes(d.u_prime, cfg.r).into_iter().map(c).collect::<Vec<_>>(),
        )
        .unwrap();
        let mut state = qnd.apply(&psi.tensor(&anc).unwrap().tensor(&lower_arm(cfg, &r).unwrap()).unwrap()).unwrap();
        if cfg.variant.order() == 3 {
            state = state.apply_local(&vacuum_transparent_filter(d.u_prime, cfg.zeta).unwrap(), &[ModeLabel::UPrime]).unwrap();
        }
        let mut module = DetectionModule::new(r.t_c);
        module.phase_dprime = r.phase;
        let h = detection_module(&state, &module).unwrap();
        let zs = r.completion_zeta;
        let post = x_function(d.u, |x| c((-zs * x * x).exp()));
        let mut swap = CMatrix::identity(d.d, d.d);
        if r.swap_rails {
            swap.swap_rows(0, 1);
        }
        let parts = h
            .branches
            .into_iter()
            .map(|b| (1.0, b.apply_local(&post, &[ModeLabel::U]).unwrap().apply_local(&swap, &[ModeLabel::D]).unwrap()))
            .collect();
        DensityOperator::from_ensemble(parts).unwrap()
    }

    #[test]
    fn kraus_maps_match_literal_circuit() {
        let psi = crate::gaussian::coherent_state(Mode::new(ModeLabel::U, 10), c(0.5)).unwrap();
        for variant in Variant::ALL {
            for qubit in [QubitInput::Zero, QubitInput::One] {
                let mut cfg = small(variant, 0.15);
                cfg.qubit_input = qubit;
                let fast = run_setup_on(&psi.to_density(), &cfg).unwrap();
                let slow = literal(&cfg, &psi);
                let raw = slow.trace() / psi.norm_sqr();
                assert!((fast.success_probability - raw * fast.resolved.resource_scale).abs() < 1e-12, "{variant}");
                let diff = fast.joint_state.matrix() - slow.normalized().unwrap().matrix();
                assert!(diff.norm() < 1e-10, "{variant} {qubit:?}");
            }
        }
    }

    #[test]
    fn second_order_target_at_fixed_kappa() {
        for input in [CvInput::Vacuum, CvInput::Coherent { beta: 1.0 }] {
            for t in [0.1, 0.3, 0.5] {
                let cfg = SetupConfig { t, matching: Matching::FixedKappa, kappa: 0.1, cv_input: input, ..Default::default() };
                let out = run_setup(&cfg).unwrap();
                let target = process_output(
                    &taylor_rabi_factorized(cfg.dims.u, t).unwrap(),
                    &input.state(cfg.dims.u).unwrap(),
                    &cfg.qubit_input,
                    cfg.dims.d,
                )
                .unwrap();
                let f = fidelity(&target, &out.joint_state).unwrap();
                assert!(f >= 0.99, "{} t={t} F={f}", input.label());
            }
        }
    }

    #[test]
    fn vacuum_partner_reproduces_target_phase() {
        // without multi-photon heralds the output is the analytic map itself,
        // which pins the phase-shifter conventions of both lower arms
        for variant in [Variant::U2Photon, Variant::U2Tmsv] {
            let mut cfg = SetupConfig { variant, t: 0.4, matching: Matching::Auto, partner: Partner::Vacuum, ..Default::default() };
            cfg.dims.u_prime = 30;
            let out = run_setup(&cfg).unwrap();
            let target = process_output(
                &taylor_rabi_factorized(cfg.dims.u, 0.4).unwrap(),
                &cfg.cv_input.state(cfg.dims.u).unwrap(),
                &cfg.qubit_input,
                cfg.dims.d,
            )
            .unwrap();
            let f = fidelity(&target, &out.joint_state).unwrap();
            let tol = if variant.uses_photon() { 1e-9 } else { 1e-3 };
            assert!(f > 1.0 - tol, "{variant} F={f}");
        }
    }

    #[test]
    fn third_order_beats_second_with_vacuum_partner() {
        let fid = |variant| {
            let mut cfg = SetupConfig { variant, t: 0.7, matching: Matching::Auto, partner: Partner::Vacuum, ..Default::default() };
            cfg.dims.u_prime = 40;
            let out = run_setup(&cfg).unwrap();
            let ideal = process_output(
                &ideal_rabi(cfg.dims.u, 0.7).unwrap(),
                &cfg.cv_input.state(cfg.dims.u).unwrap(),
                &cfg.qubit_input,
                cfg.dims.d,
            )
            .unwrap();
            fidelity(&ideal, &out.joint_state).unwrap()
        };
        let (f2, f3) = (fid(Variant::U2Photon), fid(Variant::U3Photon));
        assert!(f3 > f2 && f3 > 0.998, "u2 {f2} u3 {f3}");
    }

    #[test]
    fn success_probability_at_weak_coupling() {
        let p = |variant, t| {
            let mut cfg = SetupConfig { variant, t, matching: Matching::Auto, ..Default::default() };
            cfg.dims.u_prime = 12;
            run_setup(&cfg).unwrap().success_probability
        };
        assert!((p(Variant::U2Photon, 0.0) - 0.25).abs() < 1e-12);
        assert!((p(Variant::U2Tmsv, 0.01) - 0.25).abs() < 1e-3);
        // the third-order splitters weigh the two rails by (1+ζ)^{3/2}
        let g = 27f64.sqrt();
        assert!((p(Variant::U3Photon, 0.0) - 1.0 / (1.0 + g).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rails_swap_with_the_qubit_input() {
        let zero = run_setup(&small(Variant::U2Photon, 0.4)).unwrap();
        let mut cfg = small(Variant::U2Photon, 0.4);
        cfg.qubit_input = QubitInput::One;
        let one = run_setup(&cfg).unwrap();
        assert!(zero.resolved.swap_rails != one.resolved.swap_rails);
        let mut x = CMatrix::identity(3, 3);
        x.swap_rows(0, 1);
        let flipped = zero.joint_state.apply_local(&x, &[ModeLabel::D]).unwrap();
        assert!((flipped.matrix() - one.joint_state.matrix()).norm() < 1e-12);
        assert!((zero.success_probability - one.success_probability).abs() < 1e-14);
    }

    #[test]
    fn default_configuration_runs_at_default_cutoffs() {
        let out = run_setup(&SetupConfig::default()).unwrap();
        assert!(out.leakage.u < LEAKAGE_LIMIT && out.leakage.u_prime < LEAKAGE_LIMIT);
        assert!(out.success_probability > 0.0 && out.success_probability <= 1.0);
        let mut u3 = SetupConfig { variant: Variant::U3Photon, ..Default::default() };
        assert!(matches!(run_setup(&u3), Err(Error::ConfigInconsistency(_))));
        u3.matching = Matching::Auto;
        u3.t = 0.1;
        u3.dims.u_prime = 20;
        assert!(run_setup(&u3).is_ok());
    }

    #[test]
    fn configuration_errors() {
        let mut cfg = small(Variant::U2Photon, 0.4);
        cfg.qubit_input = QubitInput::General { c_plus: c(1.0), c_minus: C64::new(0.0, 1.0) };
        assert!(matches!(run_setup(&cfg), Err(Error::ConfigInconsistency(_))));

        let mut cfg = small(Variant::U3Photon, 0.4);
        cfg.alpha = 0.2;
        assert!(matches!(run_setup(&cfg), Err(Error::ConfigInconsistency(_))));

        let mut cfg = small(Variant::U2Photon, 0.4);
        cfg.matching = Matching::Manual;
        assert!(matches!(run_setup(&cfg), Err(Error::ConfigInconsistency(_))));
        let auto = resolve(&small(Variant::U2Photon, 0.4)).unwrap();
        cfg.kappa = auto.kappa;
        cfg.t_c = auto.t_c;
        cfg.t_d = auto.t_d;
        assert_eq!(resolve(&cfg).unwrap().kappa, auto.kappa);

        let mut cfg = small(Variant::U2Tmsv, 0.4);
        cfg.lambda = 0.0;
        assert!(matches!(run_setup(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn under_truncated_u_trips_the_guard() {
        // the weak default coupling at a cutoff of 6 on u
        let mut cfg = SetupConfig { t: 1.2, ..Default::default() };
        cfg.dims.u = 6;
        assert!(matches!(run_setup(&cfg), Err(Error::Leakage { mode: ModeLabel::U, .. })));
        let mut cfg = SetupConfig { t: 1.2, matching: Matching::Auto, ..Default::default() };
        cfg.dims.u_prime = 6;
        assert!(matches!(run_setup(&cfg), Err(Error::Leakage { mode: ModeLabel::UPrime, .. })));
    }

    #[test]
    fn steering_outcomes_partition() {
        let mut cfg = small(Variant::U2Photon, 0.6);
        cfg.dims.u = 20;
        cfg.cv_input = CvInput::Coherent { beta: 0.5 };
        let out = run_setup(&cfg).unwrap();
        let p = |s| out.steer(s).unwrap().1;
        assert!((p(Steering::P0) + p(Steering::P1) - 1.0).abs() < 1e-12);
        assert!((p(Steering::PPlus) + p(Steering::PMinus) - 1.0).abs() < 1e-12);
        let (rho, _) = out.steer(Steering::General { delta: C64::new(0.3, -0.2) }).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(negativity(&out.joint_state, ModeLabel::D).unwrap() > 0.1);
    }

    #[test]
    fn loss_lowers_purity_only_on_u() {
        let mut cfg = small(Variant::U2Photon, 0.5);
        cfg.gamma = 0.2;
        let lossy = run_setup(&cfg).unwrap();
        cfg.gamma = 0.0;
        let clean = run_setup(&cfg).unwrap();
        assert_eq!(lossy.success_probability, clean.success_probability);
        let qubit = |r: &SimulationResult| r.joint_state.partial_trace(&[ModeLabel::D]).unwrap();
        assert!((qubit(&lossy).matrix() - qubit(&clean).matrix()).norm() < 1e-12);
    }
}
