//! Ideal and Taylor-truncated interaction operators on `(u, d)`.

use crate::conditional::x_function;
use crate::error::{Error, Result};
use crate::fock::linalg::{c, kron, CMatrix, C64, I};
use crate::fock::operator::quadrature_matrix;
use super::QubitInput;
use crate::fock::{DensityOperator, ModeLabel, ModeLayout, OperatorKind, OperatorMatrix};

pub(crate) fn process_layout(dim_u: usize) -> Result<ModeLayout> {
    ModeLayout::new([(ModeLabel::U, dim_u), (ModeLabel::D, 2)])
}

fn qubit(entries: [f64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries.map(c))
}

fn sigma_x() -> CMatrix {
    qubit([0.0, 1.0, 1.0, 0.0])
}

/// `exp(it σx ⊗ X) = |+⟩⟨+| ⊗ e^{itX} + |−⟩⟨−| ⊗ e^{−itX}`.
pub fn ideal_rabi(dim_u: usize, t: f64) -> Result<OperatorMatrix> {
    // each branch is a displacement by t/√2
    if t * t / 2.0 >= dim_u as f64 / 4.0 {
        return Err(Error::TruncationRisk(format!("strength {t} displaces beyond {dim_u} Fock levels")));
    }
    let plus = qubit([0.5, 0.5, 0.5, 0.5]);
    let minus = qubit([0.5, -0.5, -0.5, 0.5]);
    let fwd = x_function(dim_u, |x| C64::from_polar(1.0, t * x));
    let bwd = fwd.adjoint();
    let m = kron(&fwd, &plus) + kron(&bwd, &minus);
    Ok(OperatorMatrix::new(process_layout(dim_u)?, m, OperatorKind::Unitary)?.with_edge_exemption())
}

/// Jaynes-Cummings evolution `exp[iτ(σ₊a + σ₋a†)]` in local block form
///
/// `cos(τ√(n̂+1))⊗|1⟩⟨1| + cos(τ√n̂)⊗|0⟩⟨0| + i f(n̂+1) a⊗|1⟩⟨0| + i f(n̂) a†⊗|0⟩⟨1|`
///
/// with `f(n) = sin(τ√n)/√n`. The removable point `f(0) = τ` never enters a
/// matrix element because `a†` never lands on the vacuum. Unitary except on
/// the top level of `u`, whose `a†` image is cut off.
pub fn ideal_jc(dim_u: usize, tau: f64) -> Result<OperatorMatrix> {
    let mut c1 = CMatrix::zeros(dim_u, dim_u);
    let mut c0 = CMatrix::zeros(dim_u, dim_u);
    let mut lower = CMatrix::zeros(dim_u, dim_u);
    let mut raise = CMatrix::zeros(dim_u, dim_u);
    for n in 0..dim_u {
        let s = |k: usize| (tau * (k as f64).sqrt()).sin();
        c1[(n, n)] = c((tau * ((n + 1) as f64).sqrt()).cos());
        c0[(n, n)] = c((tau * (n as f64).sqrt()).cos());
        if n > 0 {
            lower[(n - 1, n)] = c(s(n));
        }
        if n + 1 < dim_u {
            raise[(n + 1, n)] = c(s(n + 1));
        }
    }
    let m = kron(&c1, &qubit([0.0, 0.0, 0.0, 1.0]))
        + kron(&c0, &qubit([1.0, 0.0, 0.0, 0.0]))
        + kron(&lower, &qubit([0.0, 0.0, 1.0, 0.0])) * I
        + kron(&raise, &qubit([0.0, 1.0, 0.0, 0.0])) * I;
    Ok(OperatorMatrix::new(process_layout(dim_u)?, m, OperatorKind::Unitary)?.with_edge_exemption())
}

/// `Σ_{k≤order} (it σx ⊗ X)^k / k!`.
pub fn taylor_rabi(dim_u: usize, order: usize, t: f64) -> Result<OperatorMatrix> {
    if order == 0 {
        return Err(Error::Config("Taylor order must be at least 1".into()));
    }
    let gen = kron(&quadrature_matrix(dim_u, 0.0), &sigma_x()) * (I * t);
    let n = 2 * dim_u;
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=order {
        term = &term * &gen / c(k as f64);
        sum += &term;
    }
    OperatorMatrix::new(process_layout(dim_u)?, sum, OperatorKind::ConditionalMap)
}

/// Second order in factorized form `(1 + it σx X) e^{−t²X²/2}`.
pub fn taylor_rabi_factorized(dim_u: usize, t: f64) -> Result<OperatorMatrix> {
    let x = quadrature_matrix(dim_u, 0.0);
    let linear = CMatrix::identity(2 * dim_u, 2 * dim_u) + kron(&x, &sigma_x()) * (I * t);
    let gauss = x_function(dim_u, |x| c((-t * t * x * x / 2.0).exp()));
    let m = linear * kron(&gauss, &CMatrix::identity(2, 2));
    OperatorMatrix::new(process_layout(dim_u)?, m, OperatorKind::ConditionalMap)
}

/// `op (ρ_u ⊗ |q⟩⟨q|) op†` normalized, with `d` embedded into `dim_d` levels.
pub fn process_output(op: &OperatorMatrix, input: &DensityOperator, qubit: &QubitInput, dim_d: usize) -> Result<DensityOperator> {
    let q = qubit.state(2)?;
    let comps = input
        .components()
        .into_iter()
        .map(|(w, psi)| Ok((w, op.apply(&psi.tensor(&q)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let dim_u = input.layout().dim_of(ModeLabel::U)?;
    let target = ModeLayout::new([(ModeLabel::U, dim_u), (ModeLabel::D, dim_d)])?;
    DensityOperator::from_ensemble(comps)?.normalized()?.embed_into(&target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::linalg::{op_norm, CVector};
    use crate::fock::StateVector;
    use crate::gaussian::{coherent_state, displacement, fock_state, thermal_state};
    use crate::metrics::{energy, negativity};
    use crate::fock::Mode;
    use proptest::prelude::*;

    fn joint(cv: &StateVector, q: [C64; 2]) -> StateVector {
        cv.tensor(&StateVector::from_fock_amplitudes(ModeLabel::D, &q).unwrap()).unwrap()
    }

    fn vac(dim: usize) -> StateVector {
        fock_state(Mode::new(ModeLabel::U, dim), 0).unwrap()
    }

    #[test]
    fn rabi_identity_at_zero() {
        let u = ideal_rabi(10, 0.0).unwrap();
        assert!(op_norm(&(u.matrix() - CMatrix::identity(20, 20))) < 1e-12);
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn rabi_on_plus_is_displacement() {
        let s = 0.5f64.sqrt();
        let t = 0.8;
        let out = ideal_rabi(25, t).unwrap().apply(&joint(&vac(25), [c(s), c(s)])).unwrap();
        let shifted = displacement(25, I * t / 2f64.sqrt()).unwrap().matrix() * vac(25).amplitudes();
        let expect = joint(&StateVector::new(vac(25).layout().clone(), shifted).unwrap(), [c(s), c(s)]);
        assert!((out.inner(&expect).unwrap().norm() - 1.0).abs() < 1e-10);
        assert!(negativity(&out.to_density(), ModeLabel::D).unwrap().abs() < 1e-10);
    }

    #[test]
    fn rabi_negativity_and_energy_laws() {
        for t in [0.25, 0.5, 0.7, 1.0, 1.5] {
            let out = ideal_rabi(25, t).unwrap().apply(&joint(&vac(25), [c(1.0), c(0.0)])).unwrap().to_density();
            let n = negativity(&out, ModeLabel::D).unwrap();
            assert!((n - 0.5 * (1.0 - (-2.0 * t * t).exp()).sqrt()).abs() < 1e-6, "t={t}");
            // the qubit starting in |0⟩ takes the lower branch
            let e = energy(&out).unwrap();
            assert!((e - (t * t + 1.0 - (-t * t).exp()) / 2.0).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn jc_closed_forms() {
        for tau in [0.25, 0.7, 1.2] {
            let u = ideal_jc(12, tau).unwrap();
            assert!(u.interior_unitarity_defect() < 1e-10);
            let ground = joint(&vac(12), [c(1.0), c(0.0)]);
            assert!((u.apply(&ground).unwrap().inner(&ground).unwrap() - c(1.0)).norm() < 1e-14);
            let excited = u.apply(&joint(&vac(12), [c(0.0), c(1.0)])).unwrap();
            assert!((excited.amplitude(&[0, 1]).unwrap() - c(tau.cos())).norm() < 1e-14);
            assert!((excited.amplitude(&[1, 0]).unwrap() - I * tau.sin()).norm() < 1e-14);
            assert!((negativity(&excited.to_density(), ModeLabel::D).unwrap() - (2.0 * tau).sin().abs() / 2.0).abs() < 1e-10);
            let s = 0.5f64.sqrt();
            let plus = u.apply(&joint(&vac(12), [c(s), c(s)])).unwrap().to_density();
            assert!((negativity(&plus, ModeLabel::D).unwrap() - (2.0 * tau).sin().abs() / 4.0).abs() < 1e-10);
            assert!((energy(&plus).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn jc_matches_exponential() {
        // exp[iτ(σ₊a + σ₋a†)] from its Hermitian generator
        let dim = 8;
        let tau = 0.9;
        let mut a = CMatrix::zeros(dim, dim);
        for n in 1..dim {
            a[(n - 1, n)] = c((n as f64).sqrt());
        }
        let sp = qubit([0.0, 0.0, 1.0, 0.0]);
        let h = kron(&a, &sp) + kron(&a.adjoint(), &sp.adjoint());
        let u = crate::fock::linalg::expm_i_hermitian(&h, tau);
        let jc = ideal_jc(dim, tau).unwrap();
        // agree away from the top level of u
        let keep: Vec<usize> = (0..2 * (dim - 1)).collect();
        for &i in &keep {
            for &j in &keep {
                assert!((u[(i, j)] - jc.matrix()[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jc_conserves_energy() {
        let dim = 30;
        let m = Mode::new(ModeLabel::U, dim);
        let s = 0.5f64.sqrt();
        for tau in [0.25, 0.7, 1.2] {
            let u = ideal_jc(dim, tau).unwrap();
            let coh = coherent_state(m, c(1.0)).unwrap().normalize().unwrap().0;
            let inputs = [joint(&coh, [c(s), c(s)]), joint(&coh, [c(1.0), c(0.0)])];
            for psi in inputs {
                let e0 = energy(&psi.to_density()).unwrap();
                let e1 = energy(&u.apply(&psi).unwrap().to_density()).unwrap();
                assert!((e0 - e1).abs() < 1e-8);
            }
            // the thermal tail needs room: level 29 still carries 1e-9
            let wide = 40;
            let th = thermal_state(Mode::new(ModeLabel::U, wide), 1.0).unwrap().normalized().unwrap();
            let q = StateVector::from_fock_amplitudes(ModeLabel::D, &[c(s), c(s)]).unwrap().to_density();
            let rho = th.tensor(&q).unwrap();
            let out = rho.apply_local(ideal_jc(wide, tau).unwrap().matrix(), &[ModeLabel::U, ModeLabel::D]).unwrap();
            assert!((energy(&rho).unwrap() - energy(&out).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn taylor_first_order_and_factorized() {
        let dim = 25;
        let t1 = taylor_rabi(dim, 1, 0.4).unwrap();
        let direct = CMatrix::identity(2 * dim, 2 * dim) + kron(&quadrature_matrix(dim, 0.0), &sigma_x()) * (I * 0.4);
        assert!(op_norm(&(t1.matrix() - direct)) < 1e-14);
        let t = 0.3;
        let d2 = taylor_rabi(dim, 2, t).unwrap();
        let f2 = taylor_rabi_factorized(dim, t).unwrap();
        // both are functions of the truncated X ⊗ σx; on the σx = ±1 branches the
        // difference is 1 + isx − y − (1 + isx)e^{−y} with y = t²x²/2
        let branch = |sign: f64| {
            x_function(dim, |x| {
                let y = t * t * x * x / 2.0;
                C64::new(1.0 - y, sign * t * x) - C64::new(1.0, sign * t * x) * (-y).exp()
            })
        };
        let plus = qubit([0.5, 0.5, 0.5, 0.5]);
        let minus = qubit([0.5, -0.5, -0.5, 0.5]);
        let expect = kron(&branch(1.0), &plus) + kron(&branch(-1.0), &minus);
        assert!(op_norm(&(d2.matrix() - f2.matrix() - expect)) < 1e-12);
        // near the origin the gap is third order
        let psi = joint(&vac(dim), [c(1.0), c(0.0)]);
        let gap = |t: f64| {
            let a = taylor_rabi(dim, 2, t).unwrap().apply(&psi).unwrap();
            let b = taylor_rabi_factorized(dim, t).unwrap().apply(&psi).unwrap();
            (a.amplitudes() - b.amplitudes()).norm()
        };
        let ratio = gap(0.1) / gap(0.05);
        assert!(ratio > 7.0 && ratio < 17.0, "ratio {ratio}");
    }

    #[test]
    fn taylor_converges_toward_ideal() {
        let dim = 25;
        let t = 0.5;
        let ideal = ideal_rabi(dim, t).unwrap();
        // compare on states well inside the truncation
        let psi = joint(&coherent_state(Mode::new(ModeLabel::U, dim), c(0.6)).unwrap(), [c(0.6), C64::new(0.0, 0.8)]);
        let target = ideal.apply(&psi).unwrap();
        let err = |k| {
            let v = taylor_rabi(dim, k, t).unwrap().apply(&psi).unwrap();
            (v.amplitudes() - target.amplitudes()).norm()
        };
        assert!(err(3) < err(2) && err(2) < err(1));
        let proj = |m: &CMatrix| {
            let n = 2 * 12;
            op_norm(&m.view((0, 0), (n, n)).into_owned())
        };
        let d3 = proj(&(taylor_rabi(dim, 3, t).unwrap().matrix() - ideal.matrix()));
        let d2 = proj(&(taylor_rabi(dim, 2, t).unwrap().matrix() - ideal.matrix()));
        assert!(d3 < d2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rabi_branch_identity_and_sigma_x(
            t in -1.5f64..1.5,
            cp in (-1.0f64..1.0, -1.0f64..1.0),
            cm in (-1.0f64..1.0, -1.0f64..1.0),
            beta in (-1.0f64..1.0, -1.0f64..1.0),
        ) {
            let dim = 25;
            let (cp, cm) = (C64::new(cp.0, cp.1), C64::new(cm.0, cm.1));
            prop_assume!(cp.norm_sqr() + cm.norm_sqr() > 0.05);
            let s = 0.5f64.sqrt();
            let cv = coherent_state(Mode::new(ModeLabel::U, dim), C64::new(beta.0, beta.1)).unwrap();
            let psi = joint(&cv, [(cp + cm) * s, (cp - cm) * s]);
            let u = ideal_rabi(dim, t).unwrap();
            let out = u.apply(&psi).unwrap();
            let fwd = x_function(dim, |x| C64::from_polar(1.0, t * x));
            let a = StateVector::new(cv.layout().clone(), &fwd * cv.amplitudes()).unwrap();
            let b = StateVector::new(cv.layout().clone(), fwd.adjoint() * cv.amplitudes()).unwrap();
            let expect = joint(&a, [cp * s, cp * s]).add(&joint(&b, [cm * s, -cm * s])).unwrap();
            let diff: CVector = out.amplitudes() - expect.amplitudes();
            prop_assert!(diff.norm() < 1e-9);
            let sx = kron(&CMatrix::identity(dim, dim), &sigma_x());
            let before = psi.amplitudes().dotc(&(&sx * psi.amplitudes()));
            let after = out.amplitudes().dotc(&(&sx * out.amplitudes()));
            prop_assert!((before - after).norm() < 1e-9);
        }
    }
}
