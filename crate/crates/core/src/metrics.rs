//! Fidelity, negativity, energy and Wigner functions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::density::PSD_TOLERANCE;
use crate::fock::linalg::{psd_sqrt, trace_norm, CMatrix, C64};
use crate::fock::operator::number_matrix;
use crate::fock::{DensityOperator, ModeLabel};

/// Uhlmann fidelity together with the magnitude of the most negative
/// eigenvalue clipped while taking square roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub value: f64,
    pub clipped: f64,
}

fn check_psd(rho: &DensityOperator) -> Result<()> {
    let min = rho.min_eigenvalue();
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// `F = (Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(fidelity_report(rho, sigma)?.value)
}

pub fn fidelity_report(rho: &DensityOperator, sigma: &DensityOperator) -> Result<FidelityReport> {
    if rho.layout() != sigma.layout() {
        return Err(Error::Layout("fidelity between states on different layouts".into()));
    }
    // a pure argument reduces the Uhlmann formula to an expectation value
    for (pure, other) in [(rho, sigma), (sigma, rho)] {
        if let Some([(w, psi)]) = pure.ensemble() {
            check_psd(other)?;
            let v = psi.amplitudes();
            let value = (v.dotc(&(other.matrix() * v)).re * w).clamp(0.0, 1.0 + 1e-9);
            return Ok(FidelityReport { value, clipped: 0.0 });
        }
    }
    check_psd(rho)?;
    check_psd(sigma)?;
    let (root, clip_a) = psd_sqrt(rho.matrix());
    let inner: CMatrix = &root * sigma.matrix() * &root;
    let (inner_root, clip_b) = psd_sqrt(&inner);
    let tr = inner_root.trace().re;
    Ok(FidelityReport {
        value: (tr * tr).clamp(0.0, 1.0 + 1e-9),
        clipped: clip_a.max(clip_b),
    })
}

/// `N = (‖ρ^{T_mode}‖₁ − Tr ρ)/2`.
pub fn negativity(rho: &DensityOperator, mode: ModeLabel) -> Result<f64> {
    let pt = rho.partial_transpose(mode)?;
    Ok((trace_norm(&pt) - rho.trace()) / 2.0)
}

/// `⟨n̂_u + n̂_d⟩`.
pub fn energy(rho: &DensityOperator) -> Result<f64> {
    let mut e = 0.0;
    for mode in [ModeLabel::U, ModeLabel::D] {
        let dim = rho.layout().dim_of(mode)?;
        e += rho.expectation(&number_matrix(dim), &[mode])?.re;
    }
    Ok(e)
}

/// One comparison row of a strength sweep. Failed setup runs keep the
/// reference columns and carry the error text instead of setup values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub variant: String,
    pub input: String,
    pub t: f64,
    pub e_ideal_rabi: f64,
    pub n_ideal_rabi: f64,
    pub e_jc: f64,
    pub n_jc: f64,
    pub e_setup: Option<f64>,
    pub n_setup: Option<f64>,
    pub f_rabi: Option<f64>,
    pub f_jc: Option<f64>,
    pub p_success: Option<f64>,
    pub error: Option<String>,
}

impl MetricsRecord {
    /// Checks the value ranges and clamps fidelities and probabilities that
    /// overshoot `[0, 1]` by less than `1e-9`.
    pub fn checked(mut self) -> Result<Self> {
        let unit = |name: &str, v: &mut Option<f64>| -> Result<()> {
            if let Some(x) = v {
                if !(-1e-9..=1.0 + 1e-9).contains(x) {
                    return Err(Error::TruncationRisk(format!("{name} = {x} outside [0, 1]")));
                }
                *x = x.clamp(0.0, 1.0);
            }
            Ok(())
        };
        unit("F_Rabi", &mut self.f_rabi)?;
        unit("F_JC", &mut self.f_jc)?;
        unit("P_success", &mut self.p_success)?;
        for (name, n) in [("N_ideal_rabi", Some(self.n_ideal_rabi)), ("N_jc", Some(self.n_jc)), ("N_setup", self.n_setup)] {
            if n.is_some_and(|n| n < -1e-9) {
                return Err(Error::TruncationRisk(format!("{name} negative")));
            }
        }
        for (name, e) in [("E_ideal_rabi", Some(self.e_ideal_rabi)), ("E_jc", Some(self.e_jc)), ("E_setup", self.e_setup)] {
            if e.is_some_and(|e| e < -1e-9) {
                return Err(Error::TruncationRisk(format!("{name} negative")));
            }
        }
        Ok(self)
    }
}

/// Sampling grid of a Wigner function in `(x, p)` with `X = (a + a†)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            p_min: -4.0,
            p_max: 4.0,
            nx: 81,
            np: 81,
        }
    }
}

impl GridSpec {
    pub fn x(&self, i: usize) -> f64 {
        axis(self.x_min, self.x_max, self.nx, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        axis(self.p_min, self.p_max, self.np, j)
    }

    pub fn cell_area(&self) -> f64 {
        step(self.x_min, self.x_max, self.nx) * step(self.p_min, self.p_max, self.np)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::Config(format!("degenerate Wigner grid {self:?}")));
        }
        Ok(())
    }
}

fn step(lo: f64, hi: f64, n: usize) -> f64 {
    (hi - lo) / (n - 1) as f64
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    lo + i as f64 * step(lo, hi, n)
}

/// Tolerance on the Riemann-sum normalization before a grid is flagged.
pub const WIGNER_NORM_TOLERANCE: f64 = 2e-3;

/// Wigner function values with `values[(i, j)] = W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub values: DMatrix<f64>,
    /// Set when the grid misses part of the state's support.
    pub warning: Option<String>,
}

impl WignerGrid {
    /// Riemann sum of the values times the cell area.
    pub fn normalization(&self) -> f64 {
        self.values.sum() * self.spec.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    /// Largest spread of values among grid points at the same distance from
    /// the origin. Needs a grid symmetric about the origin with equal steps.
    pub fn radial_spread(&self) -> Result<f64> {
        let s = &self.spec;
        let dx = step(s.x_min, s.x_max, s.nx);
        let dp = step(s.p_min, s.p_max, s.np);
        if (s.x_min + s.x_max).abs() > 1e-12 || (s.p_min + s.p_max).abs() > 1e-12 || (dx - dp).abs() > 1e-12 || s.nx % 2 == 0 || s.np % 2 == 0 {
            return Err(Error::Config("radial symmetry needs a centered square lattice".into()));
        }
        let (cx, cp) = ((s.nx / 2) as i64, (s.np / 2) as i64);
        let mut shells: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for i in 0..s.nx {
            for j in 0..s.np {
                let r2 = (i as i64 - cx).pow(2) + (j as i64 - cp).pow(2);
                let v = self.values[(i, j)];
                let e = shells.entry(r2).or_insert((v, v));
                e.0 = e.0.min(v);
                e.1 = e.1.max(v);
            }
        }
        Ok(shells.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max))
    }
}

/// `⟨m|D(β)|n⟩` for `m, n < dim` by the exact recursion
/// `√(m+1) D_{m+1,n} = β D_{m,n} + √n D_{m,n−1}`.
pub fn displacement_elements(dim: usize, beta: C64) -> CMatrix {
    let mut d = CMatrix::zeros(dim, dim);
    let sq: Vec<f64> = (0..=dim).map(|k| (k as f64).sqrt()).collect();
    d[(0, 0)] = C64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    // first row from ⟨0|D(β)|n⟩ = e^{−|β|²/2} (−β*)^n / √n!
    for n in 1..dim {
        d[(0, n)] = d[(0, n - 1)] * (-beta.conj()) / sq[n];
    }
    for m in 0..dim - 1 {
        for n in 0..dim {
            let mut v = beta * d[(m, n)];
            if n > 0 {
                v += d[(m, n - 1)] * sq[n];
            }
            d[(m + 1, n)] = v / sq[m + 1];
        }
    }
    d
}

/// `W(x, p) = Tr[ρ D(2α) Π] / π` with `α = (x + ip)/√2` and parity `Π`;
/// integrates to one over `dx dp`.
pub fn wigner(rho: &DensityOperator, spec: GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    if rho.layout().len() != 1 {
        return Err(Error::Layout("the Wigner function needs a single-mode state".into()));
    }
    let dim = rho.layout().composite_dim();
    let m = rho.matrix();
    let trace = rho.trace();
    let columns: Vec<Vec<f64>> = (0..spec.np)
        .into_par_iter()
        .map(|j| {
            (0..spec.nx)
                .map(|i| {
                    let beta = C64::new(spec.x(i), spec.p(j)) * 2f64.sqrt();
                    let d = displacement_elements(dim, beta);
                    let mut acc = C64::new(0.0, 0.0);
                    for n in 0..dim {
                        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                        let mut row = C64::new(0.0, 0.0);
                        for k in 0..dim {
                            row += m[(n, k)] * d[(k, n)];
                        }
                        acc += row * sign;
                    }
                    acc.re / std::f64::consts::PI / trace
                })
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(spec.nx, spec.np, |i, j| columns[j][i]);
    let mut grid = WignerGrid {
        spec,
        values,
        warning: None,
    };
    let norm = grid.normalization();
    if (norm - 1.0).abs() > WIGNER_NORM_TOLERANCE {
        grid.warning = Some(format!("Wigner grid integrates to {norm:.6}; the state extends beyond the grid"));
    }
    Ok(grid)
}

pub fn min_wigner(rho: &DensityOperator, spec: GridSpec) -> Result<f64> {
    Ok(wigner(rho, spec)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::linalg::c;
    use crate::fock::{Mode, ModeLayout, StateVector};
    use crate::gaussian::{coherent_state, fock_state, squeezed_vacuum_amplitudes, thermal_state};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn single(amps: &[C64]) -> DensityOperator {
        StateVector::from_fock_amplitudes(ModeLabel::U, amps).unwrap().normalize().unwrap().0.to_density()
    }

    // Hermite functions ψ_n(x) with X = (a + a†)/√2.
    fn hermite_fn(n: usize, x: f64) -> f64 {
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25) * (-x * x / 2.0).exp();
        for k in 0..n {
            let next = (2.0f64 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    // W(x,p) = (1/π) ∫ ψ(x+y) ψ*(x−y) e^{−2ipy} dy by Simpson quadrature.
    fn wigner_oracle(amps: &[C64], x: f64, p: f64) -> f64 {
        let psi = |q: f64| amps.iter().enumerate().map(|(n, a)| a * hermite_fn(n, q)).sum::<C64>();
        let (n, half) = (4000, 10.0);
        let h = 2.0 * half / n as f64;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..=n {
            let y = -half + k as f64 * h;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += psi(x + y) * psi(x - y).conj() * C64::from_polar(1.0, -2.0 * p * y) * w;
        }
        (acc * h / 3.0).re / PI
    }

    #[test]
    fn wigner_matches_quadrature_oracle() {
        let s = 0.5f64.sqrt();
        let amps = [c(s), C64::new(0.3, 0.4) * s / 0.5, c(0.0), C64::new(0.0, 0.2)];
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<C64> = amps.iter().map(|a| a / norm).collect();
        let rho = single(&amps);
        let spec = GridSpec { x_min: -2.0, x_max: 2.0, p_min: -1.5, p_max: 1.5, nx: 5, np: 4 };
        let grid = wigner(&rho, spec).unwrap();
        for i in 0..spec.nx {
            for j in 0..spec.np {
                let expect = wigner_oracle(&amps, spec.x(i), spec.p(j));
                assert!((grid.values[(i, j)] - expect).abs() < 1e-10, "({i},{j})");
            }
        }
    }

    #[test]
    fn wigner_of_vacuum_and_one_photon() {
        let spec = GridSpec::default();
        let vac = fock_state(Mode::new(ModeLabel::U, 25), 0).unwrap().to_density();
        let w0 = wigner(&vac, spec).unwrap();
        assert!((w0.values[(40, 40)] - 1.0 / PI).abs() < 1e-14);
        assert!((w0.normalization() - 1.0).abs() < 1e-6);
        assert!(w0.warning.is_none());
        let one = fock_state(Mode::new(ModeLabel::U, 25), 1).unwrap().to_density();
        let w1 = wigner(&one, spec).unwrap();
        assert!((w1.min() + 1.0 / PI).abs() < 1e-14);
        assert!(w1.radial_spread().unwrap() < 1e-12);
        let (x, p) = (spec.x(55), spec.p(31));
        let r2 = x * x + p * p;
        assert!((w1.values[(55, 31)] - (-r2).exp() * (2.0 * r2 - 1.0) / PI).abs() < 1e-13);
    }

    #[test]
    fn wigner_flags_small_grid() {
        let coh = coherent_state(Mode::new(ModeLabel::U, 25), c(2.0)).unwrap().to_density();
        let spec = GridSpec { x_min: -1.0, x_max: 1.0, p_min: -1.0, p_max: 1.0, nx: 21, np: 21 };
        assert!(wigner(&coh, spec).unwrap().warning.is_some());
    }

    #[test]
    fn wigner_stable_at_large_displacement() {
        let amps: Vec<C64> = squeezed_vacuum_amplitudes(25, 0.3).iter().map(|a| c(*a)).collect();
        let rho = single(&amps);
        let spec = GridSpec::default();
        let g = wigner(&rho, spec).unwrap();
        assert!(g.values.iter().all(|v| v.is_finite() && v.abs() < 1.0 / PI + 1e-12));
        for (i, j) in [(0, 0), (0, 40), (80, 13), (40, 40)] {
            let expect = wigner_oracle(&amps, spec.x(i), spec.p(j));
            assert!((g.values[(i, j)] - expect).abs() < 1e-12, "({i},{j}) {} vs {expect}", g.values[(i, j)]);
        }
        // Var P = e^{0.6}/2 leaves about 2e-5 of the mass outside |p| ≤ 4
        assert!((g.normalization() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn bell_negativity() {
        let layout = ModeLayout::new([(ModeLabel::D, 2), (ModeLabel::U, 3)]).unwrap();
        let s = 0.5f64.sqrt();
        let psi = StateVector::fock(layout.clone(), &[0, 0]).unwrap().scale(c(s))
            .add(&StateVector::fock(layout, &[1, 1]).unwrap().scale(c(s))).unwrap();
        let n = negativity(&psi.to_density(), ModeLabel::D).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
        let prod = fock_state(Mode::new(ModeLabel::D, 2), 1).unwrap().tensor(&fock_state(Mode::new(ModeLabel::U, 3), 2).unwrap()).unwrap();
        assert!(negativity(&prod.to_density(), ModeLabel::U).unwrap().abs() < 1e-12);
        assert!((energy(&prod.to_density()).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_pure_and_mixed() {
        let mode = Mode::new(ModeLabel::U, 20);
        let a = coherent_state(mode, c(0.5)).unwrap().normalize().unwrap().0.to_density();
        let b = coherent_state(mode, c(0.8)).unwrap().normalize().unwrap().0.to_density();
        assert!((fidelity(&a, &b).unwrap() - (-0.09f64).exp()).abs() < 1e-10);
        let th = thermal_state(mode, 0.2).unwrap().normalized().unwrap();
        let vac = fock_state(mode, 0).unwrap().to_density();
        assert!((fidelity(&th, &vac).unwrap() - 1.0 / 1.2).abs() < 1e-9);
        let th2 = thermal_state(mode, 0.5).unwrap().normalized().unwrap();
        // two thermal states: (Σ √(p_n q_n))²
        let (x, y) = (0.2f64 / 1.2, 0.5f64 / 1.5);
        let root = (1.0 / (1.2 * 1.5f64)).sqrt() / (1.0 - (x * y).sqrt());
        let f = fidelity_report(&th, &th2).unwrap();
        assert!((f.value - root * root).abs() < 1e-9);
        assert!(f.clipped < 1e-10);
    }

    #[test]
    fn mismatched_layouts_rejected() {
        let a = fock_state(Mode::new(ModeLabel::U, 3), 0).unwrap().to_density();
        let b = fock_state(Mode::new(ModeLabel::U, 4), 0).unwrap().to_density();
        assert!(fidelity(&a, &b).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fidelity_bounds_and_symmetry(re in prop::collection::vec(-1.0f64..1.0, 8), im in prop::collection::vec(-1.0f64..1.0, 8), w in 0.05f64..0.95) {
            let a: Vec<C64> = re.iter().zip(&im).map(|(x, y)| C64::new(*x, *y)).collect();
            let b: Vec<C64> = im.iter().zip(re.iter().rev()).map(|(x, y)| C64::new(*x, *y)).collect();
            prop_assume!(a.iter().map(|z| z.norm_sqr()).sum::<f64>() > 0.1 && b.iter().map(|z| z.norm_sqr()).sum::<f64>() > 0.1);
            let (sa, sb) = (single(&a), single(&b));
            let mix = DensityOperator::new(sa.layout().clone(), sa.matrix() * c(w) + sb.matrix() * c(1.0 - w)).unwrap();
            let f1 = fidelity(&mix, &sb).unwrap();
            let f2 = fidelity(&sb, &mix).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-9);
            prop_assert!(f1 >= -1e-12 && f1 <= 1.0 + 1e-9);
            prop_assert!((fidelity(&mix, &mix).unwrap() - 1.0).abs() < 1e-7);
            let g = wigner(&mix, GridSpec { nx: 7, np: 7, ..GridSpec::default() }).unwrap();
            prop_assert!(g.values.iter().all(|v| v.abs() <= 1.0 / PI + 1e-12));
        }
    }
}
