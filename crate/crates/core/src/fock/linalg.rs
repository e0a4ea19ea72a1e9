//! Dense complex linear algebra shared by the builders and metrics.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigendecomposition of a Hermitian matrix, `m = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEig {
    pub fn new(m: &CMatrix) -> Self {
        // symmetrize first so round-off asymmetry does not leak into the spectrum
        let h = hermitian_part(m);
        let eig = h.symmetric_eigen();
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// `V diag(f(λ)) V†`
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl<R: Dim, C: Dim, S: RawStorage<C64, R, C>> MaxAbs for Matrix<C64, R, C, S> {
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `exp(i * s * H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &CMatrix, s: f64) -> CMatrix {
    HermitianEig::new(h).map(|x| C64::from_polar(1.0, s * x))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).max_abs()
}

pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.sum()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// Sum of `|v_i|²`.
pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Principal square root of a PSD matrix. Eigenvalues below zero are clipped;
/// the magnitude of the most negative one is returned alongside.
pub fn psd_sqrt(m: &CMatrix) -> (CMatrix, f64) {
    let eig = HermitianEig::new(m);
    let clipped = eig.min().min(0.0).abs();
    (eig.map(|x| c(x.max(0.0).sqrt())), clipped)
}

/// Neumaier-compensated accumulator for matrices of fixed shape.
#[derive(Debug, Clone)]
pub struct CompensatedSum {
    sum: CMatrix,
    comp: CMatrix,
}

impl CompensatedSum {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            sum: CMatrix::zeros(rows, cols),
            comp: CMatrix::zeros(rows, cols),
        }
    }

    pub fn add(&mut self, term: &CMatrix) {
        for ((s, c), &x) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(term.iter()) {
            s.re = neumaier(&mut c.re, s.re, x.re);
            s.im = neumaier(&mut c.im, s.im, x.im);
        }
    }

    pub fn finish(self) -> CMatrix {
        self.sum + self.comp
    }
}

fn neumaier(comp: &mut f64, sum: f64, x: f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

/// Kronecker product with the left factor most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_map_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(3.0)]);
        let back = HermitianEig::new(&m).map(c);
        assert!((back - &m).max_abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_is_order_stable() {
        let terms: Vec<CMatrix> = [1e16, 1.0, -1e16, 1.0]
            .iter()
            .map(|&x| CMatrix::from_element(1, 1, c(x)))
            .collect();
        let mut acc = CompensatedSum::zeros(1, 1);
        for t in &terms {
            acc.add(t);
        }
        assert_eq!(acc.finish()[(0, 0)].re, 2.0);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.25), c(0.25), c(0.5)]);
        let (s, clipped) = psd_sqrt(&m);
        assert_eq!(clipped, 0.0);
        assert!((&s * &s - m).max_abs() < 1e-12);
    }
}
