use crate::error::{Error, Result};

use super::layout::{ModeLabel, ModeLayout};
use super::linalg::{hermiticity_defect, trace, CMatrix, CVector, CompensatedSum, HermitianEig, C64};
use super::state::{StateVector, HERALD_FLOOR};

/// Tolerance on negative eigenvalues before a density operator is rejected.
pub const PSD_TOLERANCE: f64 = 1e-9;
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Mixed state on a [`ModeLayout`].
///
/// The dense matrix is always materialized. States built as mixtures of
/// pure components (thermal, phase-randomized coherent) also keep the
/// weighted components, which lets circuits run component by component
/// instead of on superoperators.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    layout: ModeLayout,
    matrix: CMatrix,
    ensemble: Option<Vec<(f64, StateVector)>>,
}

impl DensityOperator {
    pub fn new(layout: ModeLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.composite_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Layout(format!(
                "{}x{} matrix for a composite dimension of {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            layout,
            matrix,
            ensemble: None,
        })
    }

    /// `|ψ⟩⟨ψ|` without renormalization.
    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self {
            layout: state.layout().clone(),
            matrix: v * v.adjoint(),
            ensemble: Some(vec![(1.0, state.clone())]),
        }
    }

    /// `Σ w_i |ψ_i⟩⟨ψ_i|`, summed with compensation so the result does not
    /// depend on the order beyond round-off of the final addition.
    pub fn from_ensemble(components: Vec<(f64, StateVector)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Layout("empty ensemble".into()))?;
        let layout = first.1.layout().clone();
        let n = layout.composite_dim();
        let mut acc = CompensatedSum::zeros(n, n);
        for (w, s) in &components {
            if *w < 0.0 {
                return Err(Error::Layout(format!("negative ensemble weight {w}")));
            }
            if s.layout() != &layout {
                return Err(Error::Layout("ensemble components on different layouts".into()));
            }
            let v = s.amplitudes();
            acc.add(&(v * v.adjoint()).scale(*w));
        }
        Ok(Self {
            layout,
            matrix: acc.finish(),
            ensemble: Some(components),
        })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn ensemble(&self) -> Option<&[(f64, StateVector)]> {
        self.ensemble.as_deref()
    }

    /// Components of the ensemble; dense operators are split by eigendecomposition.
    pub fn components(&self) -> Vec<(f64, StateVector)> {
        if let Some(e) = &self.ensemble {
            return e.clone();
        }
        let eig = HermitianEig::new(&self.matrix);
        eig.values
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 1e-15)
            .map(|(k, &w)| {
                let v: CVector = eig.vectors.column(k).into_owned();
                (w, StateVector::new(self.layout.clone(), v).expect("column matches layout"))
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn normalized(&self) -> Result<DensityOperator> {
        let tr = self.trace();
        if !(tr > HERALD_FLOOR) {
            return Err(Error::DegenerateHerald(tr));
        }
        Ok(DensityOperator {
            layout: self.layout.clone(),
            matrix: self.matrix.unscale(tr),
            ensemble: self
                .ensemble
                .as_ref()
                .map(|e| e.iter().map(|(w, s)| (w / tr, s.clone())).collect()),
        })
    }

    pub fn scale(&self, s: f64) -> DensityOperator {
        DensityOperator {
            layout: self.layout.clone(),
            matrix: self.matrix.scale(s),
            ensemble: self
                .ensemble
                .as_ref()
                .map(|e| e.iter().map(|(w, st)| (w * s, st.clone())).collect()),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        HermitianEig::new(&self.matrix).min()
    }

    /// Checks Hermiticity, trace range and PSD-ness within the global tolerances.
    pub fn validate(&self) -> Result<()> {
        let defect = hermiticity_defect(&self.matrix);
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::Layout(format!("density operator is not Hermitian (defect {defect:e})")));
        }
        let tr = self.trace();
        if !(tr > 0.0 && tr <= 1.0 + HERMITIAN_TOLERANCE) {
            return Err(Error::Layout(format!("density operator trace {tr} outside (0, 1]")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    /// Reduced operator on `keep` (kept in layout order).
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Layout("partial trace must keep at least one mode".into()));
        }
        let reduced = self.layout.restrict(keep)?;
        let ordered: Vec<ModeLabel> = reduced.labels().collect();
        let (outer, inner) = self.layout.split_offsets(&ordered)?;
        let n = inner.len();
        let mut m = CMatrix::zeros(n, n);
        for (r, &ir) in inner.iter().enumerate() {
            for (col, &ic) in inner.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &o in &outer {
                    acc += self.matrix[(o + ir, o + ic)];
                }
                m[(r, col)] = acc;
            }
        }
        DensityOperator::new(reduced, m)
    }

    /// Transposes the indices of `mode`, leaving all other modes alone.
    pub fn partial_transpose(&self, mode: ModeLabel) -> Result<CMatrix> {
        let dim = self.layout.dim_of(mode)?;
        let stride = self.layout.stride_of(mode)?;
        let n = self.matrix.nrows();
        let mut pt = CMatrix::zeros(n, n);
        for r in 0..n {
            let nr = (r / stride) % dim;
            let r_rest = r - nr * stride;
            for col in 0..n {
                let nc = (col / stride) % dim;
                let c_rest = col - nc * stride;
                pt[(r_rest + nc * stride, c_rest + nr * stride)] = self.matrix[(r, col)];
            }
        }
        Ok(pt)
    }

    /// `Σ_k K ρ K†` for operators acting on `targets`.
    pub fn apply_kraus(&self, kraus: &[CMatrix], targets: &[ModeLabel]) -> Result<DensityOperator> {
        let comps = self.components();
        let mut out = Vec::with_capacity(comps.len() * kraus.len());
        for (w, s) in &comps {
            for k in kraus {
                out.push((*w, s.apply_local(k, targets)?));
            }
        }
        let mut rho = DensityOperator::from_ensemble(out)?;
        rho.ensemble = None;
        Ok(rho)
    }

    /// `U ρ U†` for a local operator.
    pub fn apply_local(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<DensityOperator> {
        match &self.ensemble {
            Some(e) => {
                let mut mapped = Vec::with_capacity(e.len());
                for (w, s) in e {
                    mapped.push((*w, s.apply_local(op, targets)?));
                }
                DensityOperator::from_ensemble(mapped)
            }
            None => {
                let full = self.full_operator(op, targets)?;
                DensityOperator::new(self.layout.clone(), &full * &self.matrix * full.adjoint())
            }
        }
    }

    /// Contracts `mode` with `⟨bra|...|bra⟩`; the result is unnormalized.
    pub fn project_mode(&self, mode: ModeLabel, bra: &CVector) -> Result<DensityOperator> {
        let comps = self.components();
        let mut out = Vec::with_capacity(comps.len());
        for (w, s) in &comps {
            out.push((*w, s.project_mode(mode, bra)?));
        }
        DensityOperator::from_ensemble(out)
    }

    pub fn top_level_population(&self, mode: ModeLabel) -> Result<f64> {
        let dim = self.layout.dim_of(mode)?;
        let stride = self.layout.stride_of(mode)?;
        let tr = self.trace();
        if tr == 0.0 {
            return Ok(0.0);
        }
        let top: f64 = (0..self.matrix.nrows())
            .filter(|k| (k / stride) % dim == dim - 1)
            .map(|k| self.matrix[(k, k)].re)
            .sum();
        Ok(top / tr)
    }

    /// `Tr[ρ O]` for a local operator.
    pub fn expectation(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<C64> {
        let full = self.full_operator(op, targets)?;
        Ok(trace(&(&self.matrix * full)))
    }

    /// Diagonal of the matrix (Fock populations for single-mode states).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Lifts a local operator to the full composite space.
    fn full_operator(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<CMatrix> {
        let (outer, inner) = self.layout.split_offsets(targets)?;
        if op.nrows() != inner.len() {
            return Err(Error::Layout("local operator does not match target modes".into()));
        }
        let n = self.layout.composite_dim();
        let mut full = CMatrix::zeros(n, n);
        for &o in &outer {
            for (r, &ir) in inner.iter().enumerate() {
                for (col, &ic) in inner.iter().enumerate() {
                    full[(o + ir, o + ic)] = op[(r, col)];
                }
            }
        }
        Ok(full)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let layout = self.layout.concat(&other.layout)?;
        DensityOperator::new(layout, self.matrix.kronecker(&other.matrix))
    }

    /// Zero-pads each mode up to the cutoffs of `target`.
    pub fn embed_into(&self, target: &ModeLayout) -> Result<DensityOperator> {
        let comps = self.components();
        let mut out = Vec::with_capacity(comps.len());
        for (w, s) in &comps {
            out.push((*w, s.embed_into(target)?));
        }
        DensityOperator::from_ensemble(out)
    }
}
