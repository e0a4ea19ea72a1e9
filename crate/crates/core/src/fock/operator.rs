use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

use super::layout::{ModeLabel, ModeLayout};
use super::linalg::{c, CMatrix, MaxAbs, C64};
use super::state::StateVector;

/// What an [`OperatorMatrix`] is meant to be; drives which invariants apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Kraus,
    ConditionalMap,
    Observable,
}

/// Fraction of the top Fock levels exempt from unitarity checks when an
/// operator is the truncation of an infinite-dimensional unitary.
pub const EDGE_FRACTION: f64 = 0.2;

/// Complex matrix on the composite space of a layout.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    layout: ModeLayout,
    matrix: CMatrix,
    kind: OperatorKind,
    edge_exempt: bool,
    interior: Option<Vec<usize>>,
}

impl OperatorMatrix {
    pub fn new(layout: ModeLayout, matrix: CMatrix, kind: OperatorKind) -> Result<Self> {
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
            kind,
            edge_exempt: false,
            interior: None,
        })
    }

    pub(crate) fn single(dim: usize, matrix: CMatrix, kind: OperatorKind) -> Result<Self> {
        Self::new(ModeLayout::single(ModeLabel::U, dim)?, matrix, kind)
    }

    /// Marks the operator as a truncated unitary whose unitarity only holds
    /// away from the top Fock levels.
    pub fn with_edge_exemption(mut self) -> Self {
        self.edge_exempt = true;
        self
    }

    /// Overrides the basis states on which a truncated unitary must be exact.
    pub fn with_interior(mut self, interior: Vec<usize>) -> Self {
        self.edge_exempt = true;
        self.interior = Some(interior);
        self
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn edge_exempt(&self) -> bool {
        self.edge_exempt
    }

    /// Relabels a single-mode operator.
    pub fn on(mut self, label: ModeLabel) -> Self {
        assert_eq!(self.layout.len(), 1, "relabeling needs a single-mode operator");
        let dim = self.layout.modes()[0].dim;
        self.layout = ModeLayout::single(label, dim).expect("dim was already validated");
        self
    }

    /// Relabels the modes of a multi-mode operator in order.
    pub fn on_modes(mut self, labels: &[ModeLabel]) -> Result<Self> {
        if labels.len() != self.layout.len() {
            return Err(Error::Layout("label count does not match operator modes".into()));
        }
        self.layout = ModeLayout::new(labels.iter().copied().zip(self.layout.modes().iter().map(|m| m.dim)))?;
        Ok(self)
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
            kind: self.kind,
            edge_exempt: self.edge_exempt,
            interior: self.interior.clone(),
        }
    }

    /// `self * other` on the same layout.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.layout != other.layout {
            return Err(Error::Layout("operators live on different layouts".into()));
        }
        let kind = if self.kind == other.kind { self.kind } else { OperatorKind::ConditionalMap };
        Ok(OperatorMatrix {
            layout: self.layout.clone(),
            matrix: &self.matrix * &other.matrix,
            kind,
            edge_exempt: self.edge_exempt || other.edge_exempt,
            interior: None,
        })
    }

    pub fn tensor(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        let layout = self.layout.concat(&other.layout)?;
        let kind = if self.kind == other.kind { self.kind } else { OperatorKind::ConditionalMap };
        Ok(OperatorMatrix {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
            kind,
            edge_exempt: self.edge_exempt || other.edge_exempt,
            interior: None,
        })
    }

    /// Applies the operator to the matching modes of `state`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        for m in self.layout.modes() {
            let dim = state.layout().dim_of(m.label)?;
            if dim != m.dim {
                return Err(Error::Layout(format!(
                    "operator expects dimension {} on mode {}, state has {dim}",
                    m.dim, m.label
                )));
            }
        }
        let labels: Vec<ModeLabel> = self.layout.labels().collect();
        state.apply_local(&self.matrix, &labels)
    }

    /// `max |U†U - I|` over the full truncated space.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)).max_abs()
    }

    /// `max |U†U - I|` restricted to basis states whose every mode sits
    /// below the top [`EDGE_FRACTION`] of its Fock levels.
    pub fn interior_unitarity_defect(&self) -> f64 {
        let interior = self.interior_indices();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst: f64 = 0.0;
        for &i in &interior {
            for &j in &interior {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - c(target)).norm());
            }
        }
        worst
    }

    /// Flat indices of basis states away from the truncation edge.
    pub fn interior_indices(&self) -> Vec<usize> {
        match &self.interior {
            Some(idx) => idx.clone(),
            None => interior_indices(&self.layout),
        }
    }

    /// Checks the unitarity contract, honouring the edge exemption.
    pub fn check_unitary(&self) -> Result<()> {
        let full = self.unitarity_defect();
        if full <= 1e-10 {
            return Ok(());
        }
        if self.edge_exempt && self.interior_unitarity_defect() <= 1e-8 {
            return Ok(());
        }
        Err(Error::TruncationRisk(format!("operator is not unitary (defect {full:e})")))
    }
}

pub fn interior_indices(layout: &ModeLayout) -> Vec<usize> {
    let limits: Vec<usize> = layout
        .modes()
        .iter()
        .map(|m| ((m.dim as f64) * (1.0 - EDGE_FRACTION)).floor() as usize)
        .collect();
    (0..layout.composite_dim())
        .filter(|&k| {
            layout
                .multi_index(k)
                .iter()
                .zip(&limits)
                .all(|(n, lim)| n < lim)
        })
        .collect()
}

/// `⟨n-1|a|n⟩ = √n`.
pub fn annihilation_matrix(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    m
}

pub fn number_matrix(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, (0..dim).map(|n| c(n as f64))))
}

/// `X_θ = (a e^{-iθ} + a† e^{iθ}) / √2`; vacuum variance is 1/2.
pub fn quadrature_matrix(dim: usize, theta: f64) -> CMatrix {
    let a = annihilation_matrix(dim);
    let phase = C64::from_polar(1.0, theta);
    (a.map(|z| z * phase.conj()) + a.adjoint().map(|z| z * phase)).scale(FRAC_1_SQRT_2)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

pub fn annihilation_op(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    OperatorMatrix::single(dim, annihilation_matrix(dim), OperatorKind::ConditionalMap)
}

pub fn creation_op(dim: usize) -> Result<OperatorMatrix> {
    Ok(annihilation_op(dim)?.adjoint())
}

pub fn number_op(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    OperatorMatrix::single(dim, number_matrix(dim), OperatorKind::Observable)
}

pub fn quadrature_op(dim: usize, theta: f64) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    OperatorMatrix::single(dim, quadrature_matrix(dim, theta), OperatorKind::Observable)
}

pub fn identity_op(layout: ModeLayout) -> OperatorMatrix {
    let n = layout.composite_dim();
    OperatorMatrix {
        layout,
        matrix: CMatrix::identity(n, n),
        kind: OperatorKind::Unitary,
        edge_exempt: false,
        interior: None,
    }
}

/// Pauli operators on the photonic qubit `{|0⟩_d, |1⟩_d}` with
/// `|g⟩ = |0⟩_d`, `|e⟩ = |1⟩_d`. `plus` raises `|0⟩_d → |1⟩_d`.
#[derive(Debug, Clone)]
pub struct Paulis {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
    pub plus: OperatorMatrix,
    pub minus: OperatorMatrix,
}

pub fn pauli_ops() -> Paulis {
    let make = |vals: [C64; 4], kind| {
        OperatorMatrix::new(
            ModeLayout::single(ModeLabel::D, 2).expect("qubit layout"),
            CMatrix::from_row_slice(2, 2, &vals),
            kind,
        )
        .expect("2x2 on a qubit")
    };
    let o = c(0.0);
    let l = c(1.0);
    let i = C64::new(0.0, 1.0);
    Paulis {
        x: make([o, l, l, o], OperatorKind::Unitary),
        y: make([o, -i, i, o], OperatorKind::Unitary),
        z: make([l, o, o, -l], OperatorKind::Unitary),
        plus: make([o, o, l, o], OperatorKind::ConditionalMap),
        minus: make([o, l, o, o], OperatorKind::ConditionalMap),
    }
}

/// Tensor product of several operators, first factor most significant.
pub fn tensor_ops(parts: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Layout("tensor of no operators".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, p| acc.tensor(p))
}

/// Tensor product of several states, first factor most significant.
pub fn tensor_states(parts: &[&StateVector]) -> Result<StateVector> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Layout("tensor of no states".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, p| acc.tensor(p))
}
