use crate::error::{Error, Result};

use super::density::DensityOperator;
use super::layout::{ModeLabel, ModeLayout};
use super::linalg::{c, norm_sqr, CMatrix, CVector, C64};

/// Herald probabilities below this are treated as impossible detection branches.
pub const HERALD_FLOOR: f64 = 1e-14;

/// Pure, possibly unnormalized, state on a [`ModeLayout`].
///
/// After heralding the squared norm equals the probability of the recorded
/// detector outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: ModeLayout,
    amps: CVector,
    normalized: bool,
}

impl StateVector {
    pub fn new(layout: ModeLayout, amps: CVector) -> Result<Self> {
        if amps.len() != layout.composite_dim() {
            return Err(Error::Layout(format!(
                "{} amplitudes for a composite dimension of {}",
                amps.len(),
                layout.composite_dim()
            )));
        }
        Ok(Self {
            layout,
            amps,
            normalized: false,
        })
    }

    /// Single-mode state from its Fock amplitudes.
    pub fn from_fock_amplitudes(label: ModeLabel, amps: &[C64]) -> Result<Self> {
        let layout = ModeLayout::single(label, amps.len())?;
        Self::new(layout, CVector::from_column_slice(amps))
    }

    /// Product Fock state `|n_1, n_2, ...⟩`.
    pub fn fock(layout: ModeLayout, levels: &[usize]) -> Result<Self> {
        let idx = layout.flat_index(levels)?;
        let mut amps = CVector::zeros(layout.composite_dim());
        amps[idx] = c(1.0);
        Ok(Self {
            layout,
            amps,
            normalized: true,
        })
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        let levels = vec![0; layout.len()];
        Self::fock(layout, &levels).expect("vacuum is always representable")
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitude(&self, levels: &[usize]) -> Result<C64> {
        Ok(self.amps[self.layout.flat_index(levels)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn scale(&self, s: C64) -> StateVector {
        StateVector {
            layout: self.layout.clone(),
            amps: self.amps.map(|z| z * s),
            normalized: false,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.same_layout(other)?;
        Ok(StateVector {
            layout: self.layout.clone(),
            amps: &self.amps + &other.amps,
            normalized: false,
        })
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.same_layout(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    fn same_layout(&self, other: &StateVector) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Layout("states live on different layouts".into()));
        }
        Ok(())
    }

    /// Returns the normalized state and the squared norm it was divided by.
    pub fn normalize(&self) -> Result<(StateVector, f64)> {
        let weight = self.norm_sqr();
        if !(weight > HERALD_FLOOR) {
            return Err(Error::DegenerateHerald(weight));
        }
        let amps = self.amps.unscale(weight.sqrt());
        Ok((
            StateVector {
                layout: self.layout.clone(),
                amps,
                normalized: true,
            },
            weight,
        ))
    }

    /// Applies `op`, a matrix on the Kronecker product of `targets` (first
    /// target most significant), leaving every other mode untouched.
    pub fn apply_local(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<StateVector> {
        let (outer, inner) = self.layout.split_offsets(targets)?;
        if op.nrows() != inner.len() || op.ncols() != inner.len() {
            return Err(Error::Layout(format!(
                "operator of size {}x{} on a local space of dimension {}",
                op.nrows(),
                op.ncols(),
                inner.len()
            )));
        }
        let mut block = CMatrix::zeros(inner.len(), outer.len());
        for (col, &o) in outer.iter().enumerate() {
            for (row, &i) in inner.iter().enumerate() {
                block[(row, col)] = self.amps[o + i];
            }
        }
        let out = op * block;
        let mut amps = CVector::zeros(self.amps.len());
        for (col, &o) in outer.iter().enumerate() {
            for (row, &i) in inner.iter().enumerate() {
                amps[o + i] = out[(row, col)];
            }
        }
        Ok(StateVector {
            layout: self.layout.clone(),
            amps,
            normalized: false,
        })
    }

    /// Multiplies each amplitude by `phase(flat_index)`; used for operators
    /// that are diagonal in a product basis.
    pub(crate) fn map_flat<F: Fn(usize) -> C64>(&mut self, phase: F) {
        for (flat, a) in self.amps.iter_mut().enumerate() {
            *a *= phase(flat);
        }
        self.normalized = false;
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(StateVector {
            layout,
            amps,
            normalized: self.normalized && other.normalized,
        })
    }

    /// Contracts `mode` with `⟨bra|` and removes it from the layout.
    pub fn project_mode(&self, mode: ModeLabel, bra: &CVector) -> Result<StateVector> {
        let dim = self.layout.dim_of(mode)?;
        if bra.len() != dim {
            return Err(Error::Layout(format!("bra of length {} for mode {mode} of dimension {dim}", bra.len())));
        }
        let rest = self.layout.without(mode)?;
        let (outer, inner) = self.layout.split_offsets(&[mode])?;
        let mut amps = CVector::zeros(outer.len());
        for (k, &o) in outer.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (n, &i) in inner.iter().enumerate() {
                acc += bra[n].conj() * self.amps[o + i];
            }
            amps[k] = acc;
        }
        Ok(StateVector {
            layout: rest,
            amps,
            normalized: false,
        })
    }

    /// Contracts `mode` with the Fock bra `⟨n|`.
    pub fn project_fock(&self, mode: ModeLabel, n: usize) -> Result<StateVector> {
        let dim = self.layout.dim_of(mode)?;
        if n >= dim {
            return Err(Error::Layout(format!("level {n} exceeds cutoff {dim} of mode {mode}")));
        }
        let mut bra = CVector::zeros(dim);
        bra[n] = c(1.0);
        self.project_mode(mode, &bra)
    }

    /// Population of the highest Fock level of `mode` (relative to the squared norm).
    pub fn top_level_population(&self, mode: ModeLabel) -> Result<f64> {
        let dim = self.layout.dim_of(mode)?;
        let stride = self.layout.stride_of(mode)?;
        let total = self.norm_sqr();
        if total == 0.0 {
            return Ok(0.0);
        }
        let top: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(flat, _)| (flat / stride) % dim == dim - 1)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        Ok(top / total)
    }

    /// Zero-pads each mode up to the cutoffs of `target` (same labels, same order).
    pub fn embed_into(&self, target: &ModeLayout) -> Result<StateVector> {
        if target.len() != self.layout.len()
            || target.labels().zip(self.layout.labels()).any(|(a, b)| a != b)
            || target.modes().iter().zip(self.layout.modes()).any(|(t, s)| t.dim < s.dim)
        {
            return Err(Error::Layout("cannot embed into a smaller or relabeled layout".into()));
        }
        let mut amps = CVector::zeros(target.composite_dim());
        for (flat, &a) in self.amps.iter().enumerate() {
            if a != C64::new(0.0, 0.0) {
                let multi = self.layout.multi_index(flat);
                amps[target.flat_index(&multi)?] = a;
            }
        }
        Ok(StateVector {
            layout: target.clone(),
            amps,
            normalized: self.normalized,
        })
    }

    /// Makes the largest-magnitude amplitude real and positive.
    pub fn fix_global_phase(&self) -> StateVector {
        let pivot = self
            .amps
            .iter()
            .copied()
            .fold(C64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
        if pivot.norm() == 0.0 {
            return self.clone();
        }
        let phase = pivot.conj() / pivot.norm();
        StateVector {
            layout: self.layout.clone(),
            amps: self.amps.map(|z| z * phase),
            normalized: self.normalized,
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    /// `⟨ψ|O|ψ⟩` for a local operator on `targets`.
    pub fn expectation(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<C64> {
        let applied = self.apply_local(op, targets)?;
        Ok(self.amps.dotc(&applied.amps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::annihilation_matrix;

    fn ud() -> ModeLayout {
        ModeLayout::new([(ModeLabel::U, 3), (ModeLabel::D, 2)]).unwrap()
    }

    #[test]
    fn normalize_reports_weight() {
        let s = StateVector::from_fock_amplitudes(ModeLabel::U, &[c(0.3), c(0.0)]).unwrap();
        let (n, w) = s.normalize().unwrap();
        assert!((w - 0.09).abs() < 1e-15);
        assert!((n.amplitude(&[0]).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(n.is_normalized());
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let s = StateVector::from_fock_amplitudes(ModeLabel::U, &[c(0.0), c(0.0)]).unwrap();
        assert!(matches!(s.normalize(), Err(Error::DegenerateHerald(_))));
    }

    #[test]
    fn local_application_acts_on_factor() {
        let s = StateVector::fock(ud(), &[1, 1]).unwrap();
        let out = s.apply_local(&annihilation_matrix(3), &[ModeLabel::U]).unwrap();
        assert!((out.amplitude(&[0, 1]).unwrap() - c(1.0)).norm() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_removes_mode() {
        let s = StateVector::fock(ud(), &[2, 1]).unwrap();
        let p = s.project_fock(ModeLabel::D, 1).unwrap();
        assert_eq!(p.layout().len(), 1);
        assert!((p.amplitude(&[2]).unwrap() - c(1.0)).norm() < 1e-15);
        assert_eq!(s.project_fock(ModeLabel::D, 0).unwrap().norm_sqr(), 0.0);
    }

    #[test]
    fn global_phase_fix() {
        let s = StateVector::from_fock_amplitudes(ModeLabel::U, &[C64::new(0.0, 0.6), C64::new(0.0, -0.8)]).unwrap();
        let f = s.fix_global_phase();
        assert!((f.amplitude(&[1]).unwrap() - c(0.8)).norm() < 1e-15);
    }
}
