use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optical modes of the heralded Rabi setups.
///
/// `U` carries the continuous-variable input, `D` the photonic qubit,
/// `UPrime`/`DPrime` the ancillas sent to the central detection module,
/// `A` the auxiliary squeezed mode of the third-order scheme and `Env` a
/// vacuum bath used to model loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeLabel {
    U,
    UPrime,
    D,
    DPrime,
    A,
    Env,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 6] = [
        ModeLabel::U,
        ModeLabel::UPrime,
        ModeLabel::D,
        ModeLabel::DPrime,
        ModeLabel::A,
        ModeLabel::Env,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModeLabel::U => "u",
            ModeLabel::UPrime => "u'",
            ModeLabel::D => "d",
            ModeLabel::DPrime => "d'",
            ModeLabel::A => "a",
            ModeLabel::Env => "env",
        }
    }

    /// Default Fock cutoff for the mode.
    pub fn default_dim(self) -> usize {
        match self {
            ModeLabel::U => 25,
            ModeLabel::UPrime => 6,
            ModeLabel::D => 3,
            ModeLabel::DPrime => 3,
            ModeLabel::A => 6,
            ModeLabel::Env => 4,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(ModeLabel::U),
            "u'" | "u_prime" | "uprime" => Ok(ModeLabel::UPrime),
            "d" => Ok(ModeLabel::D),
            "d'" | "d_prime" | "dprime" => Ok(ModeLabel::DPrime),
            "a" => Ok(ModeLabel::A),
            "env" => Ok(ModeLabel::Env),
            other => Err(Error::Layout(format!("unknown mode label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub label: ModeLabel,
    pub dim: usize,
}

impl Mode {
    pub const fn new(label: ModeLabel, dim: usize) -> Self {
        Self { label, dim }
    }
}

/// Ordered list of modes with their Fock cutoffs.
///
/// All index arithmetic (strides, flat/multi-index conversion, Kronecker
/// ordering) is derived from here. The first mode is the most significant
/// digit of the flat index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLayout {
    modes: Vec<Mode>,
}

impl ModeLayout {
    pub fn new(modes: impl IntoIterator<Item = (ModeLabel, usize)>) -> Result<Self> {
        let mut out: Vec<Mode> = Vec::new();
        for (label, dim) in modes {
            if dim < 2 {
                return Err(Error::InvalidDimension(dim));
            }
            if out.iter().any(|m| m.label == label) {
                return Err(Error::LayoutConflict(label));
            }
            out.push(Mode { label, dim });
        }
        Ok(Self { modes: out })
    }

    pub fn single(label: ModeLabel, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// Layout with no modes; its composite space is one-dimensional.
    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = ModeLabel> + '_ {
        self.modes.iter().map(|m| m.label)
    }

    pub fn composite_dim(&self) -> usize {
        self.modes.iter().map(|m| m.dim).product()
    }

    pub fn contains(&self, label: ModeLabel) -> bool {
        self.modes.iter().any(|m| m.label == label)
    }

    pub fn position(&self, label: ModeLabel) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::Layout(format!("mode {label} is not part of the layout")))
    }

    pub fn dim_of(&self, label: ModeLabel) -> Result<usize> {
        Ok(self.modes[self.position(label)?].dim)
    }

    /// Stride of each mode in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.modes.len()];
        for k in (0..self.modes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.modes[k + 1].dim;
        }
        strides
    }

    pub fn stride_of(&self, label: ModeLabel) -> Result<usize> {
        let pos = self.position(label)?;
        Ok(self.strides()[pos])
    }

    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.modes.len() {
            return Err(Error::Layout(format!(
                "multi-index has {} entries, layout has {} modes",
                multi.len(),
                self.modes.len()
            )));
        }
        let mut flat = 0;
        for (m, &n) in self.modes.iter().zip(multi) {
            if n >= m.dim {
                return Err(Error::Layout(format!("level {n} exceeds cutoff {} of mode {}", m.dim, m.label)));
            }
            flat = flat * m.dim + n;
        }
        Ok(flat)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.modes.len()];
        for k in (0..self.modes.len()).rev() {
            out[k] = flat % self.modes[k].dim;
            flat /= self.modes[k].dim;
        }
        out
    }

    /// Concatenation of two layouts with disjoint labels.
    pub fn concat(&self, other: &ModeLayout) -> Result<ModeLayout> {
        ModeLayout::new(
            self.modes
                .iter()
                .chain(other.modes.iter())
                .map(|m| (m.label, m.dim)),
        )
    }

    /// Layout with the given mode removed.
    pub fn without(&self, label: ModeLabel) -> Result<ModeLayout> {
        self.position(label)?;
        Ok(ModeLayout {
            modes: self.modes.iter().copied().filter(|m| m.label != label).collect(),
        })
    }

    /// Sub-layout holding only `keep`, in this layout's order.
    pub fn restrict(&self, keep: &[ModeLabel]) -> Result<ModeLayout> {
        for &k in keep {
            self.position(k)?;
        }
        Ok(ModeLayout {
            modes: self.modes.iter().copied().filter(|m| keep.contains(&m.label)).collect(),
        })
    }

    /// Same labels with a different cutoff for one mode.
    pub fn with_dim(&self, label: ModeLabel, dim: usize) -> Result<ModeLayout> {
        let pos = self.position(label)?;
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut modes = self.modes.clone();
        modes[pos].dim = dim;
        Ok(ModeLayout { modes })
    }

    /// Flat offsets of every basis state of the complement of `targets`,
    /// together with the flat offsets spanned by `targets` (in the order the
    /// targets are listed). Any composite index decomposes uniquely as
    /// `outer + inner`.
    pub(crate) fn split_offsets(&self, targets: &[ModeLabel]) -> Result<(Vec<usize>, Vec<usize>)> {
        let strides = self.strides();
        let mut target_pos = Vec::with_capacity(targets.len());
        for &t in targets {
            let p = self.position(t)?;
            if target_pos.contains(&p) {
                return Err(Error::LayoutConflict(t));
            }
            target_pos.push(p);
        }
        let inner = offsets(target_pos.iter().map(|&p| (self.modes[p].dim, strides[p])));
        let outer = offsets(
            (0..self.modes.len())
                .filter(|p| !target_pos.contains(p))
                .map(|p| (self.modes[p].dim, strides[p])),
        );
        Ok((outer, inner))
    }
}

// Enumerates sum_k n_k * stride_k over all n_k < dim_k, last entry fastest.
fn offsets(dims_strides: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut out = vec![0usize];
    for (dim, stride) in dims_strides {
        let mut next = Vec::with_capacity(out.len() * dim);
        for &base in &out {
            for n in 0..dim {
                next.push(base + n * stride);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_duplicate_modes() {
        assert!(matches!(ModeLayout::single(ModeLabel::U, 1), Err(Error::InvalidDimension(1))));
        assert!(matches!(
            ModeLayout::new([(ModeLabel::U, 3), (ModeLabel::U, 4)]),
            Err(Error::LayoutConflict(ModeLabel::U))
        ));
    }

    #[test]
    fn flat_round_trip() {
        let layout = ModeLayout::new([(ModeLabel::U, 4), (ModeLabel::D, 2), (ModeLabel::DPrime, 3)]).unwrap();
        assert_eq!(layout.composite_dim(), 24);
        for flat in 0..24 {
            let multi = layout.multi_index(flat);
            assert_eq!(layout.flat_index(&multi).unwrap(), flat);
        }
        assert_eq!(layout.strides(), vec![6, 3, 1]);
    }

    #[test]
    fn split_offsets_cover_space() {
        let layout = ModeLayout::new([(ModeLabel::U, 3), (ModeLabel::UPrime, 2), (ModeLabel::D, 2)]).unwrap();
        let (outer, inner) = layout.split_offsets(&[ModeLabel::D, ModeLabel::U]).unwrap();
        let mut all: Vec<usize> = outer.iter().flat_map(|o| inner.iter().map(move |i| o + i)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        // inner ordering follows the target list: d fastest after u
        assert_eq!(inner, vec![0, 4, 8, 1, 5, 9]);
    }

    #[test]
    fn unknown_label_is_layout_error() {
        let layout = ModeLayout::single(ModeLabel::U, 3).unwrap();
        assert!(matches!(layout.position(ModeLabel::D), Err(Error::Layout(_))));
    }
}
