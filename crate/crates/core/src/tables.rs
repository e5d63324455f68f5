//! Amplitude and probability tables indexed by joint Bell outcomes.
//!
//! A table over `arity` Bell pairs at site dimension `d` has `(d²)^arity`
//! entries. Entries are stored in a fixed lexicographic order of the index
//! tuple `(shift₁, phase₁, shift₂, phase₂, …)`, which is also the order used
//! by the inverse-CDF sampler, so every downstream consumer iterates tables
//! identically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::BellIndex;

/// Tolerance for norm / total-probability checks.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Complex coefficients of a state expanded in a product of Bell bases.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTable {
    dim: usize,
    arity: usize,
    entries: Vec<Complex64>,
}

impl AmplitudeTable {
    pub(crate) fn from_entries(dim: usize, arity: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), (dim * dim).pow(arity as u32));
        AmplitudeTable { dim, arity, entries }
    }

    /// Site dimension `d` of the underlying Bell bases.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of Bell pairs the table is indexed by (2 or 3).
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Entries in lexicographic index order.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Linear position of a joint Bell index.
    pub fn flat_index(&self, indices: &[BellIndex]) -> usize {
        assert_eq!(indices.len(), self.arity);
        indices
            .iter()
            .fold(0, |acc, ix| (acc * self.dim + ix.shift) * self.dim + ix.phase)
    }

    /// Coefficient at a joint Bell index.
    pub fn get(&self, indices: &[BellIndex]) -> Complex64 {
        self.entries[self.flat_index(indices)]
    }

    /// Sum of squared magnitudes; 1 for a complete expansion of a unit state.
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Squared magnitudes of every entry, in the same index order.
    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable {
            dim: self.dim,
            arity: self.arity,
            entries: self.entries.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// Decode a linear position back into per-pair Bell indices.
    pub fn unflatten(&self, mut flat: usize) -> Vec<BellIndex> {
        let mut out = vec![BellIndex { shift: 0, phase: 0 }; self.arity];
        for ix in out.iter_mut().rev() {
            ix.phase = flat % self.dim;
            flat /= self.dim;
            ix.shift = flat % self.dim;
            flat /= self.dim;
        }
        out
    }
}

/// Real outcome probabilities keyed by joint Bell outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    dim: usize,
    arity: usize,
    entries: Vec<f64>,
}

impl ProbabilityTable {
    /// Build a table from entries in lexicographic index order, checking
    /// positivity and that the total does not exceed 1.
    pub fn new(dim: usize, arity: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != (dim * dim).pow(arity as u32) {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, got {}",
                (dim * dim).pow(arity as u32),
                entries.len()
            )));
        }
        if let Some(p) = entries.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidTable(format!("entry {p} out of range")));
        }
        let total: f64 = entries.iter().sum();
        if total > 1.0 + NORM_TOLERANCE {
            return Err(Error::InvalidTable(format!("total {total} exceeds 1")));
        }
        Ok(ProbabilityTable { dim, arity, entries })
    }

    /// The 16-entry joint table for a pair of qubit Bell measurements.
    pub fn qubit16(entries: [f64; 16]) -> Result<Self> {
        Self::new(2, 2, entries.to_vec())
    }

    /// Uniform table over all joint outcomes.
    pub fn uniform(dim: usize, arity: usize) -> Self {
        let len = (dim * dim).pow(arity as u32);
        ProbabilityTable {
            dim,
            arity,
            entries: vec![1.0 / len as f64; len],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn flat_index(&self, indices: &[BellIndex]) -> usize {
        assert_eq!(indices.len(), self.arity);
        indices
            .iter()
            .fold(0, |acc, ix| (acc * self.dim + ix.shift) * self.dim + ix.phase)
    }

    pub fn get(&self, indices: &[BellIndex]) -> f64 {
        self.entries[self.flat_index(indices)]
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// True when the table sums to 1 within [`NORM_TOLERANCE`].
    pub fn is_complete(&self) -> bool {
        (self.total() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Convex combination `(1 - weight)·self + weight·other`.
    ///
    /// Both tables must share shape; `weight` must lie in `[0, 1]`.
    pub fn mix(&self, other: &ProbabilityTable, weight: f64) -> Result<ProbabilityTable> {
        if self.dim != other.dim || self.arity != other.arity {
            return Err(Error::InvalidTable("shape mismatch in mix".into()));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::ParameterRange {
                name: "weight",
                value: weight,
                range: "[0, 1]",
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (1.0 - weight) * a + weight * b)
            .collect();
        Ok(ProbabilityTable {
            dim: self.dim,
            arity: self.arity,
            entries,
        })
    }
}
