//! The expectation-value data matrix shared by the dynamics, noise and
//! spectral stages.

use nalgebra::DMatrix;

use crate::error::{ensure, Result};
use crate::pauli::PauliBasisSet;
use crate::prelude::*;

/// `X[i, c] = ⟨P_i(t_j)⟩` on initial state `k`, with column `c = k·N_T + j`
/// (initial-state-major, time-minor).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    basis: PauliBasisSet,
    times: Vec<f64>,
    n_initials: usize,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, basis: PauliBasisSet, times: Vec<f64>, n_initials: usize) -> Result<Self> {
        ensure(values.nrows() == basis.len(), || {
            format!("{} rows for a basis of {}", values.nrows(), basis.len())
        })?;
        ensure(n_initials >= 1 && !times.is_empty(), || "empty time grid or initial set".into())?;
        ensure(values.ncols() == times.len() * n_initials, || {
            format!(
                "{} columns, expected N_T·N_I = {}·{}",
                values.ncols(),
                times.len(),
                n_initials
            )
        })?;
        Ok(DataMatrix {
            values,
            basis,
            times,
            n_initials,
        })
    }

    /// Assembles a matrix from per-initial-state blocks, each a list of
    /// columns ordered by time.
    pub fn from_blocks(basis: PauliBasisSet, times: Vec<f64>, blocks: &[Vec<Vec<f64>>]) -> Result<Self> {
        let nt = times.len();
        let np = basis.len();
        let mut values = DMatrix::zeros(np, nt * blocks.len());
        for (k, block) in blocks.iter().enumerate() {
            ensure(block.len() == nt, || format!("block {k} has {} columns", block.len()))?;
            for (j, col) in block.iter().enumerate() {
                ensure(col.len() == np, || format!("column ({k},{j}) has {} rows", col.len()))?;
                values.column_mut(k * nt + j).copy_from_slice(col);
            }
        }
        Self::new(values, basis, times, blocks.len())
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn basis(&self) -> &PauliBasisSet {
        &self.basis
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_initials(&self) -> usize {
        self.n_initials
    }

    pub fn column_index(&self, initial: usize, time: usize) -> usize {
        initial * self.times.len() + time
    }

    /// Same metadata, new values.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        Self::new(values, self.basis.clone(), self.times.clone(), self.n_initials)
    }

    /// Largest excursion outside `[-1, 1]`.
    pub fn range_violation(&self) -> f64 {
        self.values.iter().map(|v| (v.abs() - 1.0).max(0.0)).fold(0.0, f64::max)
    }
}
