//! Exact ground truth for the learning pipeline.
//!
//! [`commutant_oracle`] finds every operator in a Pauli span that is
//! conserved for all initial states. [`exact_null_oracle`] finds the
//! state-dependent laws for given initial states by sampling noiseless
//! dynamics on a refined time grid.

use alloc::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{expectation_series, Dynamics, StateVector};
use crate::error::{ensure, Error, Result};
use crate::linalg::{left_svd, LeftSvd};
use crate::operator::ComplexPauliSum;
use crate::pauli::{PauliBasisSet, PauliString};
use crate::prelude::*;
use crate::spectral::{center, svd_analyze};

/// Largest basis accepted by [`commutant_oracle`].
pub const COMMUTANT_BASIS_CAP: usize = 4096;

/// Relative singular-value tolerance of the commutant.
pub const COMMUTANT_TOLERANCE: f64 = 1e-10;

/// Absolute singular-value tolerance of the exact null space.
pub const EXACT_NULL_TOLERANCE: f64 = 1e-9;

/// A null space within a Pauli span.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpace {
    pub dimension: usize,
    /// Orthonormal coefficient vectors as columns (`N_P × dimension`).
    pub vectors: DMatrix<f64>,
    /// All singular values of the underlying map, ascending.
    pub singular_values: Vec<f64>,
}

/// `𝓛†(P)` for the adjoint generator: `i[H, P]` plus, for each jump
/// `L = aQ`, `a²(QPQ − P)`, which is `−2a²P` when `Q` anticommutes with `P`.
pub fn adjoint_image(model: &Dynamics, p: &PauliString) -> ComplexPauliSum {
    let mut out = ComplexPauliSum::default();
    let i = Complex64::new(0.0, 1.0);
    for (lambda, h) in model.hamiltonian().terms().terms() {
        if h.commutes_unchecked(p) {
            continue;
        }
        let (ph, r) = h.multiply_unchecked(p);
        out.add(r, i * ph.to_complex() * (2.0 * lambda));
    }
    if let Dynamics::Lindblad(l) = model {
        for (a, q) in l.jumps() {
            if !q.commutes_unchecked(p) {
                out.add(*p, Complex64::new(-2.0 * a * a, 0.0));
            }
        }
    }
    out
}

/// Columns `re/im` of `𝓛†(P_i)` over the strings they touch, with all-zero
/// rows dropped.
fn adjoint_matrix(model: &Dynamics, basis: &PauliBasisSet) -> DMatrix<f64> {
    let images: Vec<ComplexPauliSum> = basis.elements().iter().map(|p| adjoint_image(model, p)).collect();
    let mut rows: BTreeMap<(PauliString, bool), usize> = BTreeMap::new();
    for img in &images {
        for (s, c) in img.terms() {
            for (imag, v) in [(false, c.re), (true, c.im)] {
                if v != 0.0 {
                    let next = rows.len();
                    rows.entry((*s, imag)).or_insert(next);
                }
            }
        }
    }
    let mut m = DMatrix::zeros(rows.len(), basis.len());
    for (j, img) in images.iter().enumerate() {
        for (s, c) in img.terms() {
            for (imag, v) in [(false, c.re), (true, c.im)] {
                if let Some(&r) = rows.get(&(*s, imag)) {
                    m[(r, j)] += v;
                }
            }
        }
    }
    m
}

/// Right null space of `m` with singular values `≤ tol(σ_max)`.
fn right_null_space(m: DMatrix<f64>, tol: impl Fn(f64) -> f64) -> Result<NullSpace> {
    let LeftSvd { singular_values, left } = left_svd(&m.transpose())?;
    let cutoff = tol(singular_values.last().copied().unwrap_or(0.0));
    let dimension = singular_values.iter().take_while(|&&s| s <= cutoff).count();
    let vectors = left.columns(0, dimension).into_owned();
    Ok(NullSpace {
        dimension,
        vectors,
        singular_values,
    })
}

/// Operators `Σ c_i P_i` with `𝓛†(O) = 0`, i.e. conserved for every initial
/// state (for a Hamiltonian, `[H, O] = 0`). Singular values at or below
/// `1e-10 · max(1, σ_max)` count as zero.
pub fn commutant_oracle(model: &Dynamics, basis: &PauliBasisSet) -> Result<NullSpace> {
    ensure(model.num_sites() == basis.num_sites(), || {
        format!("model on {} sites, basis on {}", model.num_sites(), basis.num_sites())
    })?;
    ensure(!basis.is_empty(), || "empty basis".into())?;
    if basis.len() > COMMUTANT_BASIS_CAP {
        return Err(Error::ResourceLimit(format!(
            "basis of {} strings exceeds {COMMUTANT_BASIS_CAP}",
            basis.len()
        )));
    }
    let m = adjoint_matrix(model, basis);
    right_null_space(m, |smax| COMMUTANT_TOLERANCE * smax.max(1.0))
}

/// `times` with three equally spaced points inserted in every gap.
pub fn refine_grid(times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * times.len().saturating_sub(1) + 1);
    for w in times.windows(2) {
        for s in 0..4 {
            out.push(w[0] + (w[1] - w[0]) * s as f64 / 4.0);
        }
    }
    out.extend(times.last());
    out
}

/// Noiseless data on the refined grid, centered per initial state; the
/// null space counts singular values `≤ 1e-9`.
pub fn exact_null_oracle(model: &Dynamics, initials: &[StateVector], times: &[f64], basis: &PauliBasisSet) -> Result<NullSpace> {
    ensure(times.len() >= 2, || "need at least two times".into())?;
    let fine = refine_grid(times);
    let x = expectation_series(model, initials, &fine, basis)?;
    let report = svd_analyze(&center(&x)?, EXACT_NULL_TOLERANCE)?;
    Ok(NullSpace {
        dimension: report.d_null_hat,
        vectors: report.candidate_span(),
        singular_values: report.singular_values,
    })
}
