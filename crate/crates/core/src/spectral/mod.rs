//! Null-space learning on the centered data matrix.
//!
//! A conserved `O = Σ c_i P_i` has a time-independent expectation on every
//! initial state, so `Wᵀc = 0` for the per-block centered matrix `W`. Small
//! singular values of `W` flag candidate conservation laws and their left
//! singular vectors give the coefficients.

mod planner;

pub use planner::{plan_samples, PlannerInput, Regime, SamplePlan};

use nalgebra::{DMatrix, DVector};

use crate::data::DataMatrix;
use crate::error::{ensure, Error, Result};
use crate::linalg::{left_svd, LeftSvd};
use crate::operator::PauliSum;
use crate::pauli::PauliBasisSet;
use crate::prelude::*;

/// `W[i, (k, j)] = X[i, (k, j)] − mean_j' X[i, (k, j')]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    values: DMatrix<f64>,
    basis: PauliBasisSet,
    n_times: usize,
    n_initials: usize,
}

impl CenteredMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn basis(&self) -> &PauliBasisSet {
        &self.basis
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn n_initials(&self) -> usize {
        self.n_initials
    }

    /// `W / √(N_T N_I)`: singular values become root-mean-square deviations
    /// per column, comparable across grid sizes.
    pub fn normalized(&self) -> CenteredMatrix {
        let cols = (self.n_times * self.n_initials) as f64;
        CenteredMatrix {
            values: &self.values / cols.sqrt(),
            ..self.clone()
        }
    }

    /// Upper bound on the rank from the shape alone: `min(N_P, N_I (N_T − 1))`.
    pub fn shape_rank_bound(&self) -> usize {
        self.values.nrows().min(self.n_initials * (self.n_times - 1))
    }
}

/// Subtracts each row's time mean within every initial-state block.
pub fn center(x: &DataMatrix) -> Result<CenteredMatrix> {
    let nt = x.n_times();
    ensure(nt >= 2, || format!("centering needs N_T >= 2, got {nt}"))?;
    let mut w = x.values().clone();
    for k in 0..x.n_initials() {
        let mut block = w.columns_mut(k * nt, nt);
        for mut row in block.row_iter_mut() {
            let mean = row.sum() / nt as f64;
            row.add_scalar_mut(-mean);
        }
    }
    Ok(CenteredMatrix {
        values: w,
        basis: x.basis().clone(),
        n_times: nt,
        n_initials: x.n_initials(),
    })
}

/// A left singular vector at or below the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub coefficients: DVector<f64>,
    pub singular_value: f64,
    pub label: usize,
}

impl Candidate {
    pub fn to_operator(&self, basis: &PauliBasisSet) -> Result<PauliSum> {
        PauliSum::from_coefficients(basis, self.coefficients.as_slice())
    }
}

/// Full singular spectrum of `W` (ascending) with thresholded candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub singular_values: Vec<f64>,
    /// Column `i` belongs to `singular_values[i]`.
    pub left_vectors: DMatrix<f64>,
    pub epsilon: f64,
    pub d_null_hat: usize,
    pub candidates: Vec<Candidate>,
    /// Null directions forced by `N_P > N_I (N_T − 1)`.
    pub shape_null: usize,
    pub basis: PauliBasisSet,
}

impl SpectralReport {
    /// `σ_{c+1} / σ_c` (1-based), or `None` when out of range.
    pub fn gap_ratio(&self, c: usize) -> Option<f64> {
        if c == 0 || c >= self.singular_values.len() {
            return None;
        }
        Some(self.singular_values[c] / self.singular_values[c - 1])
    }

    /// The `c` smallest left vectors as columns.
    pub fn lowest(&self, c: usize) -> DMatrix<f64> {
        self.left_vectors.columns(0, c.min(self.left_vectors.ncols())).into_owned()
    }

    /// Candidate coefficients as columns.
    pub fn candidate_span(&self) -> DMatrix<f64> {
        self.lowest(self.d_null_hat)
    }
}

/// SVD of `W` with candidates `σ ≤ ε`.
///
/// Every one of the `N_P` left directions is reported, with zero singular
/// values beyond the column count.
pub fn svd_analyze(w: &CenteredMatrix, epsilon: f64) -> Result<SpectralReport> {
    ensure(epsilon > 0.0 && epsilon.is_finite(), || format!("threshold {epsilon} must be positive"))?;
    let v = w.values();
    ensure(v.iter().all(|x| x.is_finite()), || "non-finite entries in W".into())?;
    let np = v.nrows();
    let LeftSvd {
        singular_values,
        left: left_vectors,
    } = left_svd(v)?;
    let d_null_hat = singular_values.iter().take_while(|&&s| s <= epsilon).count();
    let candidates = (0..d_null_hat)
        .map(|i| Candidate {
            coefficients: left_vectors.column(i).into_owned(),
            singular_value: singular_values[i],
            label: i + 1,
        })
        .collect();
    Ok(SpectralReport {
        singular_values,
        left_vectors,
        epsilon,
        d_null_hat,
        candidates,
        shape_null: np - w.shape_rank_bound(),
        basis: w.basis().clone(),
    })
}

/// Median of `D̂_null` over an odd number of independent reports.
pub fn median_null_dim(reports: &[SpectralReport]) -> Result<usize> {
    ensure(reports.len() % 2 == 1, || {
        format!("median needs an odd number of reports, got {}", reports.len())
    })?;
    let mut d: Vec<usize> = reports.iter().map(|r| r.d_null_hat).collect();
    d.sort_unstable();
    Ok(d[d.len() / 2])
}

/// Rows of `x` whose Pauli support lies inside `region`.
pub fn restrict_subsystem(x: &DataMatrix, region: &[usize]) -> Result<DataMatrix> {
    ensure(!region.is_empty(), || "empty region".into())?;
    let n = x.basis().num_sites();
    ensure(region.iter().all(|&q| q < n), || format!("region sites must be < {n}"))?;
    let (basis, rows) = x.basis().restrict(region);
    if rows.is_empty() {
        return Err(Error::EmptyResult(format!("no basis element fits inside {region:?}")));
    }
    let values = x.values().select_rows(rows.iter());
    DataMatrix::new(values, basis, x.times().to_vec(), x.n_initials())
}

/// Norm of the projection of `c` onto the candidate span; 0 without
/// candidates.
pub fn subspace_overlap(c: &DVector<f64>, report: &SpectralReport) -> Result<f64> {
    ensure(c.len() == report.left_vectors.nrows(), || {
        format!("vector of length {} for a basis of {}", c.len(), report.left_vectors.nrows())
    })?;
    if report.d_null_hat == 0 {
        return Ok(0.0);
    }
    Ok((report.candidate_span().transpose() * c).norm())
}

/// `‖c − Π c‖ / ‖c‖` for `Π` the projector onto the orthonormal columns of
/// `span`.
pub fn span_residual(c: &DVector<f64>, span: &DMatrix<f64>) -> f64 {
    let norm = c.norm();
    if norm == 0.0 {
        return 0.0;
    }
    if span.ncols() == 0 {
        return 1.0;
    }
    let proj = span * (span.transpose() * c);
    (c - proj).norm() / norm
}
