use crate::error::{ensure, Result};
use crate::prelude::*;

/// How the expectation values are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Each Pauli measured separately.
    Naive,
    /// Classical shadows, worst-case covariance.
    ShadowWorst,
    /// Classical shadows with correlations decaying over length `xi`.
    ShadowLocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerInput {
    pub n_p: usize,
    pub n_t: usize,
    pub n_i: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub regime: Regime,
    pub xi: f64,
    pub dim: u32,
    pub c0: f64,
    pub c1: f64,
}

impl PlannerInput {
    /// Unit constants, `ξ = 1`, one dimension.
    pub fn new(n_p: usize, n_t: usize, n_i: usize, epsilon: f64, delta: f64, regime: Regime) -> Self {
        PlannerInput {
            n_p,
            n_t,
            n_i,
            epsilon,
            delta,
            regime,
            xi: 1.0,
            dim: 1,
            c0: 1.0,
            c1: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure(self.n_p >= 1 && self.n_t >= 1 && self.n_i >= 1, || "counts must be >= 1".into())?;
        ensure(self.epsilon > 0.0 && self.epsilon.is_finite(), || format!("epsilon {} must be > 0", self.epsilon))?;
        ensure(self.delta > 0.0 && self.delta < 1.0, || format!("delta {} must lie in (0, 1)", self.delta))?;
        ensure(self.c0 > 0.0 && self.c1 > 0.0, || "planner constants must be positive".into())?;
        ensure(self.regime != Regime::ShadowLocal || self.xi >= 1.0, || {
            format!("correlation length {} must be >= 1", self.xi)
        })
    }
}

/// A heuristic sample budget; the constants are not derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePlan {
    /// Samples per estimated quantity and cell, before rounding.
    pub samples_per_cell: f64,
    /// Independent repetitions for the median.
    pub repeats: u64,
    /// All state preparations over all cells and repetitions.
    pub total: f64,
}

/// `N_s = C₀ n ln(n) (4/ε)²` with `n = N_P + N_T N_I`, repeated
/// `⌈C₁ ln(1/δ)⌉` times. Shadow regimes scale `N_s` by `N_P` (worst case)
/// or `ξ^D` (local) and share snapshots across all Paulis of a cell.
pub fn plan_samples(input: &PlannerInput) -> Result<SamplePlan> {
    input.validate()?;
    let cols = (input.n_t * input.n_i) as f64;
    let n = input.n_p as f64 + cols;
    let base = input.c0 * n * n.ln() * (4.0 / input.epsilon).powi(2);
    let repeats = (input.c1 * (1.0 / input.delta).ln()).ceil().max(1.0) as u64;
    let (samples_per_cell, per_cell_measurements) = match input.regime {
        Regime::Naive => (base, input.n_p as f64),
        Regime::ShadowWorst => (base * input.n_p as f64, 1.0),
        Regime::ShadowLocal => (base * input.xi.powi(input.dim as i32), 1.0),
    };
    Ok(SamplePlan {
        samples_per_cell,
        repeats,
        total: per_cell_measurements * cols * samples_per_cell * repeats as f64,
    })
}
