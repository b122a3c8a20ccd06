//! Continuous-time certification of candidate conservation laws.
//!
//! A candidate's expectation `f(t) = ⟨O(t)⟩` is sampled at Chebyshev-law
//! times, fitted segment by segment with a least-absolute-deviations
//! Chebyshev series, and the fitted curve's largest excursion from its time
//! average is compared against the promise thresholds `ε/4` and `3ε/4`.

mod chebyshev;
mod gamma;
mod piecewise;

pub use chebyshev::{
    arcsine_cdf, chebyshev_integral, chebyshev_row, chebyshev_time, clenshaw, min_samples, robust_fit,
    sample_chebyshev_times, to_unit, FitOptions,
};
pub use gamma::{derivative_constant, gamma_bound, nested_commutator_bound, GammaEstimate};
pub use piecewise::{
    grid_deviation, max_deviation, piecewise_interpolate, plan_interpolation, Deviation, FnSampler,
    InterpolationConfig, InterpolationPlan, PiecewisePoly, Segment, SeriesSampler, TimeSample,
};

use crate::error::{ensure, Result};
use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Conserved,
    Violated,
    /// The statistic fell between the thresholds.
    Indeterminate,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Conserved => "conserved",
            Outcome::Violated => "violated",
            Outcome::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestVerdict {
    pub outcome: Outcome,
    pub statistic: f64,
    pub witness_time: Option<f64>,
    pub epsilon: f64,
}

/// `≤ ε/4` is conserved, `≥ 3ε/4` violated (witnessed by `t*`).
pub fn hypothesis_test(deviation: Deviation, epsilon: f64) -> Result<TestVerdict> {
    ensure(epsilon > 0.0 && epsilon.is_finite(), || format!("epsilon {epsilon} must be > 0"))?;
    let d = deviation.d;
    let (outcome, witness_time) = if d <= epsilon / 4.0 {
        (Outcome::Conserved, None)
    } else if d >= 0.75 * epsilon {
        (Outcome::Violated, Some(deviation.t_star))
    } else {
        (Outcome::Indeterminate, None)
    };
    Ok(TestVerdict {
        outcome,
        statistic: d,
        witness_time,
        epsilon,
    })
}

/// A single-state verdict with the fit dimensions behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateVerdict {
    pub verdict: TestVerdict,
    pub n_segments: usize,
    pub degree: usize,
}

/// Full single-state pipeline: interpolate every candidate to `ε/8`, then
/// test at `ε`.
pub fn test_candidates(
    sampler: &mut dyn SeriesSampler,
    horizon: f64,
    gamma: &GammaEstimate,
    epsilon: f64,
    delta: f64,
    config: &InterpolationConfig,
) -> Result<Vec<CandidateVerdict>> {
    let (polys, plan) = piecewise_interpolate(sampler, horizon, gamma, epsilon / 8.0, delta, config)?;
    polys
        .iter()
        .map(|p| {
            Ok(CandidateVerdict {
                verdict: hypothesis_test(max_deviation(p), epsilon)?,
                n_segments: plan.segments,
                degree: p.degree(),
            })
        })
        .collect()
}

/// `⌈8‖O‖² ln(2χ/δ) / ε²⌉`.
pub fn ensemble_size(op_norm: f64, candidates: usize, epsilon: f64, delta: f64) -> Result<usize> {
    ensure(epsilon > 0.0, || format!("epsilon {epsilon} must be > 0"))?;
    ensure(delta > 0.0 && delta < 1.0, || format!("delta {delta} must lie in (0, 1)"))?;
    ensure(candidates >= 1, || "no candidates".into())?;
    let n = 8.0 * op_norm * op_norm * (2.0 * candidates as f64 / delta).ln() / (epsilon * epsilon);
    Ok((n.ceil() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub n_states: usize,
    pub verdicts: Vec<TestVerdict>,
}

/// Draws `N_I` states (sized by the largest norm bound) and averages the
/// per-state deviations `d(O, ρ_k)` supplied by `per_state`, which should
/// run the single-state pipeline at accuracy `ε/4`.
///
/// The witness of a violated candidate is the `t*` of the state with the
/// largest deviation.
pub fn ensemble_test(
    per_state: &mut dyn FnMut(usize) -> Result<Vec<Deviation>>,
    norm_bounds: &[f64],
    epsilon: f64,
    delta: f64,
) -> Result<EnsembleResult> {
    let chi = norm_bounds.len();
    let norm = norm_bounds.iter().copied().fold(0.0, f64::max);
    let n_states = ensemble_size(norm, chi, epsilon, delta)?;
    let mut sums = vec![0.0; chi];
    let mut witness = vec![Deviation { d: f64::NEG_INFINITY, t_star: 0.0 }; chi];
    for k in 0..n_states {
        let devs = per_state(k)?;
        ensure(devs.len() == chi, || format!("state {k} gave {} deviations for {chi} candidates", devs.len()))?;
        for ((s, w), d) in sums.iter_mut().zip(witness.iter_mut()).zip(devs) {
            *s += d.d;
            if d.d > w.d {
                *w = d;
            }
        }
    }
    let verdicts = sums
        .iter()
        .zip(&witness)
        .map(|(s, w)| {
            hypothesis_test(
                Deviation {
                    d: s / n_states as f64,
                    t_star: w.t_star,
                },
                epsilon,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleResult { n_states, verdicts })
}
