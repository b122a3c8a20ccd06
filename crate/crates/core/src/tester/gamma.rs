use crate::dynamics::HamiltonianSpec;
use crate::error::{ensure, Result};
use crate::prelude::*;

/// Bound on the growth of time derivatives of local expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEstimate {
    /// Largest per-site sum of `|λ_P|` over terms touching the site.
    pub lambda: f64,
    pub k: usize,
    /// `2Λ(k − 1)`.
    pub gamma: f64,
    /// Set for `k = 1`, where `γ = 0` does not bound anything.
    pub degenerate: bool,
}

impl GammaEstimate {
    /// A hand-picked `γ`, for tests and manual segmenting.
    pub fn fixed(gamma: f64) -> Self {
        GammaEstimate {
            lambda: 0.0,
            k: 0,
            gamma,
            degenerate: false,
        }
    }
}

pub fn gamma_bound(h: &HamiltonianSpec, k: usize) -> Result<GammaEstimate> {
    ensure(k >= 1, || "locality must be >= 1".into())?;
    let n = h.num_sites();
    ensure(!h.terms().without_identity().is_empty(), || "Hamiltonian has no non-identity terms".into())?;
    let mut per_site = vec![0.0; n];
    for (c, p) in h.terms().terms() {
        for q in p.support() {
            per_site[q] += c.abs();
        }
    }
    let lambda = per_site.into_iter().fold(0.0, f64::max);
    Ok(GammaEstimate {
        lambda,
        k,
        gamma: 2.0 * lambda * (k - 1) as f64,
        degenerate: k == 1,
    })
}

/// `‖ad_H^ℓ(O)‖ ≤ ‖O‖ Π_{r<ℓ} 2Λ(s + r(k − 1))` for `O` supported on `s`
/// sites.
pub fn nested_commutator_bound(estimate: &GammaEstimate, support: usize, ell: usize, op_norm: f64) -> f64 {
    let step = estimate.k.saturating_sub(1) as f64;
    (0..ell).fold(op_norm, |acc, r| acc * 2.0 * estimate.lambda * (support as f64 + r as f64 * step))
}

/// `C` in `‖ad_H^ℓ(O)‖ ≤ ℓ! γ^ℓ ‖O‖ C`, i.e. `Π_{r<ℓ}(s + r(k−1)) / (ℓ! (k−1)^ℓ)`.
/// Infinite for `k = 1` and `ℓ ≥ 1`.
pub fn derivative_constant(support: usize, k: usize, ell: usize) -> f64 {
    let step = k.saturating_sub(1) as f64;
    (0..ell).fold(1.0, |acc, r| acc * (support as f64 + r as f64 * step) / ((r + 1) as f64 * step))
}
