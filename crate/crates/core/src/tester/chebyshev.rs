use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::RngCore;

use crate::error::{ensure, Error, Result};
use crate::prelude::*;
use crate::rng;

/// `t = a + (b − a) sin²(πu/2)` for `u ∈ [0, 1]`: the arcsine law on `[a, b]`.
pub fn chebyshev_time(u: f64, a: f64, b: f64) -> f64 {
    let s = (core::f64::consts::FRAC_PI_2 * u).sin();
    a + (b - a) * s * s
}

/// `m` i.i.d. draws from the arcsine density `1/(π √(t(T−t)))` on `[0, T]`.
pub fn sample_chebyshev_times<R: RngCore + ?Sized>(m: usize, horizon: f64, rng: &mut R) -> Result<Vec<f64>> {
    ensure(m >= 1, || "need at least one sample".into())?;
    ensure(horizon > 0.0 && horizon.is_finite(), || format!("horizon {horizon} must be positive"))?;
    Ok((0..m).map(|_| chebyshev_time(rng::unit_f64(rng), 0.0, horizon)).collect())
}

/// Arcsine CDF `(2/π) asin(√(t/T))`.
pub fn arcsine_cdf(t: f64, horizon: f64) -> f64 {
    let x = (t / horizon).clamp(0.0, 1.0);
    core::f64::consts::FRAC_2_PI * x.sqrt().asin()
}

/// Maps `t ∈ [a, b]` to `[-1, 1]`.
#[inline]
pub fn to_unit(t: f64, a: f64, b: f64) -> f64 {
    (2.0 * t - a - b) / (b - a)
}

/// `T_0(x), …, T_K(x)`.
pub fn chebyshev_row(x: f64, k: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if k >= 1 {
        out[1] = x;
    }
    for j in 2..=k {
        out[j] = 2.0 * x * out[j - 1] - out[j - 2];
    }
}

/// `Σ c_j T_j(x)` by Clenshaw's recurrence.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `∫_{-1}^{1} Σ c_j T_j(x) dx`.
pub fn chebyshev_integral(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(j, _)| j % 2 == 0)
        .map(|(j, c)| c * 2.0 / (1.0 - (j * j) as f64))
        .sum()
}

/// Minimum sample count for a degree-`k` robust fit.
pub fn min_samples(k: usize, c2: f64) -> usize {
    let kf = k as f64;
    let log_rule = if k >= 2 { (c2 * kf * kf.ln()).ceil() as usize } else { 0 };
    (k + 1).max(log_rule)
}

/// Tuning for [`robust_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub c2: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Residual floor in the weights `1/max(|r|, η)`, relative to `max|y|`.
    pub floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            c2: 4.0,
            tolerance: 1e-10,
            max_iterations: 200,
            floor: 1e-12,
        }
    }
}

fn weighted_least_squares(a: &DMatrix<f64>, y: &DVector<f64>, w: &[f64]) -> Result<DVector<f64>> {
    let mut aw = a.clone();
    let mut yw = y.clone();
    for (i, &wi) in w.iter().enumerate() {
        let s = wi.sqrt();
        aw.row_mut(i).scale_mut(s);
        yw[i] *= s;
    }
    let qr = aw.qr();
    let qty = qr.q().transpose() * yw;
    qr.r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::NumericFailure("singular least-squares system".into()))
}

const WARM_START_ITERATIONS: usize = 30;

/// `k + 1` linearly independent rows, preferring small `|r|`.
fn initial_basis(design: &DMatrix<f64>, r: &DVector<f64>) -> Option<Vec<usize>> {
    let (m, p) = design.shape();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs()));
    let mut basis: Vec<usize> = Vec::with_capacity(p);
    for i in order {
        basis.push(i);
        let sub = DMatrix::from_fn(basis.len(), p, |a, b| design[(basis[a], b)]);
        if sub.rank(1e-10) < basis.len() {
            basis.pop();
        } else if basis.len() == p {
            return Some(basis);
        }
    }
    None
}

/// Vertex descent for `min Σ|y − A c|`. At a vertex the basis rows are
/// interpolated; with `D = A_N A_B⁻¹` and `s` the non-basic residual signs,
/// `v = Dᵀ s` satisfies `|v| ≤ 1` exactly at the optimum. Otherwise basis row
/// `j` with the largest `|v_j|` is released and the edge is followed to the
/// minimizing breakpoint, whose row enters. Stops early once `k + 1`
/// consecutive pivots fail to lower `Σ|r|` beyond roundoff.
fn vertex_descent(design: &DMatrix<f64>, y: &DVector<f64>, mut basis: Vec<usize>, options: &FitOptions) -> Result<DVector<f64>> {
    let (m, p) = design.shape();
    let zero = 1e-12 * y.amax().max(1.0);
    let solve_vertex = |basis: &[usize]| {
        let a_b = DMatrix::from_fn(p, p, |i, j| design[(basis[i], j)]);
        let y_b = DVector::from_fn(p, |i, _| y[basis[i]]);
        a_b.lu().solve(&y_b)
    };
    let singular = || Error::NumericFailure("singular interpolation basis".into());
    let mut c = solve_vertex(&basis).ok_or_else(singular)?;
    let mut best = (f64::INFINITY, c.clone());
    let mut stalled = 0;
    let mut last_step = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let r = y - design * &c;
        let obj = r.abs().sum();
        if obj < best.0 * (1.0 - 1e-12) {
            best = (obj, c.clone());
            stalled = 0;
        } else {
            // pivots no longer improve beyond roundoff
            stalled += 1;
            if stalled > p {
                return Ok(best.1);
            }
        }
        let a_b = DMatrix::from_fn(p, p, |i, j| design[(basis[i], j)]);
        let inv = a_b.try_inverse().ok_or_else(singular)?;
        let d_all = design * inv;
        let mut in_basis = vec![false; m];
        for &i in &basis {
            in_basis[i] = true;
        }
        let mut v = DVector::zeros(p);
        for i in (0..m).filter(|&i| !in_basis[i] && r[i].abs() > zero) {
            v += d_all.row(i).transpose() * r[i].signum();
        }
        let (j, vj) = v.iter().copied().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).expect("p >= 1");
        last_step = vj.abs() - 1.0;
        if last_step <= options.tolerance {
            return Ok(c);
        }
        let sigma = vj.signum();
        // slope of Σ|r_i − α σ D_ij| + α along the edge, with breakpoints
        let mut slope = 1.0 - vj.abs();
        let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
        for i in (0..m).filter(|&i| !in_basis[i]) {
            let rate = sigma * d_all[(i, j)];
            if rate == 0.0 {
                continue;
            }
            if r[i].abs() <= zero {
                slope += rate.abs();
                breaks.push((0.0, i, rate.abs()));
            } else {
                let alpha = r[i] / rate;
                if alpha > 0.0 {
                    breaks.push((alpha, i, rate.abs()));
                }
            }
        }
        if slope >= 0.0 {
            // degenerate: a zero-residual row blocks the edge; swap it in
            let Some(&(_, k, _)) = breaks.iter().filter(|b| b.0 == 0.0).max_by(|a, b| a.2.total_cmp(&b.2)) else {
                return Ok(c);
            };
            basis[j] = k;
        } else {
            breaks.retain(|b| b.0 > 0.0);
            breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut entering = None;
            for &(alpha, i, w) in &breaks {
                slope += 2.0 * w;
                if slope >= 0.0 {
                    entering = Some((alpha, i));
                    break;
                }
            }
            let (_, k) = entering.ok_or_else(|| Error::NumericFailure("unbounded descent edge".into()))?;
            basis[j] = k;
        }
        c = solve_vertex(&basis).ok_or_else(singular)?;
    }
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        last_step,
        last_iterate: c.iter().copied().collect(),
    })
}

/// Degree-`k` Chebyshev fit on `[a, b]` minimizing `Σ |y − p(t)|`.
///
/// A few reweighted least-squares passes pick a starting vertex; vertex
/// descent then finishes at the exact minimizer, certified by the optimality
/// condition to within `options.tolerance`.
///
/// Returns the coefficients of `T_0 … T_k` in the variable mapped to
/// `[-1, 1]`.
pub fn robust_fit(samples: &[(f64, f64)], k: usize, segment: (f64, f64), options: &FitOptions) -> Result<Vec<f64>> {
    let (a, b) = segment;
    ensure(b > a, || format!("empty segment [{a}, {b}]"))?;
    let need = min_samples(k, options.c2);
    ensure(samples.len() >= need, || {
        format!("{} samples for degree {k}, need at least {need}", samples.len())
    })?;
    ensure(samples.iter().all(|(t, y)| t.is_finite() && y.is_finite()), || "non-finite sample".into())?;
    let m = samples.len();
    let mut design = DMatrix::zeros(m, k + 1);
    let mut row = vec![0.0; k + 1];
    for (i, &(t, _)) in samples.iter().enumerate() {
        chebyshev_row(to_unit(t, a, b), k, &mut row);
        design.row_mut(i).copy_from_slice(&row);
    }
    let y = DVector::from_iterator(m, samples.iter().map(|s| s.1));
    let floor = options.floor * y.amax().max(1.0);
    let mut weights = vec![1.0; m];
    let mut c = weighted_least_squares(&design, &y, &weights)?;
    for _ in 0..WARM_START_ITERATIONS.min(options.max_iterations) {
        let r = &y - &design * &c;
        for (w, ri) in weights.iter_mut().zip(r.iter()) {
            *w = 1.0 / ri.abs().max(floor);
        }
        let wmax = weights.iter().copied().fold(0.0, f64::max);
        for w in weights.iter_mut() {
            *w /= wmax;
        }
        c = weighted_least_squares(&design, &y, &weights)?;
    }
    let basis = initial_basis(&design, &(&y - &design * &c))
        .ok_or_else(|| Error::InvalidParameter(format!("sample times do not determine a degree-{k} fit")))?;
    vertex_descent(&design, &y, basis, options).map(|c| c.iter().copied().collect())
}
