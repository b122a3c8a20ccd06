use super::chebyshev::{chebyshev_integral, chebyshev_time, clenshaw, min_samples, robust_fit, to_unit, FitOptions};
use super::gamma::GammaEstimate;
use crate::error::{ensure, Result};
use crate::prelude::*;
use crate::rng::{self, Domain};

/// Estimates of every candidate at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSample {
    pub t: f64,
    pub estimates: Vec<f64>,
    pub error_scale: Vec<f64>,
}

/// Source of noisy `⟨O_i(t)⟩` estimates for all candidates at once.
pub trait SeriesSampler {
    fn num_candidates(&self) -> usize;
    fn sample(&mut self, t: f64) -> Result<TimeSample>;
}

/// Adapter for a noiseless closure `t ↦ [f_i(t)]`.
pub struct FnSampler<F> {
    pub candidates: usize,
    pub f: F,
}

impl<F: FnMut(f64) -> Vec<f64>> SeriesSampler for FnSampler<F> {
    fn num_candidates(&self) -> usize {
        self.candidates
    }

    fn sample(&mut self, t: f64) -> Result<TimeSample> {
        let estimates = (self.f)(t);
        ensure(estimates.len() == self.candidates, || {
            format!("sampler returned {} values for {} candidates", estimates.len(), self.candidates)
        })?;
        Ok(TimeSample {
            t,
            error_scale: vec![0.0; estimates.len()],
            estimates,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub coeffs: Vec<f64>,
}

impl Segment {
    pub fn eval(&self, t: f64) -> f64 {
        clenshaw(&self.coeffs, to_unit(t, self.start, self.end))
    }

    pub fn integral(&self) -> f64 {
        0.5 * (self.end - self.start) * chebyshev_integral(&self.coeffs)
    }
}

/// A piecewise Chebyshev series tiling `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    segments: Vec<Segment>,
}

impl PiecewisePoly {
    /// Segments must be contiguous, ordered and non-degenerate, starting at 0.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        ensure(!segments.is_empty(), || "no segments".into())?;
        ensure(segments[0].start == 0.0, || "tiling must start at t = 0".into())?;
        for (i, s) in segments.iter().enumerate() {
            ensure(s.end > s.start && !s.coeffs.is_empty(), || format!("segment {i} is degenerate"))?;
            if i > 0 {
                let gap = (s.start - segments[i - 1].end).abs();
                ensure(gap <= 1e-12 * s.end.max(1.0), || format!("segment {i} does not abut its predecessor"))?;
            }
        }
        Ok(PiecewisePoly { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.coeffs.len() - 1).max().unwrap_or(0)
    }

    fn locate(&self, t: f64) -> &Segment {
        let i = self.segments.partition_point(|s| s.end < t);
        &self.segments[i.min(self.segments.len() - 1)]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.locate(t).eval(t)
    }

    /// `(1/T) ∫₀ᵀ ĝ`.
    pub fn mean(&self) -> f64 {
        self.segments.iter().map(Segment::integral).sum::<f64>() / self.horizon()
    }
}

/// Settings for [`piecewise_interpolate`].
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationConfig {
    /// Per-candidate bound `C_f` on `|f|`, typically `Σ|c_i|`.
    pub norm_bounds: Vec<f64>,
    pub fit: FitOptions,
    pub seed: u64,
}

/// Segment count, degree and per-segment sample count chosen for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationPlan {
    pub segments: usize,
    pub degree: usize,
    pub samples_per_segment: usize,
}

/// `max(1, ⌈ΓT⌉)` segments; degree `⌈log₂(C_f/ε)⌉`; `⌈C₂ K ln(K/δ')⌉`
/// samples per segment with `δ'` the failure budget split over segments and
/// candidates.
pub fn plan_interpolation(horizon: f64, gamma: f64, c_f: f64, epsilon: f64, delta: f64, candidates: usize, c2: f64) -> Result<InterpolationPlan> {
    ensure(horizon > 0.0 && horizon.is_finite(), || format!("horizon {horizon} must be positive"))?;
    ensure(epsilon > 0.0, || format!("epsilon {epsilon} must be > 0"))?;
    ensure(delta > 0.0 && delta < 1.0, || format!("delta {delta} must lie in (0, 1)"))?;
    ensure(gamma >= 0.0 && gamma.is_finite(), || format!("gamma {gamma} must be >= 0"))?;
    ensure(c_f >= 0.0 && c_f.is_finite(), || format!("norm bound {c_f} must be >= 0"))?;
    let segments = ((gamma * horizon).ceil() as usize).max(1);
    let degree = if c_f > epsilon { (c_f / epsilon).log2().ceil() as usize } else { 0 };
    let delta_seg = delta / (segments * candidates.max(1)) as f64;
    let kf = degree.max(1) as f64;
    let m = (c2 * kf * (kf / delta_seg).ln()).ceil() as usize;
    Ok(InterpolationPlan {
        segments,
        degree,
        samples_per_segment: m.max(min_samples(degree, c2)),
    })
}

/// Fits every candidate of `sampler` on `[0, T]`. Each sampled time is
/// queried once and serves all candidates.
pub fn piecewise_interpolate(
    sampler: &mut dyn SeriesSampler,
    horizon: f64,
    gamma: &GammaEstimate,
    epsilon: f64,
    delta: f64,
    config: &InterpolationConfig,
) -> Result<(Vec<PiecewisePoly>, InterpolationPlan)> {
    let chi = sampler.num_candidates();
    ensure(chi == config.norm_bounds.len(), || {
        format!("{} norm bounds for {chi} candidates", config.norm_bounds.len())
    })?;
    ensure(chi >= 1, || "no candidates".into())?;
    let c_max = config.norm_bounds.iter().copied().fold(0.0, f64::max);
    let plan = plan_interpolation(horizon, gamma.gamma, c_max, epsilon, delta, chi, config.fit.c2)?;
    let width = horizon / plan.segments as f64;
    let mut pieces: Vec<Vec<Segment>> = vec![Vec::with_capacity(plan.segments); chi];
    for s in 0..plan.segments {
        let a = s as f64 * width;
        let b = if s + 1 == plan.segments { horizon } else { (s + 1) as f64 * width };
        let mut r = rng::stream(config.seed, Domain::ChebyshevTimes, s as u64, 0);
        let mut per_candidate: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(plan.samples_per_segment); chi];
        for _ in 0..plan.samples_per_segment {
            let t = chebyshev_time(rng::unit_f64(&mut r), a, b);
            let sample = sampler.sample(t)?;
            ensure(sample.estimates.len() == chi, || "sampler returned the wrong number of estimates".into())?;
            for (dst, &y) in per_candidate.iter_mut().zip(&sample.estimates) {
                dst.push((t, y));
            }
        }
        for (i, samples) in per_candidate.iter().enumerate() {
            let k = if config.norm_bounds[i] > epsilon {
                ((config.norm_bounds[i] / epsilon).log2().ceil() as usize).min(plan.degree)
            } else {
                0
            };
            let coeffs = robust_fit(samples, k, (a, b), &config.fit)?;
            pieces[i].push(Segment { start: a, end: b, coeffs });
        }
    }
    let polys = pieces.into_iter().map(PiecewisePoly::new).collect::<Result<Vec<_>>>()?;
    Ok((polys, plan))
}

/// `max_t |ĝ(t) − ĝ̄|` and its maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub d: f64,
    pub t_star: f64,
}

const GRID_PER_SEGMENT: usize = 200;

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Grid scan (200 points per segment) refined by golden-section search to
/// `1e-8` in `t`.
pub fn max_deviation(poly: &PiecewisePoly) -> Deviation {
    let mean = poly.mean();
    let mut best = Deviation { d: -1.0, t_star: 0.0 };
    for seg in poly.segments() {
        let dev = |t: f64| (seg.eval(t) - mean).abs();
        let step = (seg.end - seg.start) / (GRID_PER_SEGMENT - 1) as f64;
        let grid: Vec<f64> = (0..GRID_PER_SEGMENT).map(|i| seg.start + i as f64 * step).collect();
        let values: Vec<f64> = grid.iter().map(|&t| dev(t)).collect();
        let (i, &v) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        let mut cand = Deviation { d: v, t_star: grid[i] };
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(GRID_PER_SEGMENT - 1)];
        let (t, d) = golden_max(dev, lo, hi, 1e-8);
        if d > cand.d {
            cand = Deviation { d, t_star: t };
        }
        if cand.d > best.d {
            best = cand;
        }
    }
    best
}

/// `max_j |y_j − ȳ|` over raw grid estimates, with the arg-max index.
pub fn grid_deviation(values: &[f64]) -> Option<(f64, usize)> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values
        .iter()
        .map(|v| (v - mean).abs())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, d)| (d, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn single(coeffs: Vec<f64>, horizon: f64) -> PiecewisePoly {
        PiecewisePoly::new(vec![Segment { start: 0.0, end: horizon, coeffs }]).unwrap()
    }

    #[test]
    fn constant_has_no_deviation() {
        let p = single(vec![0.7], 5.0);
        assert!((p.mean() - 0.7).abs() < 1e-15);
        assert!(max_deviation(&p).d < 1e-15);
    }

    #[test]
    fn cosine_closed_form() {
        let horizon = 2.0;
        let f = |t: f64| (2.0 * core::f64::consts::PI * t / horizon).cos();
        let mut sampler = FnSampler { candidates: 1, f: |t: f64| vec![f(t)] };
        let gamma = GammaEstimate::fixed(0.0);
        let config = InterpolationConfig {
            norm_bounds: vec![1.0],
            fit: FitOptions::default(),
            seed: 3,
        };
        let (polys, plan) = piecewise_interpolate(&mut sampler, horizon, &gamma, 1e-7, 0.01, &config).unwrap();
        assert_eq!(plan.segments, 1);
        let dev = max_deviation(&polys[0]);
        assert!(polys[0].mean().abs() < 1e-6);
        assert!((dev.d - 1.0).abs() < 1e-6);
        assert!(dev.t_star < 1e-3 || dev.t_star > horizon - 1e-3);
    }

    #[test]
    fn matches_dense_scan() {
        let mut r = stream(11, Domain::Test, 0, 0);
        for _ in 0..5 {
            let coeffs: Vec<f64> = (0..6).map(|_| 2.0 * rng::unit_f64(&mut r) - 1.0).collect();
            let p = single(coeffs, 3.0);
            let mean = p.mean();
            let brute = (0..100_000)
                .map(|i| (p.eval(3.0 * i as f64 / 99_999.0) - mean).abs())
                .fold(0.0, f64::max);
            assert!((max_deviation(&p).d - brute).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_integrates_exactly() {
        // degree-3 on [0, 2] and [2, 5], checked against Simpson on each piece
        let segs = vec![
            Segment { start: 0.0, end: 2.0, coeffs: vec![0.1, 0.4, -0.3, 0.2] },
            Segment { start: 2.0, end: 5.0, coeffs: vec![-0.5, 0.1, 0.6, 0.05] },
        ];
        let p = PiecewisePoly::new(segs).unwrap();
        let simpson = |s: &Segment| (s.end - s.start) / 6.0 * (s.eval(s.start) + 4.0 * s.eval(0.5 * (s.start + s.end)) + s.eval(s.end));
        let want: f64 = p.segments().iter().map(simpson).sum::<f64>() / 5.0;
        assert!((p.mean() - want).abs() < 1e-13);
    }

    #[test]
    fn tiling_checked() {
        let bad = vec![
            Segment { start: 0.0, end: 1.0, coeffs: vec![0.0] },
            Segment { start: 1.5, end: 2.0, coeffs: vec![0.0] },
        ];
        assert!(PiecewisePoly::new(bad).is_err());
        assert!(PiecewisePoly::new(vec![Segment { start: 0.5, end: 1.0, coeffs: vec![0.0] }]).is_err());
    }

    #[test]
    fn segment_count_law() {
        for (gamma, horizon, want) in [(0.0, 5.0, 1), (0.2, 5.0, 1), (2.0, 3.0, 6), (2.0, 3.1, 7), (0.7, 10.0, 7)] {
            let plan = plan_interpolation(horizon, gamma, 1.0, 0.01, 0.05, 1, 4.0).unwrap();
            assert_eq!(plan.segments, want);
        }
        let plan = plan_interpolation(3.0, 2.0, 1.0, 0.01, 0.05, 1, 4.0).unwrap();
        assert_eq!(plan.degree, 7);
    }

    #[test]
    fn one_query_per_time() {
        let mut calls = 0usize;
        let mut sampler = FnSampler {
            candidates: 50,
            f: |t: f64| {
                calls += 1;
                (0..50).map(|i| (t * i as f64 * 0.01).sin()).collect()
            },
        };
        let config = InterpolationConfig {
            norm_bounds: vec![1.0; 50],
            fit: FitOptions::default(),
            seed: 1,
        };
        let (polys, plan) = piecewise_interpolate(&mut sampler, 2.0, &GammaEstimate::fixed(1.0), 0.05, 0.1, &config).unwrap();
        assert_eq!(polys.len(), 50);
        assert_eq!(calls, plan.segments * plan.samples_per_segment);
    }

    #[test]
    fn grid_path() {
        assert_eq!(grid_deviation(&[1.0, 1.0, 4.0]), Some((2.0, 2)));
        assert_eq!(grid_deviation(&[]), None);
    }
}
