//! The experiment driver: simulate, add noise, center, decompose, take the
//! median over repeats, optionally test, run the oracles and write reports.

use std::path::Path;
use std::time::Instant;

use conslaw_core::data::DataMatrix;
use conslaw_core::dynamics::{expectation_column, Dynamics, HamiltonianSpec, PreparedDynamics, StateVector};
use conslaw_core::models::{random_product_state_at, z2_known_conserved};
use conslaw_core::oracle::{commutant_oracle, exact_null_oracle, NullSpace};
use conslaw_core::pauli::PauliBasisSet;
use conslaw_core::rng::{self, Domain};
use conslaw_core::shadow::{noisy_column, NoiseModel};
use conslaw_core::spectral::{center, median_null_dim, restrict_subsystem, span_residual, svd_analyze, SpectralReport};
use conslaw_core::tester::{
    gamma_bound, grid_deviation, test_candidates, FitOptions, InterpolationConfig, SeriesSampler, TimeSample,
};
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, LearnConfig, ModelConfig, NoiseConfig, TestConfig};
use crate::error::{AtStage, RunError, RunResult, Stage};
use crate::formats::{
    self, candidate_rows, count_rows, median_counts, spectrum_rows, CountRecord, GridRecord, ManifestEntry, OutputSink,
    SpectrumRecord, VerdictRecord, CANDIDATE_HEADER,
};
use crate::plots;

/// Exact and noisy data for one model.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub exact: DataMatrix,
    /// One noisy copy per repeat; a single exact copy when noise is off.
    pub noisy: Vec<DataMatrix>,
    pub initials: Vec<StateVector>,
}

pub fn initial_states(n: usize, seed: u64, count: usize) -> RunResult<Vec<StateVector>> {
    (0..count)
        .map(|k| random_product_state_at(n, seed, k as u64))
        .collect::<conslaw_core::Result<_>>()
        .at(Stage::Simulate)
}

/// One noise model per repeat; repeat `r` uses seed `noise.seed + r`.
pub fn noise_models(noise: &NoiseConfig, repeats: usize) -> RunResult<Vec<NoiseModel>> {
    let Some(mode) = noise.mode.mode() else {
        return Ok(Vec::new());
    };
    (0..repeats)
        .map(|r| NoiseModel::new(mode, noise.m, noise.seed.wrapping_add(r as u64)))
        .collect::<conslaw_core::Result<_>>()
        .at(Stage::Noise)
}

type Block = Vec<Vec<f64>>;

/// Evolves every initial state and draws each noise model's columns while
/// the evolved states are at hand. Blocks run in parallel on the current
/// rayon pool; results do not depend on scheduling.
pub fn simulate(
    model: &Dynamics,
    initials: Vec<StateVector>,
    times: &[f64],
    basis: &PauliBasisSet,
    noise: &[NoiseModel],
) -> RunResult<Simulation> {
    let prepared = PreparedDynamics::new(model).at(Stage::Simulate)?;
    let blocks: Vec<(Block, Vec<Block>)> = initials
        .par_iter()
        .enumerate()
        .map(|(k, psi)| {
            let states = prepared.states(psi, times).at(Stage::Simulate)?;
            let exact: Block = states
                .iter()
                .map(|s| expectation_column(s, basis))
                .collect::<conslaw_core::Result<_>>()
                .at(Stage::Simulate)?;
            let noisy = noise
                .iter()
                .map(|nm| {
                    states
                        .iter()
                        .zip(&exact)
                        .enumerate()
                        .map(|(j, (s, col))| noisy_column(nm, basis, col, Some(s), k, j))
                        .collect::<conslaw_core::Result<Block>>()
                })
                .collect::<conslaw_core::Result<Vec<_>>>()
                .at(Stage::Noise)?;
            Ok((exact, noisy))
        })
        .collect::<RunResult<_>>()?;
    let exact_blocks: Vec<Block> = blocks.iter().map(|b| b.0.clone()).collect();
    let exact = DataMatrix::from_blocks(basis.clone(), times.to_vec(), &exact_blocks).at(Stage::Simulate)?;
    let noisy = if noise.is_empty() {
        vec![exact.clone()]
    } else {
        (0..noise.len())
            .map(|r| {
                let b: Vec<Block> = blocks.iter().map(|blk| blk.1[r].clone()).collect();
                DataMatrix::from_blocks(basis.clone(), times.to_vec(), &b)
            })
            .collect::<conslaw_core::Result<_>>()
            .at(Stage::Noise)?
    };
    Ok(Simulation { exact, noisy, initials })
}

/// Spectral analysis of one region across all repeats.
#[derive(Debug, Clone)]
pub struct RegionResult {
    /// `None` for the whole chain.
    pub region: Option<Vec<usize>>,
    pub reports: Vec<SpectralReport>,
    pub median_null: usize,
}

pub fn learn(sim: &Simulation, region: Option<&[usize]>, cfg: &LearnConfig) -> RunResult<RegionResult> {
    let reports = sim
        .noisy
        .iter()
        .map(|x| {
            let data = match region {
                Some(r) => restrict_subsystem(x, r).at(Stage::Center)?,
                None => x.clone(),
            };
            let mut w = center(&data).at(Stage::Center)?;
            if cfg.normalize {
                w = w.normalized();
            }
            svd_analyze(&w, cfg.epsilon).at(Stage::Svd)
        })
        .collect::<RunResult<Vec<_>>>()?;
    let median_null = median_null_dim(&reports).at(Stage::Median)?;
    Ok(RegionResult {
        region: region.map(<[usize]>::to_vec),
        reports,
        median_null,
    })
}

/// Expectations of the candidate operators along exact dynamics, with
/// Gaussian shot noise of the shadow variance when `m` is set.
struct ModelSampler<'a> {
    prepared: PreparedDynamics,
    initial: &'a StateVector,
    basis: &'a PauliBasisSet,
    coeffs: Vec<DVector<f64>>,
    m: Option<f64>,
    seed: u64,
    calls: u64,
}

impl SeriesSampler for ModelSampler<'_> {
    fn num_candidates(&self) -> usize {
        self.coeffs.len()
    }

    fn sample(&mut self, t: f64) -> conslaw_core::Result<TimeSample> {
        let state = self.prepared.states(self.initial, &[t])?.remove(0);
        let x = DVector::from_vec(expectation_column(&state, self.basis)?);
        let mut r = rng::stream(self.seed, Domain::Sampler, self.calls, 0);
        self.calls += 1;
        let mut estimates = Vec::with_capacity(self.coeffs.len());
        let mut error_scale = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let mean = c.dot(&x);
            let sd = match self.m {
                Some(m) => {
                    let var: f64 = c
                        .iter()
                        .zip(x.iter())
                        .zip(self.basis.elements())
                        .map(|((ci, xi), p)| ci * ci * (3f64.powi(p.weight() as i32) - xi * xi).max(0.0))
                        .sum();
                    (var / m).sqrt()
                }
                None => 0.0,
            };
            let g: f64 = StandardNormal.sample(&mut r);
            estimates.push(mean + sd * g);
            error_scale.push(sd);
        }
        Ok(TimeSample { t, estimates, error_scale })
    }
}

/// Grid statistics for every candidate and, when enabled, interpolated
/// verdicts on initial state `cfg.initial`.
pub fn test_stage(
    model: &Dynamics,
    sim: &Simulation,
    report: &SpectralReport,
    cfg: &TestConfig,
    noise: &NoiseConfig,
    horizon: f64,
) -> RunResult<(Vec<VerdictRecord>, Vec<GridRecord>)> {
    if report.candidates.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let x = &sim.noisy[0];
    let nt = x.n_times();
    let cols = x.column_index(cfg.initial, 0)..x.column_index(cfg.initial, 0) + nt;
    let block = x.values().columns(cols.start, nt);
    let grid = report
        .candidates
        .iter()
        .map(|c| {
            let series: Vec<f64> = (0..nt).map(|j| c.coefficients.dot(&block.column(j))).collect();
            let (d, j) = grid_deviation(&series)
                .ok_or_else(|| conslaw_core::Error::EmptyResult("empty time series".into()))
                .at(Stage::Test)?;
            Ok(GridRecord {
                candidate: c.label,
                statistic: d,
                witness_time: x.times()[j],
            })
        })
        .collect::<RunResult<Vec<_>>>()?;
    if !cfg.interpolate {
        return Ok((Vec::new(), grid));
    }
    let h: &HamiltonianSpec = model.hamiltonian();
    let gamma = gamma_bound(h, h.terms().max_weight().max(1)).at(Stage::Test)?;
    let coeffs: Vec<DVector<f64>> = report.candidates.iter().map(|c| c.coefficients.clone()).collect();
    let config = InterpolationConfig {
        norm_bounds: coeffs.iter().map(|c| c.iter().map(|v| v.abs()).sum()).collect(),
        fit: FitOptions {
            c2: cfg.c2,
            ..FitOptions::default()
        },
        seed: cfg.seed,
    };
    let mut sampler = ModelSampler {
        prepared: PreparedDynamics::new(model).at(Stage::Test)?,
        initial: &sim.initials[cfg.initial],
        basis: &report.basis,
        coeffs,
        m: noise.mode.mode().map(|_| noise.m as f64),
        seed: cfg.seed,
        calls: 0,
    };
    let verdicts = test_candidates(&mut sampler, horizon, &gamma, cfg.epsilon, cfg.delta, &config).at(Stage::Test)?;
    let records = report
        .candidates
        .iter()
        .zip(&verdicts)
        .map(|(c, v)| VerdictRecord::new(c.label, v))
        .collect();
    Ok((records, grid))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedResidual {
    pub name: String,
    /// Residual against the learned candidate span.
    pub learned: f64,
    pub commutant: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct OracleResult {
    pub commutant: Option<NullSpace>,
    pub exact_null: Option<NullSpace>,
    pub named: Vec<NamedResidual>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub commutant_dimension: Option<usize>,
    pub exact_null_dimension: Option<usize>,
    pub named: Vec<NamedResidual>,
}

impl OracleResult {
    pub fn summary(&self) -> OracleSummary {
        OracleSummary {
            commutant_dimension: self.commutant.as_ref().map(|n| n.dimension),
            exact_null_dimension: self.exact_null.as_ref().map(|n| n.dimension),
            named: self.named.clone(),
        }
    }
}

pub fn oracle_stage(
    config: &ExperimentConfig,
    model: &Dynamics,
    basis: &PauliBasisSet,
    sim: Option<&Simulation>,
    learned: Option<&SpectralReport>,
) -> RunResult<OracleResult> {
    let mut out = OracleResult::default();
    if config.oracles.commutant {
        out.commutant = Some(commutant_oracle(model, basis).at(Stage::Oracles)?);
    }
    if config.oracles.exact_null {
        let initials = match sim {
            Some(s) => s.initials.clone(),
            None => initial_states(config.model.n(), config.grid.seed, config.grid.n_i)?,
        };
        out.exact_null = Some(exact_null_oracle(model, &initials, &config.times(), basis).at(Stage::Oracles)?);
    }
    if let (ModelConfig::Z2(m), Some(report)) = (&config.model, learned) {
        let known = z2_known_conserved(m.params()).at(Stage::Oracles)?;
        for (name, op) in &known.entries {
            // named operators the basis cannot express are skipped
            if op.terms().iter().any(|(_, p)| basis.index_of(p).is_none()) {
                continue;
            }
            let c = op.coefficients_in(basis).at(Stage::Oracles)?;
            out.named.push(NamedResidual {
                name: name.clone(),
                learned: span_residual(&c, &report.candidate_span()),
                commutant: out.commutant.as_ref().map(|n| span_residual(&c, &n.vectors)),
            });
        }
    }
    Ok(out)
}

/// Everything a run produced, in memory.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub n_p: usize,
    /// The whole chain first, then each configured region.
    pub regions: Vec<RegionResult>,
    pub verdicts: Vec<VerdictRecord>,
    pub grid_tests: Vec<GridRecord>,
    pub oracles: OracleResult,
    pub counts: Vec<CountRecord>,
    /// Wall-clock seconds per stage.
    pub timings: Vec<(Stage, f64)>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    fn new(config: &ExperimentConfig, n_p: usize) -> Self {
        RunReport {
            config: config.clone(),
            n_p,
            regions: Vec::new(),
            verdicts: Vec::new(),
            grid_tests: Vec::new(),
            oracles: OracleResult::default(),
            counts: Vec::new(),
            timings: Vec::new(),
            manifest: Vec::new(),
        }
    }

    pub fn full(&self) -> Option<&RegionResult> {
        self.regions.iter().find(|r| r.region.is_none())
    }

    pub fn spectra(&self) -> Vec<SpectrumRecord> {
        let oracle_dim = self.oracles.commutant.as_ref().map(|n| n.dimension);
        self.regions
            .iter()
            .map(|r| {
                let dim = if r.region.is_none() { oracle_dim } else { None };
                SpectrumRecord::from_report(&r.reports[0], r.region.clone(), self.config.learn.normalize, r.median_null, dim)
            })
            .collect()
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a ExperimentConfig,
    n_p: usize,
    spectra: Vec<SpectrumRecord>,
    verdicts: &'a [VerdictRecord],
    grid_tests: &'a [GridRecord],
    oracles: OracleSummary,
    counts: Vec<CountSummary>,
    files: &'a [ManifestEntry],
}

#[derive(Serialize)]
struct CountSummary {
    n: usize,
    w: f64,
    count: usize,
}

#[derive(Serialize)]
struct FailureFile<'a> {
    stage: Stage,
    exit_code: i32,
    message: String,
    completed: &'a [(Stage, f64)],
}

/// Which stages [`run_experiment`] executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Learn,
    Test,
    Oracle,
    Scan,
}

struct Clock {
    timings: Vec<(Stage, f64)>,
}

impl Clock {
    fn time<T>(&mut self, stage: Stage, f: impl FnOnce() -> RunResult<T>) -> RunResult<T> {
        let start = Instant::now();
        let out = f()?;
        self.timings.push((stage, start.elapsed().as_secs_f64()));
        Ok(out)
    }
}

fn region_tag(region: &Option<Vec<usize>>) -> String {
    match region {
        None => "full".into(),
        Some(r) => r.iter().map(usize::to_string).collect::<Vec<_>>().join("-"),
    }
}

fn write_learning(sink: &OutputSink, config: &ExperimentConfig, report: &RunReport) -> RunResult<()> {
    let spectra = report.spectra();
    for (r, rec) in report.regions.iter().zip(&spectra) {
        let tag = region_tag(&r.region);
        if config.output.wants(Format::Csv) {
            let (header, rows) = spectrum_rows(&r.reports);
            sink.write_csv(&format!("spectrum_{tag}.csv"), &header, &rows)?;
            sink.write_csv(&format!("candidates_{tag}.csv"), &CANDIDATE_HEADER, &candidate_rows(&rec.candidates))?;
        }
        if config.output.wants(Format::Json) {
            sink.write_json(&format!("candidates_{tag}.json"), rec)?;
        }
        if config.output.wants(Format::Svg) {
            let title = format!("{}: singular values ({tag})", config.name);
            sink.write_bytes(
                &format!("spectrum_{tag}.svg"),
                plots::spectrum_svg(&title, &rec.singular_values, Some(rec.epsilon)).as_bytes(),
            )?;
        }
    }
    Ok(())
}

fn write_counts(sink: &OutputSink, config: &ExperimentConfig, counts: &[CountRecord]) -> RunResult<()> {
    let medians = median_counts(counts);
    if config.output.wants(Format::Csv) {
        sink.write_csv("counts.csv", &["N", "w", "count"], &count_rows(&medians))?;
        let rows: Vec<Vec<String>> = counts
            .iter()
            .map(|c| vec![c.n.to_string(), c.w.to_string(), c.realization.to_string(), c.count.to_string()])
            .collect();
        sink.write_csv("counts_realizations.csv", &["N", "w", "realization", "count"], &rows)?;
    }
    if config.output.wants(Format::Svg) {
        let mut sizes: Vec<usize> = medians.iter().map(|m| m.0).collect();
        sizes.dedup();
        let series: Vec<(usize, Vec<(f64, usize)>)> = sizes
            .iter()
            .map(|&n| (n, medians.iter().filter(|m| m.0 == n).map(|m| (m.1, m.2)).collect()))
            .collect();
        let title = format!("{}: conserved-quantity count", config.name);
        sink.write_bytes("counts.svg", plots::counts_svg(&title, &series).as_bytes())?;
    }
    Ok(())
}

fn finish(sink: &OutputSink, report: &mut RunReport) -> RunResult<()> {
    if report.config.output.wants(Format::Json) {
        if !report.verdicts.is_empty() || !report.grid_tests.is_empty() {
            sink.write_json("verdicts.json", &report.verdicts)?;
            sink.write_json("grid_tests.json", &report.grid_tests)?;
        }
        sink.write_json("oracles.json", &report.oracles.summary())?;
    }
    sink.write_json("timings.json", &report.timings.iter().map(|(s, t)| (s.to_string(), *t)).collect::<Vec<_>>())?;
    let files = formats::scan_manifest(sink.dir())?;
    let file = ReportFile {
        config: &report.config,
        n_p: report.n_p,
        spectra: report.spectra(),
        verdicts: &report.verdicts,
        grid_tests: &report.grid_tests,
        oracles: report.oracles.summary(),
        counts: median_counts(&report.counts)
            .into_iter()
            .map(|(n, w, count)| CountSummary { n, w, count })
            .collect(),
        files: &files,
    };
    sink.write_json("report.json", &file)?;
    report.manifest = sink.write_manifest()?;
    Ok(())
}

fn thread_pool(threads: Option<usize>) -> RunResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| RunError::config("threads", e.to_string()))
}

/// Runs the configured pipeline. With `out` set, artifacts are written as
/// stages finish; a failure still leaves the completed stages, an
/// `error.json` and the manifest behind.
pub fn run_experiment(config: &ExperimentConfig, mode: Mode, out: Option<&Path>) -> RunResult<RunReport> {
    config.validate()?;
    let sink = out.map(OutputSink::create).transpose()?;
    let pool = thread_pool(config.threads)?;
    let mut clock = Clock { timings: Vec::new() };
    let result = pool.install(|| execute(config, mode, sink.as_ref(), &mut clock));
    match (result, sink) {
        (Ok(mut report), Some(sink)) => {
            report.timings = clock.timings;
            finish(&sink, &mut report)?;
            Ok(report)
        }
        (Ok(mut report), None) => {
            report.timings = clock.timings;
            Ok(report)
        }
        (Err(e), Some(sink)) => {
            let failure = FailureFile {
                stage: e.stage(),
                exit_code: e.exit_code(),
                message: e.to_string(),
                completed: &clock.timings,
            };
            // best effort: the original error matters more than a flush failure
            let _ = sink.write_json("error.json", &failure).and_then(|_| sink.write_manifest());
            Err(e)
        }
        (Err(e), None) => Err(e),
    }
}

fn execute(config: &ExperimentConfig, mode: Mode, sink: Option<&OutputSink>, clock: &mut Clock) -> RunResult<RunReport> {
    if mode == Mode::Scan {
        return scan(config, sink, clock);
    }
    let model = config.model.dynamics().at(Stage::Config)?;
    let basis = config.basis().at(Stage::Config)?;
    let mut report = RunReport::new(config, basis.len());
    if mode == Mode::Oracle {
        report.oracles = clock.time(Stage::Oracles, || oracle_stage(config, &model, &basis, None, None))?;
        if let Some(s) = sink {
            s.write_json("oracles.json", &report.oracles.summary())?;
        }
        return Ok(report);
    }
    let times = config.times();
    let initials = initial_states(config.model.n(), config.grid.seed, config.grid.n_i)?;
    let noise = noise_models(&config.noise, config.learn.repeats)?;
    let sim = clock.time(Stage::Simulate, || simulate(&model, initials, &times, &basis, &noise))?;
    let mut regions = vec![None];
    regions.extend(config.regions().into_iter().map(Some));
    report.regions = clock.time(Stage::Svd, || {
        regions.iter().map(|r| learn(&sim, r.as_deref(), &config.learn)).collect::<RunResult<Vec<_>>>()
    })?;
    if let Some(s) = sink {
        write_learning(s, config, &report)?;
    }
    if let (Mode::Test, Some(tc)) = (mode, &config.test) {
        let full = &report.regions[0].reports[0];
        let (v, g) = clock.time(Stage::Test, || test_stage(&model, &sim, full, tc, &config.noise, config.grid.t_max))?;
        report.verdicts = v;
        report.grid_tests = g;
    }
    let learned = &report.regions[0].reports[0];
    report.oracles = clock.time(Stage::Oracles, || oracle_stage(config, &model, &basis, Some(&sim), Some(learned)))?;
    if let Some(s) = sink {
        // rewrite with the gap ratio now that the oracle dimension is known
        write_learning(s, config, &report)?;
    }
    Ok(report)
}

/// Number of initial states for a sweep point: configured, or
/// `⌈2 N_P / N_T⌉`.
pub fn sweep_initials(config: &ExperimentConfig, size_index: usize, n_p: usize) -> usize {
    match config.sweep.as_ref().and_then(|s| s.n_i.as_ref()) {
        Some(ni) => ni[size_index],
        None => (2 * n_p).div_ceil(config.grid.n_t),
    }
}

/// One disorder realization: the count of singular values at or below
/// `learn.epsilon` on the whole chain.
pub fn sweep_point(config: &ExperimentConfig, size_index: usize, n: usize, w: f64, realization: usize) -> RunResult<CountRecord> {
    let ModelConfig::Xxz(base) = &config.model else {
        return Err(RunError::config("model.type", "sweeps need an xxz model"));
    };
    let r = realization as u64;
    let model_cfg = config.model.with_size_and_disorder(n, w, rng::mix64(base.disorder_seed ^ r));
    let model = model_cfg.dynamics().at(Stage::Config)?;
    let basis = conslaw_core::pauli::enumerate_local_paulis(n, config.basis.k, model_cfg.boundary()).at(Stage::Config)?;
    let n_i = sweep_initials(config, size_index, basis.len());
    let initials = initial_states(n, config.grid.seed.wrapping_add(r), n_i)?;
    let noise_cfg = NoiseConfig {
        seed: config.noise.seed.wrapping_add(r << 32),
        ..config.noise.clone()
    };
    let noise = noise_models(&noise_cfg, 1)?;
    let sim = simulate(&model, initials, &config.times(), &basis, &noise)?;
    let learn_cfg = LearnConfig {
        repeats: 1,
        ..config.learn.clone()
    };
    let res = learn(&sim, None, &learn_cfg)?;
    Ok(CountRecord {
        n,
        w,
        realization,
        count: res.reports[0].d_null_hat,
    })
}

fn scan(config: &ExperimentConfig, sink: Option<&OutputSink>, clock: &mut Clock) -> RunResult<RunReport> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::config("sweep", "scan needs a sweep block"))?;
    let mut points = Vec::new();
    for (si, &n) in sweep.n.iter().enumerate() {
        for &w in &sweep.w {
            for r in 0..sweep.realizations {
                points.push((si, n, w, r));
            }
        }
    }
    let counts = clock.time(Stage::Svd, || {
        points
            .par_iter()
            .map(|&(si, n, w, r)| sweep_point(config, si, n, w, r))
            .collect::<RunResult<Vec<_>>>()
    })?;
    if let Some(s) = sink {
        write_counts(s, config, &counts)?;
    }
    let mut report = RunReport::new(config, 0);
    report.counts = counts;
    Ok(report)
}
