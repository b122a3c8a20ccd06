//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use conslaw_core::spectral::{plan_samples, PlannerInput, Regime};
use conslaw_core::tester::{gamma_bound, plan_interpolation};
use serde::Serialize;

use crate::config::{load_config, ExperimentConfig};
use crate::error::{AtStage, RunError, RunResult, Stage};
use crate::formats::{self, float, read_csv, OutputSink};
use crate::pipeline::{initial_states, noise_models, run_experiment, simulate, Mode};
use crate::plots;

#[derive(Debug, Parser)]
#[command(name = "conslaw", version, about = "Learn and test conservation laws from simulated quantum dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Replaces every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "CONSLAW_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "CONSLAW_THREADS")]
    pub threads: Option<usize>,
    /// Validate the configuration and write the sample plan only.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the exact and noisy data matrices.
    Simulate,
    /// Learn candidate conservation laws.
    Learn,
    /// Learn, then test the candidates in continuous time.
    Test,
    /// Disorder sweep: counts below threshold per chain size and strength.
    Scan,
    /// Sample budgets for the configured sizes.
    Plan,
    /// Commutant and exact-null oracles only.
    Oracle,
    /// Redraw figures from the CSV files in the output directory.
    Report,
}

impl Common {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            config.grid.seed = s;
            config.noise.seed = s;
            if let Some(t) = config.test.as_mut() {
                t.seed = s;
            }
        }
        if let Some(t) = self.threads {
            config.threads = Some(t);
        }
        if let Some(o) = &self.out {
            config.output.directory = o.clone();
        }
    }

    fn load(&self) -> RunResult<ExperimentConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| RunError::config("", "--config is required for this command"))?;
        let mut c = load_config(path)?;
        self.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Serialize)]
pub struct RegimePlan {
    pub regime: &'static str,
    pub samples_per_cell: f64,
    pub repeats: u64,
    pub total: f64,
}

#[derive(Debug, Serialize)]
pub struct InterpolationSummary {
    pub gamma: f64,
    pub segments: usize,
    pub degree: usize,
    pub samples_per_segment: usize,
}

#[derive(Debug, Serialize)]
pub struct PlanReport {
    pub n_p: usize,
    pub n_t: usize,
    pub n_i: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub regimes: Vec<RegimePlan>,
    pub interpolation: Option<InterpolationSummary>,
}

/// Sample budgets from the shape of the configured experiment, without
/// simulating anything.
pub fn plan(config: &ExperimentConfig) -> RunResult<PlanReport> {
    let basis = config.basis().at(Stage::Config)?;
    let delta = config.test.as_ref().map_or(0.05, |t| t.delta);
    let regimes = [
        (Regime::Naive, "naive"),
        (Regime::ShadowWorst, "shadow_worst"),
        (Regime::ShadowLocal, "shadow_local"),
    ]
    .into_iter()
    .map(|(regime, name)| {
        let input = PlannerInput::new(basis.len(), config.grid.n_t, config.grid.n_i, config.learn.epsilon, delta, regime);
        let p = plan_samples(&input).at(Stage::Config)?;
        Ok(RegimePlan {
            regime: name,
            samples_per_cell: p.samples_per_cell,
            repeats: p.repeats,
            total: p.total,
        })
    })
    .collect::<RunResult<Vec<_>>>()?;
    let interpolation = match &config.test {
        Some(t) => {
            let h = config.model.hamiltonian().at(Stage::Config)?;
            let g = gamma_bound(&h, h.terms().max_weight().max(1)).at(Stage::Config)?;
            // worst case over unit-norm candidates in the basis
            let c_f = (basis.len() as f64).sqrt();
            let p = plan_interpolation(config.grid.t_max, g.gamma, c_f, t.epsilon / 8.0, t.delta, 1, t.c2).at(Stage::Config)?;
            Some(InterpolationSummary {
                gamma: g.gamma,
                segments: p.segments,
                degree: p.degree,
                samples_per_segment: p.samples_per_segment,
            })
        }
        None => None,
    };
    Ok(PlanReport {
        n_p: basis.len(),
        n_t: config.grid.n_t,
        n_i: config.grid.n_i,
        epsilon: config.learn.epsilon,
        delta,
        regimes,
        interpolation,
    })
}

fn write_data(sink: &OutputSink, name: &str, x: &conslaw_core::DataMatrix) -> RunResult<()> {
    let labels: Vec<String> = x.basis().elements().iter().map(|p| p.to_string()).collect();
    let mut rows = Vec::with_capacity(x.values().len());
    for k in 0..x.n_initials() {
        for (j, t) in x.times().iter().enumerate() {
            let c = x.column_index(k, j);
            for (i, l) in labels.iter().enumerate() {
                rows.push(vec![k.to_string(), float(*t), l.clone(), float(x.values()[(i, c)])]);
            }
        }
    }
    sink.write_csv(name, &["initial", "t", "pauli", "value"], &rows)?;
    Ok(())
}

fn simulate_command(config: &ExperimentConfig, out: &Path) -> RunResult<()> {
    let model = config.model.dynamics().at(Stage::Config)?;
    let basis = config.basis().at(Stage::Config)?;
    let initials = initial_states(config.model.n(), config.grid.seed, config.grid.n_i)?;
    let noise = noise_models(&config.noise, 1)?;
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        b = b.num_threads(t);
    }
    let pool = b.build().map_err(|e| RunError::config("threads", e.to_string()))?;
    let sim = pool.install(|| simulate(&model, initials, &config.times(), &basis, &noise))?;
    let sink = OutputSink::create(out)?;
    write_data(&sink, "data_exact.csv", &sim.exact)?;
    if !noise.is_empty() {
        write_data(&sink, "data_noisy.csv", &sim.noisy[0])?;
    }
    sink.write_manifest()?;
    Ok(())
}

/// Redraws `spectrum_*.svg` and `counts.svg` from their CSV files.
pub fn redraw(dir: &Path) -> RunResult<usize> {
    let sink = OutputSink::create(dir)?;
    let mut drawn = 0;
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| RunError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    names.sort();
    let parse = |path: &Path, s: &str| -> RunResult<f64> {
        s.parse().map_err(|_| RunError::Format {
            path: path.to_path_buf(),
            message: format!("not a number: {s:?}"),
        })
    };
    for name in &names {
        let path = dir.join(name);
        if let Some(tag) = name.strip_prefix("spectrum_").and_then(|s| s.strip_suffix(".csv")) {
            let (_, rows) = read_csv(&path)?;
            let sigma = rows.iter().map(|r| parse(&path, &r[1])).collect::<RunResult<Vec<_>>>()?;
            let svg = plots::spectrum_svg(&format!("singular values ({tag})"), &sigma, None);
            sink.write_bytes(&format!("spectrum_{tag}.svg"), svg.as_bytes())?;
            drawn += 1;
        }
    }
    let counts = dir.join("counts.csv");
    if counts.exists() {
        let (_, rows) = read_csv(&counts)?;
        let mut series: Vec<(usize, Vec<(f64, usize)>)> = Vec::new();
        for r in &rows {
            let n = parse(&counts, &r[0])? as usize;
            let point = (parse(&counts, &r[1])?, parse(&counts, &r[2])? as usize);
            match series.iter_mut().find(|s| s.0 == n) {
                Some(s) => s.1.push(point),
                None => series.push((n, vec![point])),
            }
        }
        sink.write_bytes("counts.svg", plots::counts_svg("conserved-quantity count", &series).as_bytes())?;
        drawn += 1;
    }
    sink.write_manifest()?;
    Ok(drawn)
}

pub fn run(cli: &Cli) -> RunResult<()> {
    if let Command::Report = cli.command {
        let dir = match (&cli.common.out, &cli.common.config) {
            (Some(o), _) => o.clone(),
            (None, Some(_)) => cli.common.load()?.output.directory,
            (None, None) => return Err(RunError::config("", "report needs --out or --config")),
        };
        let n = redraw(&dir)?;
        println!("redrew {n} figure(s) in {}", dir.display());
        return Ok(());
    }
    let config = cli.common.load()?;
    let out = config.output.directory.clone();
    if cli.common.dry_run || matches!(cli.command, Command::Plan) {
        let p = plan(&config)?;
        let sink = OutputSink::create(&out)?;
        sink.write_json("plan.json", &p)?;
        sink.write_manifest()?;
        println!("{}", serde_json::to_string_pretty(&p).expect("plan serializes"));
        return Ok(());
    }
    let mode = match cli.command {
        Command::Simulate => return simulate_command(&config, &out),
        Command::Learn => Mode::Learn,
        Command::Test => {
            if config.test.is_none() {
                return Err(RunError::config("test", "the test command needs a test block"));
            }
            Mode::Test
        }
        Command::Scan => Mode::Scan,
        Command::Oracle => Mode::Oracle,
        Command::Plan | Command::Report => unreachable!("handled above"),
    };
    let report = run_experiment(&config, mode, Some(&out))?;
    for r in &report.regions {
        let tag = r.region.as_ref().map_or("full".to_string(), |v| format!("{v:?}"));
        println!(
            "{tag}: N_P = {}, median D_null = {}",
            r.reports[0].basis.len(),
            r.median_null
        );
    }
    for v in &report.verdicts {
        println!("candidate {}: {} (statistic {:.3e})", v.candidate, v.outcome, v.statistic);
    }
    let s = report.oracles.summary();
    if let Some(d) = s.commutant_dimension {
        println!("commutant dimension {d}");
    }
    if let Some(d) = s.exact_null_dimension {
        println!("exact null dimension {d}");
    }
    for (n, w, c) in formats::median_counts(&report.counts) {
        println!("N = {n}, w = {w}: {c}");
    }
    println!("{} file(s) in {}", report.manifest.len(), out.display());
    Ok(())
}
