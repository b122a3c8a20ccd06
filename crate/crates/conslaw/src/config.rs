//! Experiment configuration: JSON on disk, validated before anything runs.

use std::path::{Path, PathBuf};

use conslaw_core::dynamics::{Dynamics, HamiltonianSpec};
use conslaw_core::models::{add_dephasing, build_xxz, build_z2_gauge, sample_disorder, Z2Params};
use conslaw_core::pauli::{enumerate_local_paulis, windows, PauliBasisSet, PauliString};
use conslaw_core::shadow::NoiseMode;
use conslaw_core::{Boundary, DENSE_CAP, LINDBLAD_CAP};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub basis: BasisConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub learn: LearnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub oracles: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads; all available cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryConfig {
    Open,
    Periodic,
}

impl From<BoundaryConfig> for Boundary {
    fn from(b: BoundaryConfig) -> Self {
        match b {
            BoundaryConfig::Open => Boundary::Open,
            BoundaryConfig::Periodic => Boundary::Periodic,
        }
    }
}

fn periodic() -> BoundaryConfig {
    BoundaryConfig::Periodic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelConfig {
    Z2(Z2Model),
    Xxz(XxzModel),
    Custom(CustomModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Z2Model {
    pub n: usize,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "three_halves")]
    pub field: f64,
    #[serde(default = "one_third")]
    pub spacing: f64,
    #[serde(default = "periodic")]
    pub boundary: BoundaryConfig,
    /// Dephasing rate; 0 keeps the dynamics closed.
    #[serde(default)]
    pub gamma: f64,
}

impl Z2Model {
    pub fn params(&self) -> Z2Params {
        Z2Params {
            n: self.n,
            mass: self.mass,
            field: self.field,
            spacing: self.spacing,
            periodic: self.boundary == BoundaryConfig::Periodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct XxzModel {
    pub n: usize,
    #[serde(default = "one")]
    pub jx: f64,
    #[serde(default = "one")]
    pub jz: f64,
    /// Disorder strength: fields uniform on `[-w, w]`.
    #[serde(default)]
    pub w: f64,
    #[serde(default)]
    pub disorder_seed: u64,
    #[serde(default = "periodic")]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub n: usize,
    /// `(coefficient, label)` pairs, labels like `"XZI"`.
    pub terms: Vec<(f64, String)>,
    #[serde(default = "periodic")]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub gamma: f64,
}

fn one() -> f64 {
    1.0
}

fn three_halves() -> f64 {
    1.5
}

fn one_third() -> f64 {
    1.0 / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Horizon `T`; times are `N_T` equally spaced points on `[0, T]`.
    pub t_max: f64,
    pub n_t: usize,
    pub n_i: usize,
    /// Seed for initial states.
    pub seed: u64,
}

impl GridConfig {
    pub fn times(&self) -> Vec<f64> {
        if self.n_t == 1 {
            return vec![0.0];
        }
        (0..self.n_t)
            .map(|j| self.t_max * (j as f64 / (self.n_t - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub k: usize,
    /// Subsystems to learn on separately; the full chain when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<Vec<usize>>,
    /// Adds every window of this width as a region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    None,
    Gaussian,
    Covariant,
    Shots,
}

impl NoiseKind {
    pub fn mode(self) -> Option<NoiseMode> {
        match self {
            NoiseKind::None => None,
            NoiseKind::Gaussian => Some(NoiseMode::GaussianIndependent),
            NoiseKind::Covariant => Some(NoiseMode::GaussianCovariant),
            NoiseKind::Shots => Some(NoiseMode::ExactShots),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub mode: NoiseKind,
    /// Measurements per (state, time) cell.
    #[serde(default = "default_m")]
    pub m: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_m() -> u64 {
    100_000
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            mode: NoiseKind::None,
            m: default_m(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    /// Truncation threshold on the singular values.
    pub epsilon: f64,
    /// Independent noise repetitions (odd) for the median count.
    #[serde(default = "one_usize")]
    pub repeats: usize,
    /// Divide `W` by `√(N_T N_I)` before thresholding.
    #[serde(default)]
    pub normalize: bool,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Piecewise interpolation; when off, only the grid statistic is reported.
    #[serde(default = "yes")]
    pub interpolate: bool,
    #[serde(default = "default_c2")]
    pub c2: f64,
    /// Initial state the single-state test runs on.
    #[serde(default)]
    pub initial: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> f64 {
    0.05
}

fn default_c2() -> f64 {
    4.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub w: Vec<f64>,
    pub n: Vec<usize>,
    pub realizations: usize,
    /// Initial states per chain size, parallel to `n`; `⌈2 N_P / N_T⌉` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_i: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "yes")]
    pub commutant: bool,
    #[serde(default)]
    pub exact_null: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            commutant: true,
            exact_null: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_dir(),
            formats: all_formats(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Parses and validates; errors carry the JSON path of the offending field.
pub fn parse_config(text: &str) -> RunResult<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        RunError::config(path, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

/// JSON Schema for the configuration file.
pub fn config_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
}

pub fn load_config(path: &Path) -> RunResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    parse_config(&text)
}

fn check(cond: bool, path: &str, message: impl FnOnce() -> String) -> RunResult<()> {
    if cond {
        Ok(())
    } else {
        Err(RunError::config(path, message()))
    }
}

fn positive(x: f64, path: &str) -> RunResult<()> {
    check(x > 0.0 && x.is_finite(), path, || format!("{x} must be positive and finite"))
}

impl ModelConfig {
    pub fn n(&self) -> usize {
        match self {
            ModelConfig::Z2(m) => m.n,
            ModelConfig::Xxz(m) => m.n,
            ModelConfig::Custom(m) => m.n,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            ModelConfig::Z2(m) => m.gamma,
            ModelConfig::Xxz(m) => m.gamma,
            ModelConfig::Custom(m) => m.gamma,
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self {
            ModelConfig::Z2(m) => m.boundary.into(),
            ModelConfig::Xxz(m) => m.boundary.into(),
            ModelConfig::Custom(m) => m.boundary.into(),
        }
    }

    pub fn hamiltonian(&self) -> conslaw_core::Result<HamiltonianSpec> {
        match self {
            ModelConfig::Z2(m) => build_z2_gauge(m.params()),
            ModelConfig::Xxz(m) => {
                let dis = sample_disorder(m.w, m.n, m.disorder_seed)?;
                build_xxz(m.n, m.jx, m.jz, &dis, m.boundary.into())
            }
            ModelConfig::Custom(m) => {
                let terms = m
                    .terms
                    .iter()
                    .map(|(c, s)| {
                        s.parse::<PauliString>()
                            .map(|p| (*c, p))
                            .map_err(|_| conslaw_core::Error::InvalidParameter(format!("bad Pauli label {s:?}")))
                    })
                    .collect::<conslaw_core::Result<Vec<_>>>()?;
                HamiltonianSpec::new(m.n, terms)
            }
        }
    }

    pub fn z2_params(&self) -> Option<Z2Params> {
        match self {
            ModelConfig::Z2(m) => Some(m.params()),
            _ => None,
        }
    }

    /// The generator, open when `γ > 0`.
    pub fn dynamics(&self) -> conslaw_core::Result<Dynamics> {
        let h = self.hamiltonian()?;
        if self.gamma() > 0.0 {
            Ok(add_dephasing(&h, self.gamma())?.into())
        } else {
            Ok(h.into())
        }
    }

    /// The same model at another size and disorder strength.
    pub fn with_size_and_disorder(&self, n: usize, w: f64, disorder_seed: u64) -> ModelConfig {
        match self {
            ModelConfig::Xxz(m) => ModelConfig::Xxz(XxzModel {
                n,
                w,
                disorder_seed,
                ..m.clone()
            }),
            other => other.clone(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> RunResult<()> {
        let n = self.model.n();
        let cap = if self.model.gamma() > 0.0 { LINDBLAD_CAP } else { DENSE_CAP };
        check((1..=cap).contains(&n), "model.n", || format!("{n} qubits outside 1..={cap}"))?;
        check(self.model.gamma() >= 0.0 && self.model.gamma().is_finite(), "model.gamma", || {
            format!("dephasing rate {} must be >= 0", self.model.gamma())
        })?;
        match &self.model {
            ModelConfig::Z2(m) => {
                check(m.n >= 4 && m.n % 2 == 0, "model.n", || format!("Z2 chain needs even N >= 4, got {}", m.n))?;
                positive(m.spacing, "model.spacing")?;
            }
            ModelConfig::Xxz(m) => {
                check(m.n >= 2, "model.n", || format!("XXZ chain needs N >= 2, got {}", m.n))?;
                check(m.w >= 0.0 && m.w.is_finite(), "model.w", || format!("disorder {} must be >= 0", m.w))?;
            }
            ModelConfig::Custom(m) => {
                check(!m.terms.is_empty(), "model.terms", || "no Hamiltonian terms".into())?;
                for (i, (c, s)) in m.terms.iter().enumerate() {
                    let path = format!("model.terms[{i}]");
                    check(c.is_finite(), &path, || format!("coefficient {c} is not finite"))?;
                    let p: PauliString = s.parse().map_err(|_| RunError::config(&path, format!("bad Pauli label {s:?}")))?;
                    check(p.num_sites() == m.n, &path, || format!("{s:?} has {} sites, model has {}", p.num_sites(), m.n))?;
                }
            }
        }
        positive(self.grid.t_max, "grid.t_max")?;
        check(self.grid.n_t >= 2, "grid.n_t", || format!("learning needs N_T >= 2, got {}", self.grid.n_t))?;
        check(self.grid.n_i >= 1, "grid.n_i", || "need at least one initial state".into())?;
        check((1..=n).contains(&self.basis.k), "basis.k", || format!("locality {} outside 1..={n}", self.basis.k))?;
        for (i, r) in self.basis.regions.iter().enumerate() {
            let path = format!("basis.regions[{i}]");
            check(!r.is_empty(), &path, || "empty region".into())?;
            check(r.iter().all(|&q| q < n), &path, || format!("sites must be < {n}"))?;
        }
        if let Some(w) = self.basis.windows {
            check((1..=n).contains(&w), "basis.windows", || format!("window width {w} outside 1..={n}"))?;
        }
        if self.noise.mode != NoiseKind::None {
            check(self.noise.m >= 1, "noise.m", || "M must be at least 1".into())?;
        }
        positive(self.learn.epsilon, "learn.epsilon")?;
        check(self.learn.repeats % 2 == 1, "learn.repeats", || {
            format!("the median needs an odd number of repeats, got {}", self.learn.repeats)
        })?;
        if let Some(t) = &self.test {
            positive(t.epsilon, "test.epsilon")?;
            check(t.delta > 0.0 && t.delta < 1.0, "test.delta", || format!("{} must lie in (0, 1)", t.delta))?;
            positive(t.c2, "test.c2")?;
            check(t.initial < self.grid.n_i, "test.initial", || {
                format!("initial state {} but only {} drawn", t.initial, self.grid.n_i)
            })?;
        }
        if let Some(s) = &self.sweep {
            check(matches!(self.model, ModelConfig::Xxz(_)), "sweep", || "sweeps need an xxz model".into())?;
            check(!s.w.is_empty(), "sweep.w", || "no disorder strengths".into())?;
            check(!s.n.is_empty(), "sweep.n", || "no chain sizes".into())?;
            check(s.realizations >= 1, "sweep.realizations", || "need at least one realization".into())?;
            for (i, w) in s.w.iter().enumerate() {
                check(*w >= 0.0 && w.is_finite(), &format!("sweep.w[{i}]"), || format!("{w} must be >= 0"))?;
            }
            for (i, &size) in s.n.iter().enumerate() {
                check((2..=cap).contains(&size) && self.basis.k <= size, &format!("sweep.n[{i}]"), || {
                    format!("chain size {size} outside {}..={cap}", self.basis.k.max(2))
                })?;
            }
            if let Some(ni) = &s.n_i {
                check(ni.len() == s.n.len(), "sweep.n_i", || "must be parallel to sweep.n".into())?;
            }
        }
        if let Some(t) = self.threads {
            check(t >= 1, "threads", || "need at least one thread".into())?;
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn basis(&self) -> conslaw_core::Result<PauliBasisSet> {
        enumerate_local_paulis(self.model.n(), self.basis.k, self.model.boundary())
    }

    /// Explicit regions followed by the sliding windows.
    pub fn regions(&self) -> Vec<Vec<usize>> {
        let mut out = self.basis.regions.clone();
        if let Some(w) = self.basis.windows {
            out.extend(windows(self.model.n(), w, self.model.boundary()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"type": "z2", "n": 6},
        "grid": {"t_max": 5.0, "n_t": 11, "n_i": 2, "seed": 7},
        "basis": {"k": 3},
        "learn": {"epsilon": 1e-6}
    }"#;

    #[test]
    fn minimal_config_with_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.model.n(), 6);
        assert_eq!(c.model.boundary(), Boundary::Periodic);
        assert_eq!(c.noise.mode, NoiseKind::None);
        assert_eq!(c.learn.repeats, 1);
        assert!(c.oracles.commutant);
        let t = c.times();
        assert_eq!(t.len(), 11);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[10], 5.0);
        assert!(c.model.dynamics().is_ok());
    }

    #[test]
    fn errors_carry_json_paths() {
        let bad = MINIMAL.replace("\"n_t\": 11", "\"n_t\": \"many\"");
        match parse_config(&bad).unwrap_err() {
            RunError::Config { path, .. } => assert_eq!(path, "grid.n_t"),
            e => panic!("{e}"),
        }
        let unknown = MINIMAL.replace("\"k\": 3", "\"k\": 3, \"radius\": 1");
        match parse_config(&unknown).unwrap_err() {
            RunError::Config { path, message } => {
                assert!(path.starts_with("basis"), "{path}");
                assert!(message.contains("radius"));
            }
            e => panic!("{e}"),
        }
        let semantic = MINIMAL.replace("\"n_t\": 11", "\"n_t\": 1");
        match parse_config(&semantic).unwrap_err() {
            RunError::Config { path, .. } => assert_eq!(path, "grid.n_t"),
            e => panic!("{e}"),
        }
        let even = MINIMAL.replace("\"epsilon\": 1e-6", "\"epsilon\": 1e-6, \"repeats\": 4");
        assert_eq!(parse_config(&even).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn custom_labels_checked() {
        let text = MINIMAL.replace(
            r#"{"type": "z2", "n": 6}"#,
            r#"{"type": "custom", "n": 2, "terms": [[1.0, "ZZ"], [0.5, "XQ"]]}"#,
        );
        match parse_config(&text.replace("\"k\": 3", "\"k\": 2")).unwrap_err() {
            RunError::Config { path, .. } => assert_eq!(path, "model.terms[1]"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn windows_expand_to_regions() {
        let text = MINIMAL.replace("\"k\": 3", "\"k\": 3, \"windows\": 3");
        let c = parse_config(&text).unwrap();
        let r = c.regions();
        assert_eq!(r.len(), 6);
        assert_eq!(r[5], vec![5, 0, 1]);
    }

    #[test]
    fn round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        let again = parse_config(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn published_schema_is_current() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/experiment.schema.json");
        let text = serde_json::to_string_pretty(&config_schema()).unwrap() + "\n";
        if std::env::var_os("CONSLAW_WRITE_SCHEMA").is_some() {
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_default();
        assert!(on_disk == text, "stale schema; rerun with CONSLAW_WRITE_SCHEMA=1");
    }

    proptest::proptest! {
        #[test]
        fn valid_configs_round_trip(
            n in 2usize..6,
            k in 1usize..3,
            t_max in 0.1f64..100.0,
            n_t in 2usize..50,
            n_i in 1usize..20,
            seed: u64,
            epsilon in 1e-12f64..1.0,
            repeats in 0usize..4,
            m in 1u64..10_000_000,
        ) {
            let mut c = parse_config(MINIMAL).unwrap();
            c.model = ModelConfig::Xxz(XxzModel {
                n,
                jx: 1.0,
                jz: 0.5,
                w: 2.0,
                disorder_seed: seed,
                boundary: BoundaryConfig::Open,
                gamma: 0.0,
            });
            c.basis.k = k.min(n);
            c.grid = GridConfig { t_max, n_t, n_i, seed };
            c.learn.epsilon = epsilon;
            c.learn.repeats = 2 * repeats + 1;
            c.noise = NoiseConfig { mode: NoiseKind::Gaussian, m, seed };
            c.validate().unwrap();
            let again = parse_config(&serde_json::to_string(&c).unwrap()).unwrap();
            proptest::prop_assert_eq!(&c, &again);
            let times = again.times();
            proptest::prop_assert_eq!(times.len(), n_t);
            proptest::prop_assert_eq!(*times.last().unwrap(), t_max);
        }
    }
}
