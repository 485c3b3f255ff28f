//! Run configuration document and command-line overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use regenstab_core::fixture::PaperFixture;

use crate::error::{CliError, Issue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TimeKindConfig {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub time_kind: TimeKindConfig,
    /// Mode matrices `A_1, A_2, ...` as row-major nested arrays.
    pub modes: Vec<Vec<Vec<f64>>>,
}

/// `[mode, duration]`, modes labelled from 1.
pub type SegmentConfig = (usize, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    pub probability: f64,
    pub segments: Vec<SegmentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Healthy mode 1 until an exponential failure, failed mode 2 until
    /// maintenance at `T(1 + U[-delta, delta])`.
    Maintenance {
        #[serde(rename = "T")]
        period: f64,
        delta: f64,
        lambda: f64,
    },
    /// Integer-time maintenance: cycle length uniform on
    /// `{T - delta, ..., T + delta}`, per-step failure probability.
    DiscreteMaintenance {
        #[serde(rename = "T")]
        period: u64,
        delta: u64,
        failure_prob: f64,
    },
    #[serde(alias = "finite-support")]
    FiniteSupport { cycles: Vec<CycleConfig> },
    Periodic { segments: Vec<SegmentConfig> },
    /// Fixed cycle length; mode 1 for a time uniform on
    /// `[hold_min, hold_max]`, then mode 2.
    #[serde(alias = "uniform-switch")]
    UniformSwitch {
        hold_min: f64,
        hold_max: f64,
        length: f64,
    },
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Maintenance { .. } => "maintenance",
            ModelConfig::DiscreteMaintenance { .. } => "discrete_maintenance",
            ModelConfig::FiniteSupport { .. } => "finite_support",
            ModelConfig::Periodic { .. } => "periodic",
            ModelConfig::UniformSwitch { .. } => "uniform_switch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[default]
    Analyze,
    Sweep,
    Simulate,
    #[serde(alias = "floquet_check")]
    FloquetCheck,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Analyze => "analyze",
            Task::Sweep => "sweep",
            Task::Simulate => "simulate",
            Task::FloquetCheck => "floquet-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Closed form or exact enumeration when available, else Monte Carlo.
    #[default]
    Auto,
    Analytic,
    #[serde(alias = "mc")]
    #[value(alias = "mc")]
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub model: ModelConfig,
    #[serde(default = "default_degree")]
    pub m: usize,
    #[serde(default)]
    pub task: Task,
    #[serde(default)]
    pub method: MethodChoice,
    /// Monte Carlo sample count.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Simulated path count.
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Initial state for simulation; all ones when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Sweep grid as `"lo:hi:steps"`.
    #[serde(default)]
    pub range: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub assert_positive: bool,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Rayon pool size; the global default when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Number of sampled cycles to write to `cycles.csv`.
    #[serde(default)]
    pub dump_cycles: Option<usize>,
}

fn default_degree() -> usize {
    2
}

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_PATHS: usize = 1_000;
pub const DEFAULT_HORIZON: f64 = 30.0;
pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_OUT: &str = "out";

/// Maintenance period used by the built-in fixture when none is given.
pub const FIXTURE_PERIOD: f64 = 1.25;
pub const FIXTURE_RANGE: &str = "0.1:2.0:39";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// Failure-prone feedback loop under jittered periodic maintenance.
    Paper,
}

impl RunConfig {
    /// The built-in preset. `A_1` is recomputed from `A + BK` here.
    pub fn paper() -> Self {
        let f = PaperFixture::default();
        let rows = |a: &regenstab_core::Matrix| -> Vec<Vec<f64>> {
            (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
        };
        RunConfig {
            system: SystemConfig {
                time_kind: TimeKindConfig::Continuous,
                modes: vec![rows(&f.closed_loop()), rows(&f.a)],
            },
            model: ModelConfig::Maintenance {
                period: FIXTURE_PERIOD,
                delta: f.jitter,
                lambda: f.failure_rate,
            },
            m: f.degree,
            task: Task::Analyze,
            method: MethodChoice::Auto,
            samples: None,
            paths: None,
            horizon: None,
            dt: None,
            x0: None,
            range: Some(FIXTURE_RANGE.into()),
            seed: None,
            assert_positive: false,
            strict: false,
            out: None,
            workers: None,
            dump_cycles: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "(root)".into() } else { path };
            CliError::Invalid(vec![Issue::schema(path, e.into_inner().to_string())])
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses `lo:hi:steps`.
pub fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:steps, got {s:?}"));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound {:?}", parts[0]))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound {:?}", parts[1]))?;
    let steps: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad step count {:?}", parts[2]))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("need finite lo < hi, got {lo}:{hi}"));
    }
    if steps < 2 {
        return Err(format!("need at least 2 steps, got {steps}"));
    }
    Ok((lo, hi, steps))
}

/// Source document plus command-line overrides shared by `run` and
/// `validate`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "fixture")]
    pub config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Expectation engine for `analyze`.
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Moment degree.
    #[arg(long)]
    pub m: Option<usize>,
    /// Maintenance period.
    #[arg(long = "T", value_name = "FLOAT")]
    pub period: Option<f64>,
    /// Failure rate of the maintenance model.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Relative maintenance jitter.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Simulated path count.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    /// Sweep grid `lo:hi:steps`.
    #[arg(long, value_name = "A:B:STEPS")]
    pub range: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Treat the system as positive (admits odd m).
    #[arg(long)]
    pub assert_positive: bool,
    /// Exit with status 4 when the verdict is inconclusive.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write this many sampled cycles to cycles.csv.
    #[arg(long, value_name = "N")]
    pub dump_cycles: Option<usize>,
}

impl RunArgs {
    /// Loads the base document and applies every override.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, self.fixture) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(Fixture::Paper)) => RunConfig::paper(),
            (None, None) => {
                return Err(CliError::Invalid(vec![Issue::schema(
                    "(arguments)",
                    "one of --config or --fixture is required",
                )]))
            }
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let mut issues = Vec::new();
        if self.period.is_some() || self.lambda.is_some() || self.delta.is_some() {
            match &mut cfg.model {
                ModelConfig::Maintenance {
                    period,
                    delta,
                    lambda,
                } => {
                    if let Some(v) = self.period {
                        *period = v;
                    }
                    if let Some(v) = self.delta {
                        *delta = v;
                    }
                    if let Some(v) = self.lambda {
                        *lambda = v;
                    }
                }
                other => issues.push(Issue::schema(
                    "model",
                    format!(
                        "--T, --delta and --lambda apply to the maintenance model, not {}",
                        other.kind()
                    ),
                )),
            }
        }
        if let Some(t) = self.task {
            cfg.task = t;
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if self.$f.is_some() { cfg.$f = self.$f.clone(); } )* };
        }
        set!(samples, paths, horizon, dt, x0, range, seed, out, workers, dump_cycles);
        cfg.assert_positive |= self.assert_positive;
        cfg.strict |= self.strict;
        if issues.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_round_trips() {
        let cfg = RunConfig::paper();
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.system.modes[0], vec![vec![-0.4, 0.2], vec![-0.2, -1.1]]);
    }

    #[test]
    fn schema_errors_carry_paths() {
        let err = RunConfig::from_json(
            r#"{"system": {"time_kind": "continuous", "modes": [[[1, "x"]]]},
                "model": {"kind": "periodic", "segments": [[1, 1.0]]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("system.modes[0][0][1]"), "{err}");
        assert_eq!(err.exit_code(), 2);

        let err = RunConfig::from_json(
            r#"{"system": {"time_kind": "continuous", "modes": [[[1]]]},
                "model": {"kind": "maintenance", "T": 1, "delta": 0.1, "lambda": 1, "mu": 2}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("model"), "{err}");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.1:2.0:39").unwrap(), (0.1, 2.0, 39));
        assert!(parse_range("2:1:5").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:1").is_err());
    }

    #[test]
    fn overrides() {
        let args = RunArgs {
            fixture: Some(Fixture::Paper),
            period: Some(2.0),
            m: Some(4),
            seed: Some(7),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.seed, Some(7));
        assert!(matches!(cfg.model, ModelConfig::Maintenance { period, .. } if period == 2.0));

        let mut periodic = RunConfig::paper();
        periodic.model = ModelConfig::Periodic {
            segments: vec![(1, 1.0)],
        };
        let err = args.apply(&mut periodic).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
