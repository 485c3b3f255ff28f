//! Turns a [`RunConfig`] into a checked [`Plan`], collecting every problem
//! with its config path.

use std::path::PathBuf;

use regenstab_core::analyzer::guard_assumptions;
use regenstab_core::lift::{lift_dimension, MAX_DEGREE};
use regenstab_core::regen::{
    check_assumptions, AssumptionReport, CheckStatus, Cycle, CycleModel, DiscreteMaintenanceModel,
    FiniteSupportModel, MaintenanceModel, PeriodicModel, PositivityAssertion, Segment,
    UniformSwitchModel,
};
use regenstab_core::{Error as CoreError, Matrix, RngSeed, SwitchedSystem, TimeKind};

use crate::config::{
    parse_range, MethodChoice, ModelConfig, RunConfig, SegmentConfig, Task, TimeKindConfig,
    DEFAULT_DT, DEFAULT_HORIZON, DEFAULT_OUT, DEFAULT_PATHS, DEFAULT_SAMPLES,
};
use crate::error::{Issue, IssueKind};

#[derive(Debug, Clone)]
pub enum BuiltModel {
    Maintenance(MaintenanceModel),
    DiscreteMaintenance(DiscreteMaintenanceModel),
    FiniteSupport(FiniteSupportModel),
    Periodic(PeriodicModel),
    UniformSwitch(UniformSwitchModel),
}

impl BuiltModel {
    pub fn as_dyn(&self) -> &dyn CycleModel {
        match self {
            BuiltModel::Maintenance(m) => m,
            BuiltModel::DiscreteMaintenance(m) => m,
            BuiltModel::FiniteSupport(m) => m,
            BuiltModel::Periodic(m) => m,
            BuiltModel::UniformSwitch(m) => m,
        }
    }

    /// One-line parameter summary for reports.
    pub fn describe(&self) -> String {
        match self {
            BuiltModel::Maintenance(m) => format!(
                "maintenance (T = {}, delta = {}, lambda = {})",
                m.period(),
                m.jitter(),
                m.failure_rate()
            ),
            BuiltModel::DiscreteMaintenance(m) => format!(
                "discrete_maintenance (T = {}, delta = {}, failure_prob = {})",
                m.period(),
                m.jitter(),
                m.failure_prob()
            ),
            BuiltModel::FiniteSupport(m) => {
                format!("finite_support ({} cycles)", m.outcomes().len())
            }
            BuiltModel::Periodic(m) => {
                format!("periodic (length {})", m.cycle().length())
            }
            BuiltModel::UniformSwitch(m) => format!("uniform_switch (length {})", m.length()),
        }
    }
}

/// Expectation engine actually used by `analyze`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    ClosedForm,
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub system: SwitchedSystem,
    pub model: BuiltModel,
    pub m: usize,
    pub task: Task,
    pub engine: Engine,
    pub samples: usize,
    pub paths: usize,
    pub horizon: f64,
    pub dt: f64,
    pub x0: Vec<f64>,
    pub range: Option<(f64, f64, usize)>,
    pub seed: Option<RngSeed>,
    pub positivity: PositivityAssertion,
    pub assumptions: AssumptionReport,
    pub strict: bool,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub dump_cycles: usize,
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub issues: Vec<Issue>,
    pub assumptions: Option<AssumptionReport>,
    pub plan: Option<Plan>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

fn build_system(cfg: &RunConfig, issues: &mut Vec<Issue>) -> Option<SwitchedSystem> {
    let modes = &cfg.system.modes;
    if modes.is_empty() {
        issues.push(Issue::schema("system.modes", "at least one mode is required"));
        return None;
    }
    let n = modes[0].len();
    let before = issues.len();
    let mut mats = Vec::with_capacity(modes.len());
    for (s, rows) in modes.iter().enumerate() {
        let path = format!("system.modes[{s}]");
        if rows.is_empty() {
            issues.push(Issue::schema(path, "matrix has no rows"));
            continue;
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != rows.len()) {
            issues.push(Issue::schema(
                format!("{path}[{i}]"),
                format!(
                    "matrix must be square: {} rows but row {i} has {} entries",
                    rows.len(),
                    r.len()
                ),
            ));
            continue;
        }
        if rows.len() != n {
            issues.push(Issue::schema(
                path,
                format!("mode is {0}x{0} but mode 1 is {n}x{n}", rows.len()),
            ));
            continue;
        }
        if let Some((i, j)) = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !rows[i][j].is_finite())
        {
            issues.push(Issue::schema(format!("{path}[{i}][{j}]"), "entry is not finite"));
            continue;
        }
        mats.push(Matrix::from_row_major(n, n, rows.concat()).expect("checked square"));
    }
    if issues.len() > before {
        return None;
    }
    let kind = match cfg.system.time_kind {
        TimeKindConfig::Continuous => TimeKind::Continuous,
        TimeKindConfig::Discrete => TimeKind::Discrete,
    };
    match SwitchedSystem::new(kind, mats) {
        Ok(s) => Some(s),
        Err(e) => {
            issues.push(Issue::schema("system", e.to_string()));
            None
        }
    }
}

fn build_cycle(
    segments: &[SegmentConfig],
    path: &str,
    system: &SwitchedSystem,
    issues: &mut Vec<Issue>,
) -> Option<Cycle> {
    let before = issues.len();
    for (k, &(mode, d)) in segments.iter().enumerate() {
        if mode == 0 || mode > system.mode_count() {
            issues.push(Issue::schema(
                format!("{path}[{k}][0]"),
                format!("mode {mode} is not in 1..={}", system.mode_count()),
            ));
        }
        if !(d.is_finite() && d > 0.0) {
            issues.push(Issue::model(
                format!("{path}[{k}][1]"),
                format!("segment duration must be positive, got {d}"),
            ));
        }
    }
    if issues.len() > before {
        return None;
    }
    let segs = segments.iter().map(|&(m, d)| Segment::new(m, d)).collect();
    match Cycle::new(segs) {
        Ok(c) => Some(c),
        Err(e) => {
            issues.push(Issue::model(path, e.to_string()));
            None
        }
    }
}

fn model_error(issues: &mut Vec<Issue>, e: CoreError) {
    issues.push(Issue::model("model", e.to_string()));
}

fn require_continuous(system: &SwitchedSystem, kind: &str, issues: &mut Vec<Issue>) {
    if system.time_kind() != TimeKind::Continuous {
        issues.push(Issue::schema(
            "model.kind",
            format!("{kind} is a continuous-time model but system.time_kind is discrete"),
        ));
    }
}

fn require_discrete(system: &SwitchedSystem, kind: &str, issues: &mut Vec<Issue>) {
    if system.time_kind() != TimeKind::Discrete {
        issues.push(Issue::schema(
            "model.kind",
            format!("{kind} is a discrete-time model but system.time_kind is continuous"),
        ));
    }
}

fn require_two_modes(system: &SwitchedSystem, kind: &str, issues: &mut Vec<Issue>) {
    if system.mode_count() != 2 {
        issues.push(Issue::schema(
            "system.modes",
            format!(
                "{kind} switches between modes 1 and 2, but {} mode(s) are given",
                system.mode_count()
            ),
        ));
    }
}

fn build_model(
    cfg: &RunConfig,
    system: &SwitchedSystem,
    issues: &mut Vec<Issue>,
) -> Option<BuiltModel> {
    let before = issues.len();
    let built = match &cfg.model {
        ModelConfig::Maintenance {
            period,
            delta,
            lambda,
        } => {
            require_continuous(system, "maintenance", issues);
            require_two_modes(system, "maintenance", issues);
            for (name, v, ok) in [
                ("model.T", *period, period.is_finite() && *period > 0.0),
                ("model.delta", *delta, delta.is_finite() && (0.0..1.0).contains(delta)),
                ("model.lambda", *lambda, lambda.is_finite() && *lambda > 0.0),
            ] {
                if !ok {
                    let want = if name == "model.delta" {
                        "must lie in [0, 1)"
                    } else {
                        "must be positive"
                    };
                    issues.push(Issue::model(name, format!("{want}, got {v}")));
                }
            }
            if issues.len() > before {
                return None;
            }
            MaintenanceModel::new(*period, *delta, *lambda).map(BuiltModel::Maintenance)
        }
        ModelConfig::DiscreteMaintenance {
            period,
            delta,
            failure_prob,
        } => {
            require_discrete(system, "discrete_maintenance", issues);
            require_two_modes(system, "discrete_maintenance", issues);
            if issues.len() > before {
                return None;
            }
            DiscreteMaintenanceModel::new(*period, *delta, *failure_prob)
                .map(BuiltModel::DiscreteMaintenance)
        }
        ModelConfig::FiniteSupport { cycles } => {
            let mut outcomes = Vec::with_capacity(cycles.len());
            for (i, c) in cycles.iter().enumerate() {
                let path = format!("model.cycles[{i}]");
                if !(c.probability.is_finite() && (0.0..=1.0).contains(&c.probability)) {
                    issues.push(Issue::model(
                        format!("{path}.probability"),
                        format!("must lie in [0, 1], got {}", c.probability),
                    ));
                }
                if let Some(cy) = build_cycle(&c.segments, &format!("{path}.segments"), system, issues)
                {
                    outcomes.push((c.probability, cy));
                }
            }
            if issues.len() > before {
                return None;
            }
            FiniteSupportModel::new(system.time_kind(), outcomes).map(BuiltModel::FiniteSupport)
        }
        ModelConfig::Periodic { segments } => {
            let cycle = build_cycle(segments, "model.segments", system, issues)?;
            PeriodicModel::new(system.time_kind(), cycle).map(BuiltModel::Periodic)
        }
        ModelConfig::UniformSwitch {
            hold_min,
            hold_max,
            length,
        } => {
            require_continuous(system, "uniform_switch", issues);
            require_two_modes(system, "uniform_switch", issues);
            if issues.len() > before {
                return None;
            }
            UniformSwitchModel::new(*hold_min, *hold_max, *length).map(BuiltModel::UniformSwitch)
        }
    };
    match built {
        Ok(m) => Some(m),
        Err(e) => {
            model_error(issues, e);
            None
        }
    }
}

/// Full schema and invariant check, including the assumption pre-check.
pub fn validate(cfg: &RunConfig) -> Validation {
    let mut issues = Vec::new();

    if cfg.m == 0 || cfg.m > MAX_DEGREE {
        issues.push(Issue::schema(
            "m",
            format!("degree must lie in 1..={MAX_DEGREE}, got {}", cfg.m),
        ));
    }
    let system = build_system(cfg, &mut issues);
    if let (Some(sys), true) = (&system, (1..=MAX_DEGREE).contains(&cfg.m)) {
        if let Err(e) = lift_dimension(sys.dim(), cfg.m) {
            issues.push(Issue::schema("m", e.to_string()));
        }
    }
    let model = system
        .as_ref()
        .and_then(|s| build_model(cfg, s, &mut issues));

    let positivity = if cfg.assert_positive {
        PositivityAssertion::UserAsserted
    } else {
        PositivityAssertion::MetzlerCheck
    };

    let engine = match (cfg.task, cfg.method, &cfg.model) {
        (Task::Analyze, MethodChoice::MonteCarlo, _) => Engine::MonteCarlo,
        (_, _, ModelConfig::Maintenance { .. }) => Engine::ClosedForm,
        (_, _, ModelConfig::FiniteSupport { .. } | ModelConfig::Periodic { .. }) => {
            Engine::Enumeration
        }
        (_, MethodChoice::Analytic, m) => {
            issues.push(Issue::schema(
                "method",
                format!("no analytic engine for the {} model", m.kind()),
            ));
            Engine::MonteCarlo
        }
        _ => Engine::MonteCarlo,
    };

    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let paths = cfg.paths.unwrap_or(DEFAULT_PATHS);
    let horizon = cfg.horizon.unwrap_or(DEFAULT_HORIZON);
    let dt = cfg.dt.unwrap_or(DEFAULT_DT);
    let dump_cycles = cfg.dump_cycles.unwrap_or(0);

    let randomized = match cfg.task {
        Task::Analyze => engine == Engine::MonteCarlo,
        Task::Simulate => true,
        Task::Sweep | Task::FloquetCheck => false,
    } || dump_cycles > 0;
    if randomized && cfg.seed.is_none() {
        issues.push(Issue::schema(
            "seed",
            "an explicit seed is required for randomized tasks",
        ));
    }

    let mut range = None;
    match cfg.task {
        Task::Analyze => {
            if engine == Engine::MonteCarlo && samples < 2 {
                issues.push(Issue::schema("samples", format!("need at least 2, got {samples}")));
            }
        }
        Task::Sweep => {
            if !matches!(model, Some(BuiltModel::Maintenance(_)) | None) {
                issues.push(Issue::schema(
                    "model.kind",
                    "sweep varies the maintenance period T and needs the maintenance model",
                ));
            }
            if cfg.method == MethodChoice::MonteCarlo {
                issues.push(Issue::schema("method", "sweep uses the analytic engine only"));
            }
            match cfg.range.as_deref().map(parse_range) {
                None => issues.push(Issue::schema("range", "sweep needs a range lo:hi:steps")),
                Some(Err(e)) => issues.push(Issue::schema("range", e)),
                Some(Ok((lo, hi, steps))) => {
                    if lo <= 0.0 {
                        issues.push(Issue::model(
                            "range",
                            format!("maintenance period must stay positive, range starts at {lo}"),
                        ));
                    }
                    range = Some((lo, hi, steps));
                }
            }
        }
        Task::Simulate => {
            if paths < 2 {
                issues.push(Issue::schema("paths", format!("need at least 2, got {paths}")));
            }
            if !(horizon.is_finite() && horizon > 0.0) {
                issues.push(Issue::schema("horizon", format!("must be positive, got {horizon}")));
            }
            if !(dt.is_finite() && dt > 0.0) {
                issues.push(Issue::schema("dt", format!("must be positive, got {dt}")));
            }
        }
        Task::FloquetCheck => {
            if !matches!(model, Some(BuiltModel::Periodic(_)) | None) {
                issues.push(Issue::schema(
                    "model.kind",
                    "floquet-check needs a periodic model",
                ));
            }
        }
    }

    let x0 = match (&cfg.x0, &system) {
        (Some(x), Some(sys)) => {
            if x.len() != sys.dim() {
                issues.push(Issue::schema(
                    "x0",
                    format!("length {} does not match system dimension {}", x.len(), sys.dim()),
                ));
            } else if let Some(i) = x.iter().position(|v| !v.is_finite()) {
                issues.push(Issue::schema(format!("x0[{i}]"), "entry is not finite"));
            }
            x.clone()
        }
        (None, Some(sys)) => vec![1.0; sys.dim()],
        _ => Vec::new(),
    };
    if cfg.workers == Some(0) {
        issues.push(Issue::schema("workers", "must be at least 1"));
    }

    let assumptions = match (&system, &model) {
        (Some(s), Some(m)) if (1..=MAX_DEGREE).contains(&cfg.m) => {
            let report = check_assumptions(s, m.as_dyn(), cfg.m, positivity);
            if report.a1.status == CheckStatus::Fail && cfg.task != Task::FloquetCheck {
                if let Err(e) = guard_assumptions(s, m.as_dyn(), cfg.m, positivity) {
                    issues.push(Issue {
                        path: "m".into(),
                        message: e.to_string(),
                        kind: IssueKind::Assumption,
                    });
                }
            }
            Some(report)
        }
        _ => None,
    };

    let plan = match (issues.is_empty(), system, model, assumptions.clone()) {
        (true, Some(system), Some(model), Some(assumptions)) => Some(Plan {
            system,
            model,
            m: cfg.m,
            task: cfg.task,
            engine,
            samples,
            paths,
            horizon,
            dt,
            x0,
            range,
            seed: cfg.seed.map(RngSeed::new),
            positivity,
            assumptions,
            strict: cfg.strict,
            out: cfg.out.clone().unwrap_or_else(|| DEFAULT_OUT.into()),
            workers: cfg.workers,
            dump_cycles,
        }),
        _ => None,
    };
    Validation {
        issues,
        assumptions,
        plan,
    }
}
