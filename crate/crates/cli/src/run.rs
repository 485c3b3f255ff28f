use std::path::PathBuf;

use regenstab_core::analyzer::{
    decide_stability, expected_lift_analytic, expected_lift_enumerated, expected_lift_mc,
    floquet_check, maintenance_period_sweep, LiftedExpectation, Verdict,
};
use regenstab_core::regen::{sample_cycle, FiniteSupportModel};
use regenstab_core::sim::{ensemble_mean, PathSpec};
use regenstab_core::RngSeed;

use crate::config::{RunConfig, Task};
use crate::error::CliError;
use crate::output::{csv_bytes, fmt_float, write_atomic, Report};
use crate::plan::{validate, BuiltModel, Engine, Plan};

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
    pub verdict: Option<Verdict>,
    pub rho: Option<f64>,
}

/// Validates, then executes inside a pool of `workers` threads when set.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let v = validate(cfg);
    let plan = match v.plan {
        Some(p) if v.issues.is_empty() => p,
        _ => return Err(CliError::Invalid(v.issues)),
    };
    match plan.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| {
                CliError::Invalid(vec![crate::error::Issue::schema("workers", e.to_string())])
            })?
            .install(|| execute(&plan)),
        None => execute(&plan),
    }
}

/// Runs the task and writes its files. Under strict mode an inconclusive
/// verdict is an error, raised after the files are written.
pub fn execute(plan: &Plan) -> Result<Outcome, CliError> {
    let mut out = Outcome {
        report: header(plan),
        files: Vec::new(),
        verdict: None,
        rho: None,
    };
    match plan.task {
        Task::Analyze => analyze(plan, &mut out)?,
        Task::Sweep => sweep(plan, &mut out)?,
        Task::Simulate => simulate(plan, &mut out)?,
        Task::FloquetCheck => floquet(plan, &mut out)?,
    }
    if plan.dump_cycles > 0 {
        dump_cycles(plan, &mut out)?;
    }
    let text = out.report.to_text();
    out.files
        .insert(0, write_atomic(&plan.out, "report.txt", text.as_bytes())?);
    if plan.strict && out.verdict == Some(Verdict::Inconclusive) {
        return Err(CliError::Inconclusive {
            rho: out.rho.unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

fn header(plan: &Plan) -> Report {
    let mut r = Report::default();
    r.push("task", plan.task.as_str());
    r.push("time_kind", plan.system.time_kind().as_str());
    r.push("modes", plan.system.mode_count());
    r.push("n", plan.system.dim());
    r.push("model", plan.model.describe());
    r.push("m", plan.m);
    r.push(
        "seed",
        plan.seed
            .map(|s| s.seed.to_string())
            .unwrap_or_else(|| "none".into()),
    );
    r
}

fn push_assumptions(plan: &Plan, r: &mut Report) {
    for (id, c) in plan.assumptions.checks() {
        r.push(
            format!("assumption.{id}"),
            format!("{} ({})", c.status.as_str(), c.detail),
        );
    }
}

fn seed(plan: &Plan) -> RngSeed {
    plan.seed.expect("validated: randomized tasks carry a seed")
}

fn expectation(plan: &Plan) -> Result<LiftedExpectation, CliError> {
    Ok(match (plan.engine, &plan.model) {
        (Engine::ClosedForm, BuiltModel::Maintenance(m)) => {
            expected_lift_analytic(&plan.system, m, plan.m)?
        }
        (Engine::Enumeration, BuiltModel::FiniteSupport(m)) => {
            expected_lift_enumerated(&plan.system, m, plan.m)?
        }
        (Engine::Enumeration, BuiltModel::Periodic(p)) => {
            let fs = FiniteSupportModel::new(plan.system.time_kind(), vec![(1.0, p.cycle().clone())])?;
            expected_lift_enumerated(&plan.system, &fs, plan.m)?
        }
        _ => expected_lift_mc(
            &plan.system,
            plan.model.as_dyn(),
            plan.m,
            plan.samples,
            seed(plan),
        )?,
    })
}

fn analyze(plan: &Plan, out: &mut Outcome) -> Result<(), CliError> {
    let e = expectation(plan)?;
    let rep = decide_stability(&e, Some(&plan.assumptions))?;
    let r = &mut out.report;
    r.push(
        "method",
        match plan.engine {
            Engine::Enumeration => "analytic (enumeration)",
            _ => rep.method.as_str(),
        },
    );
    r.push(
        "samples",
        rep.samples
            .map(|s| s.to_string())
            .unwrap_or_else(|| "n/a".into()),
    );
    r.push("lift_dimension", e.basis.dim());
    r.push_float("rho", rep.rho);
    r.push_float("margin", rep.margin);
    r.push("verdict", rep.verdict.as_str());
    r.push(
        "rho_interval",
        rep.rho_interval
            .map(|(a, b)| format!("{}, {}", fmt_float(a), fmt_float(b)))
            .unwrap_or_else(|| "n/a".into()),
    );
    r.push("converged", rep.converged);
    r.push("within_hypotheses", rep.within_hypotheses);
    push_assumptions(plan, r);
    for n in &rep.notes {
        r.push("note", n);
    }

    let idx = e.basis.indices();
    let dim = e.basis.dim();
    let rows = (0..dim).flat_map(|i| {
        let e = &e;
        (0..dim).map(move |j| {
            vec![
                i.to_string(),
                j.to_string(),
                idx[i].label(),
                idx[j].label(),
                fmt_float(e.estimate[(i, j)]),
                e.std_errors
                    .as_ref()
                    .map(|s| fmt_float(s[(i, j)]))
                    .unwrap_or_default(),
            ]
        })
    });
    let header: Vec<String> = ["i", "j", "alpha_i", "alpha_j", "value", "stderr"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    out.files
        .push(write_atomic(&plan.out, "expectation.csv", &csv_bytes(&header, rows))?);
    out.verdict = Some(rep.verdict);
    out.rho = Some(rep.rho);
    Ok(())
}

fn sweep(plan: &Plan, out: &mut Outcome) -> Result<(), CliError> {
    let BuiltModel::Maintenance(model) = &plan.model else {
        unreachable!("validated: sweep needs the maintenance model")
    };
    let (lo, hi, steps) = plan.range.expect("validated: sweep has a range");
    let res = maintenance_period_sweep(&plan.system, model, plan.m, lo, hi, steps)?;

    let r = &mut out.report;
    r.push("method", "analytic");
    r.push("parameter", "T");
    r.push("range", format!("{}:{}:{}", fmt_float(lo), fmt_float(hi), steps));
    r.push(
        "T_star",
        res.threshold
            .map(fmt_float)
            .unwrap_or_else(|| "none".into()),
    );
    let (tmin, rmin) = res
        .rows
        .iter()
        .map(|row| (row.theta, row.rho))
        .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    r.push_float("rho_min", rmin);
    r.push_float("theta_at_rho_min", tmin);
    push_assumptions(plan, r);
    if res.threshold.is_none() {
        r.push("note", "rho - 1 does not change sign on the grid");
    }

    let header: Vec<String> = ["theta", "rho", "verdict"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows: Vec<Vec<String>> = res
        .rows
        .iter()
        .map(|row| {
            vec![
                fmt_float(row.theta),
                fmt_float(row.rho),
                row.verdict.as_str().to_string(),
            ]
        })
        .collect();
    rows.push(vec![
        "T_star".into(),
        res.threshold.map(fmt_float).unwrap_or_default(),
        if res.threshold.is_some() { "threshold" } else { "none" }.into(),
    ]);
    out.files
        .push(write_atomic(&plan.out, "sweep.csv", &csv_bytes(&header, rows))?);
    Ok(())
}

fn simulate(plan: &Plan, out: &mut Outcome) -> Result<(), CliError> {
    let spec = PathSpec {
        x0: plan.x0.clone(),
        horizon: plan.horizon,
        dt: plan.dt,
        m: plan.m,
    };
    let s = ensemble_mean(&plan.system, plan.model.as_dyn(), &spec, plan.paths, seed(plan))?;

    let r = &mut out.report;
    r.push("paths", s.paths);
    r.push_float("horizon", plan.horizon);
    r.push_float("dt", plan.dt);
    r.push(
        "x0",
        plan.x0.iter().map(|v| fmt_float(*v)).collect::<Vec<_>>().join(", "),
    );
    r.push(
        "beta_hat",
        s.beta_hat.map(fmt_float).unwrap_or_else(|| "none".into()),
    );
    r.push("diverged_paths", s.diverged_paths);
    r.push_float("min_state_entry", s.min_state_entry);
    r.push(
        "indicator",
        match s.indicates_stable() {
            Some(true) => "stable",
            Some(false) if s.all_diverged() => "unstable (all paths diverged)",
            Some(false) if s.diverged_paths > 0 => "unstable (divergence)",
            Some(false) => "unstable",
            None => "undetermined",
        },
    );

    let k = s.stored.len();
    let mut header = vec!["t".to_string()];
    header.extend((0..k).map(|p| format!("path_{p}")));
    let rows = s.times.iter().enumerate().map(|(j, t)| {
        let mut row = vec![fmt_float(*t)];
        row.extend(
            s.stored
                .iter()
                .map(|rec| rec.values.get(j).map(|v| fmt_float(*v)).unwrap_or_default()),
        );
        row
    });
    out.files
        .push(write_atomic(&plan.out, "paths.csv", &csv_bytes(&header, rows))?);

    let header: Vec<String> = ["t", "mean", "stderr"].iter().map(|s| s.to_string()).collect();
    let rows = (0..s.times.len()).map(|j| {
        vec![
            fmt_float(s.times[j]),
            fmt_float(s.mean[j]),
            fmt_float(s.std_error[j]),
        ]
    });
    out.files
        .push(write_atomic(&plan.out, "ensemble.csv", &csv_bytes(&header, rows))?);
    Ok(())
}

fn floquet(plan: &Plan, out: &mut Outcome) -> Result<(), CliError> {
    let BuiltModel::Periodic(model) = &plan.model else {
        unreachable!("validated: floquet-check needs a periodic model")
    };
    let f = floquet_check(&plan.system, model, plan.m)?;
    let r = &mut out.report;
    r.push("method", "analytic");
    r.push_float("rho_transition", f.rho_transition);
    r.push_float("rho_lifted", f.rho_lifted);
    r.push_float("relative_error", f.relative_error);
    r.push("identity_holds", f.identity_holds);
    r.push("classical_verdict", f.classical_verdict.as_str());
    r.push("verdict", f.lifted_verdict.as_str());
    r.push("agrees", f.agrees);
    push_assumptions(plan, r);
    out.verdict = Some(f.lifted_verdict);
    out.rho = Some(f.rho_lifted);
    Ok(())
}

/// Cycles from substream 0: the first cycles of Monte Carlo chunk 0 and of
/// simulated path 0.
fn dump_cycles(plan: &Plan, out: &mut Outcome) -> Result<(), CliError> {
    let mut rng = seed(plan).substream(0).rng();
    let cycles = (0..plan.dump_cycles)
        .map(|_| sample_cycle(plan.model.as_dyn(), &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let width = cycles.iter().map(|c| c.segments().len()).max().unwrap_or(0);
    let mut header = vec!["cycle_index".to_string(), "R".to_string()];
    for k in 1..=width {
        header.push(format!("mode_{k}"));
        header.push(format!("duration_{k}"));
    }
    let rows = cycles.iter().enumerate().map(|(i, c)| {
        let mut row = vec![i.to_string(), fmt_float(c.length())];
        for seg in c.segments() {
            row.push(seg.mode.to_string());
            row.push(fmt_float(seg.duration));
        }
        row.resize(2 + 2 * width, String::new());
        row
    });
    out.files
        .push(write_atomic(&plan.out, "cycles.csv", &csv_bytes(&header, rows))?);
    Ok(())
}
