//! Command dispatch. Every command produces a [`Report`] holding the
//! resolved configuration and the result in each output format.

use std::fmt::Write as _;

use caltol_core::benchmarks::{
    min_n_one_sided, min_n_two_sided, wilks_lower, wilks_lower_plan, wilks_two_sided, wilks_two_sided_plan,
    wilks_upper, wilks_upper_plan, ym_one_sided, ym_two_sided, ym_two_sided_plan, ym_upper_plan, OrderStatPlan, Side,
};
use caltol_core::calibration::{
    calibrated_ti, geometric_grid, gibbs_interval, grid_search_calibrate, robbins_monro_calibrate, CalibrationObjective,
    CalibrationResult, Fallback, RMSchedule,
};
use caltol_core::distributions::Sample;
use caltol_core::gibbs::MCMCConfig;
use caltol_core::intervals::{IntervalKind, Method, ToleranceInterval};
use caltol_core::rng::derive_seed;
use caltol_core::simharness::{
    format_regime_table, format_table, run_experiment, run_regime_study, run_sensitivity_sweep, write_csv,
    InfeasiblePolicy, RegimeSummary, SimConfig, SimResult,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    CalibrateArgs, Command, Eta0, IntervalArgs, MinNArgs, RegimesArgs, Sides, SimulateArgs, StudyArgs, SweepArgs,
};
use crate::data::load_data;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Fully resolved settings of a run; enough to repeat it bit for bit.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Method>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<CalibrationObjective>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedules: Option<Vec<(String, RMSchedule)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcmc: Option<MCMCConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<InfeasiblePolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads, from CALTOL_THREADS. Results do not depend on it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: RunConfig,
    pub result: Value,
    pub table: String,
    pub csv: String,
}

impl Report {
    pub fn json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.config.command,
            "config": self.config,
            "result": self.result,
        })
    }
}

pub fn run(command: &Command, threads: Option<usize>) -> Result<Report, CliError> {
    let mut report = match command {
        Command::Interval(a) => interval(a)?,
        Command::Calibrate(a) => calibrate(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Sweep(a) => sweep(a)?,
        Command::Regimes(a) => regimes(a)?,
        Command::MinN(a) => min_n(a)?,
    };
    report.config.threads = threads;
    Ok(report)
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 fields")
}

fn fmt_bound(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.6}")
    }
}

fn benchmark_plan(method: Method, kind: IntervalKind, n: usize, p: f64, alpha: f64) -> caltol_core::Result<OrderStatPlan> {
    match (method, kind) {
        (Method::Wilks, IntervalKind::UpperOneSided) => wilks_upper_plan(n, p, alpha),
        (Method::Wilks, IntervalKind::LowerOneSided) => wilks_lower_plan(n, p, alpha),
        (Method::Wilks, IntervalKind::TwoSided) => wilks_two_sided_plan(n, p, alpha),
        (_, IntervalKind::UpperOneSided) => ym_upper_plan(n, p, alpha),
        (_, IntervalKind::LowerOneSided) => {
            // The lower bound is the upper bound of the reflected sample.
            let mut plan = ym_upper_plan(n, p, alpha)?;
            plan.indices = plan.indices.iter().map(|&k| n + 1 - k).collect();
            plan.fractional_index = plan.fractional_index.map(|v| (n + 1) as f64 - v);
            Ok(plan)
        }
        (_, IntervalKind::TwoSided) => ym_two_sided_plan(n, p, alpha),
    }
}

fn benchmark_interval(method: Method, obj: &CalibrationObjective, s: &Sample) -> caltol_core::Result<ToleranceInterval> {
    let (p, alpha) = (obj.content(), obj.alpha());
    match (method, obj.interval_kind()) {
        (Method::Wilks, IntervalKind::UpperOneSided) => wilks_upper(s, p, alpha),
        (Method::Wilks, IntervalKind::LowerOneSided) => wilks_lower(s, p, alpha),
        (Method::Wilks, IntervalKind::TwoSided) => wilks_two_sided(s, p, alpha),
        (_, IntervalKind::UpperOneSided) => ym_one_sided(s, p, alpha, Side::Upper),
        (_, IntervalKind::LowerOneSided) => ym_one_sided(s, p, alpha, Side::Lower),
        (_, IntervalKind::TwoSided) => ym_two_sided(s, p, alpha),
    }
}

fn kind_label(kind: IntervalKind) -> &'static str {
    match kind {
        IntervalKind::UpperOneSided => "upper",
        IntervalKind::LowerOneSided => "lower",
        IntervalKind::TwoSided => "two-sided",
    }
}

fn interval_table(ti: &ToleranceInterval, n: usize) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "method      {}", ti.method);
    let _ = writeln!(t, "n           {n}");
    let _ = writeln!(t, "content P   {}", ti.content);
    let _ = writeln!(t, "confidence  {}", ti.confidence);
    match ti.kind {
        IntervalKind::UpperOneSided => {
            let _ = writeln!(t, "U = {:.2}", ti.upper);
        }
        IntervalKind::LowerOneSided => {
            let _ = writeln!(t, "L = {:.2}", ti.lower);
        }
        IntervalKind::TwoSided => {
            let _ = writeln!(t, "objective   {}", ti.objective.as_str());
            let _ = writeln!(t, "(L, U) = ({:.2}, {:.2})", ti.lower, ti.upper);
        }
    }
    t
}

fn interval(a: &IntervalArgs) -> Result<Report, CliError> {
    let s = load_data(&a.data)?;
    let obj = a.objective.resolve()?;
    let mut config = RunConfig {
        command: "interval",
        data: Some(a.data.clone()),
        n: Some(vec![s.len()]),
        methods: Some(vec![a.method]),
        objective: Some(obj),
        seed: Some(a.seed),
        ..Default::default()
    };
    if a.eta.is_some() && a.method != Method::CalGibbs {
        return Err(CliError::Usage("--eta applies to --method cal-gibbs only".into()));
    }
    let mut result = serde_json::Map::new();
    let mut table;
    let ti = match a.method {
        Method::CalGibbs => {
            let mcmc = a.mcmc.resolve()?;
            config.mcmc = Some(mcmc);
            let (ti, cal) = match a.eta {
                Some(eta) => {
                    config.eta = Some(eta);
                    (gibbs_interval(&s, &obj, eta, &mcmc, a.seed)?, None)
                }
                None => {
                    let sched = a.schedule.resolve()?;
                    config.schedules = Some(vec![(a.schedule.regime.name().to_string(), sched)]);
                    let (ti, cal) = calibrated_ti(&s, &obj, &sched, &mcmc, a.seed)?;
                    (ti, Some(cal))
                }
            };
            table = interval_table(&ti, s.len());
            match &cal {
                Some(cal) => {
                    let _ = writeln!(table, "eta         {:.4} (start {:.4}, {} iterations, converged {})",
                        cal.eta_hat, cal.eta0, cal.trajectory.len(), cal.converged);
                    result.insert("calibration".into(), calibration_json(cal));
                }
                None => {
                    let _ = writeln!(table, "eta         {} (fixed)", a.eta.unwrap_or_default());
                }
            }
            ti
        }
        method => {
            let plan = benchmark_plan(method, obj.interval_kind(), s.len(), obj.content(), obj.alpha())?;
            let ti = benchmark_interval(method, &obj, &s)?;
            table = interval_table(&ti, s.len());
            match plan.indices.as_slice() {
                [k] => {
                    let _ = writeln!(table, "k = {k}");
                }
                [r, s] => {
                    let _ = writeln!(table, "r = {r}, s = {s}");
                }
                _ => {}
            }
            if let Some(v) = plan.fractional_index {
                let _ = writeln!(table, "fractional index {v:.6}");
            }
            if let Some(t) = plan.extrapolation {
                let _ = writeln!(table, "extrapolated {t:.6} spacings beyond the sample extremes");
            }
            let _ = writeln!(table, "achieved confidence {:.6}", plan.achieved_confidence);
            result.insert("plan".into(), serde_json::to_value(&plan).expect("plan serializes"));
            ti
        }
    };
    result.insert("interval".into(), serde_json::to_value(ti).expect("interval serializes"));
    let csv = csv_line(&["method", "kind", "objective", "content", "confidence", "n", "lower", "upper", "length", "seed"].map(String::from))
        + &csv_line(&[
            ti.method.to_string(),
            kind_label(ti.kind).to_string(),
            ti.objective.as_str().to_string(),
            ti.content.to_string(),
            ti.confidence.to_string(),
            s.len().to_string(),
            fmt_bound(ti.lower),
            fmt_bound(ti.upper),
            ti.length().to_string(),
            a.seed.to_string(),
        ]);
    Ok(Report { config, result: Value::Object(result), table, csv })
}

fn calibration_json(cal: &CalibrationResult) -> Value {
    serde_json::to_value(cal).expect("calibration result serializes")
}

fn calibrate(a: &CalibrateArgs) -> Result<Report, CliError> {
    let s = load_data(&a.data)?;
    let obj = a.objective.resolve()?;
    let mcmc = a.mcmc.resolve()?;
    let sched = a.schedule.resolve()?;
    let cal = match a.grid_points {
        Some(points) if points >= 2 => {
            grid_search_calibrate(&s, &obj, &geometric_grid(sched.bracket, points), sched.bootstrap, &mcmc, a.seed)?
        }
        Some(_) => return Err(CliError::Usage("--grid-points needs at least 2 points".into())),
        None => robbins_monro_calibrate(&s, &obj, &sched, &mcmc, a.seed)?,
    };
    let ti = gibbs_interval(&s, &obj, cal.eta_hat, &mcmc, derive_seed(a.seed, &[3]))?;
    let config = RunConfig {
        command: "calibrate",
        data: Some(a.data.clone()),
        n: Some(vec![s.len()]),
        objective: Some(obj),
        grid_points: a.grid_points,
        schedules: Some(vec![(a.schedule.regime.name().to_string(), sched)]),
        mcmc: Some(mcmc),
        seed: Some(a.seed),
        ..Default::default()
    };
    let mut table = String::new();
    let _ = writeln!(table, "{:>5} {:>12} {:>9}", "iter", "eta", "coverage");
    for p in &cal.trajectory {
        let _ = writeln!(table, "{:>5} {:>12.6} {:>9.3}", p.iter, p.eta, p.coverage);
    }
    let _ = writeln!(table, "eta_hat {:.6}  converged {}  fallback {:?}", cal.eta_hat, cal.converged, cal.fallback_used);
    if !cal.converged && a.grid_points.is_none() && cal.fallback_used == Fallback::None {
        let _ = writeln!(table, "note: Robbins-Monro did not settle; --grid-points searches a grid instead");
    }
    if cal.plugin_degenerate {
        let _ = writeln!(table, "warning: plug-in start hit a degenerate density estimate; started at the bracket floor");
    }
    table.push_str(&interval_table(&ti, s.len()));
    let mut csv = csv_line(&["iter", "eta", "coverage"].map(String::from));
    for p in &cal.trajectory {
        csv += &csv_line(&[p.iter.to_string(), p.eta.to_string(), p.coverage.to_string()]);
    }
    let result = json!({ "calibration": calibration_json(&cal), "interval": ti });
    Ok(Report { config, result, table, csv })
}

fn study_config(a: &StudyArgs, n: usize) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::new(a.dist.clone(), n, a.objective.resolve()?, a.methods.clone(), a.reps, a.seed);
    cfg.schedule = a.schedule.resolve()?;
    cfg.mcmc = a.mcmc.resolve()?;
    cfg.infeasible = a.infeasible.into();
    cfg.validate()?;
    Ok(cfg)
}

fn study_report(command: &'static str, cfg: &SimConfig, a: &StudyArgs, ns: Vec<usize>, results: Vec<SimResult>) -> Result<Report, CliError> {
    let config = RunConfig {
        command,
        dist: Some(cfg.dist.to_string()),
        n: Some(ns),
        methods: Some(cfg.methods.clone()),
        objective: Some(cfg.objective),
        schedules: Some(vec![(a.schedule.regime.name().to_string(), cfg.schedule)]),
        mcmc: Some(cfg.mcmc),
        reps: Some(cfg.reps),
        infeasible: Some(cfg.infeasible),
        seed: Some(cfg.master_seed),
        ..Default::default()
    };
    let mut buf = Vec::new();
    write_csv(&mut buf, &results)?;
    let csv = String::from_utf8(buf).expect("csv is utf-8");
    let rows = caltol_core::simharness::SimRow::from_results(&results);
    Ok(Report {
        config,
        result: json!({ "rows": rows }),
        table: format_table(&results),
        csv,
    })
}

fn simulate(a: &SimulateArgs) -> Result<Report, CliError> {
    let cfg = study_config(&a.study, a.n)?;
    let result = run_experiment(&cfg)?;
    study_report("simulate", &cfg, &a.study, vec![a.n], vec![result])
}

fn sweep(a: &SweepArgs) -> Result<Report, CliError> {
    let ns = a.n_values.0.clone();
    let cfg = study_config(&a.study, ns[0])?;
    let results = run_sensitivity_sweep(&cfg, &ns)?;
    study_report("sweep", &cfg, &a.study, ns, results)
}

fn regimes(a: &RegimesArgs) -> Result<Report, CliError> {
    let obj = a.objective.resolve()?;
    let mcmc = a.mcmc.resolve()?;
    let mut schedules = Vec::new();
    for r in &a.regimes {
        let mut s = r.schedule();
        if let Some(Eta0(init)) = a.eta0 {
            s.eta0 = init;
        }
        if let Some(b) = a.bootstrap {
            s = s.with_bootstrap(b);
        }
        s.validate()?;
        schedules.push((r.name().to_string(), s));
    }
    let rows = run_regime_study(&a.dist, a.n, &obj, &schedules, a.runs, a.seed, &mcmc)?;
    let config = RunConfig {
        command: "regimes",
        dist: Some(a.dist.to_string()),
        n: Some(vec![a.n]),
        objective: Some(obj),
        schedules: Some(schedules),
        mcmc: Some(mcmc),
        runs: Some(a.runs),
        seed: Some(a.seed),
        ..Default::default()
    };
    Ok(Report {
        config,
        result: json!({ "regimes": rows }),
        table: format_regime_table(&rows),
        csv: regime_csv(&rows),
    })
}

fn regime_csv(rows: &[RegimeSummary]) -> String {
    let mut out = csv_line(
        &[
            "regime", "calibrated_coverage", "calibrated_coverage_sd", "actual_coverage", "actual_coverage_sd", "eta_hat",
            "eta_hat_sd", "length", "length_sd", "runs", "failures",
        ]
        .map(String::from),
    );
    for r in rows {
        out += &csv_line(&[
            r.regime.clone(),
            r.calibrated_coverage.mean.to_string(),
            r.calibrated_coverage.sd.to_string(),
            r.actual_coverage.mean.to_string(),
            r.actual_coverage.sd.to_string(),
            r.eta_hat.mean.to_string(),
            r.eta_hat.sd.to_string(),
            r.length.mean.to_string(),
            r.length.sd.to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
        ]);
    }
    out
}

fn min_n(a: &MinNArgs) -> Result<Report, CliError> {
    let conf = match (a.confidence, a.alpha) {
        (Some(c), _) => c,
        (None, Some(al)) => 1.0 - al,
        (None, None) => 0.9,
    };
    let obj = CalibrationObjective::upper(a.content, conf)?;
    let alpha = obj.alpha();
    let (label, n) = match a.kind {
        Sides::OneSided => ("one-sided", min_n_one_sided(a.content, alpha)?),
        Sides::TwoSided => ("two-sided", min_n_two_sided(a.content, alpha)?),
    };
    let config = RunConfig { command: "min-n", objective: Some(obj), ..Default::default() };
    Ok(Report {
        config,
        result: json!({ "kind": label, "content": a.content, "confidence": conf, "min_n": n }),
        table: format!("{n}\n"),
        csv: csv_line(&["kind", "content", "confidence", "min_n"].map(String::from))
            + &csv_line(&[label.to_string(), a.content.to_string(), conf.to_string(), n.to_string()]),
    })
}
