//! Monte Carlo coverage and length studies comparing the calibrated Gibbs
//! interval with the Wilks and YM benchmarks.

mod report;

pub use report::{format_regime_table, format_table, read_csv, write_csv, SimRow};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{wilks_lower, wilks_two_sided, wilks_upper, ym_one_sided, ym_two_sided, Side};
use crate::calibration::{calibrated_ti, CalibrationObjective, ObjectiveKind, RMSchedule};
use crate::distributions::{DistributionSpec, Sample};
use crate::error::{Error, Result};
use crate::gibbs::MCMCConfig;
use crate::intervals::{IntervalKind, Method, ToleranceInterval};
use crate::rng::derive_seed;

/// What to do when a Wilks or YM plan is infeasible at the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasiblePolicy {
    /// Count the repetition as a failure and leave it out of the means.
    Skip,
    /// Use the sample extreme(s), the widest order-statistic bound available.
    UseExtremes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dist: DistributionSpec,
    pub n: usize,
    pub objective: CalibrationObjective,
    pub methods: Vec<Method>,
    pub reps: usize,
    pub master_seed: u64,
    pub schedule: RMSchedule,
    pub mcmc: MCMCConfig,
    pub infeasible: InfeasiblePolicy,
}

impl SimConfig {
    pub fn new(dist: DistributionSpec, n: usize, objective: CalibrationObjective, methods: Vec<Method>, reps: usize, master_seed: u64) -> Self {
        Self {
            dist,
            n,
            objective,
            methods,
            reps,
            master_seed,
            schedule: RMSchedule::default(),
            mcmc: MCMCConfig::default(),
            infeasible: InfeasiblePolicy::Skip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        self.objective.validate()?;
        self.schedule.validate()?;
        self.mcmc.validate()?;
        if self.reps == 0 {
            return Err(Error::ParameterDomain("reps must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::ParameterDomain("at least one method is required".into()));
        }
        if self.n == 0 {
            return Err(Error::ParameterDomain("n must be positive".into()));
        }
        Ok(())
    }
}

/// Aggregate over repetitions for one method. Means exclude failed
/// repetitions; `coverage` is `NaN` when every repetition failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub coverage: f64,
    pub stderr: f64,
    pub mean_length: f64,
    pub mean_eta: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub dist: String,
    pub n: usize,
    pub content: f64,
    pub alpha: f64,
    pub objective: String,
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

impl SimResult {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }
}

/// Short label for the coverage definition: `upper`, `lower`, `quantile`
/// or `content`.
pub fn objective_label(obj: &CalibrationObjective) -> &'static str {
    match obj.kind {
        ObjectiveKind::OneSidedUpper { .. } => "upper",
        ObjectiveKind::OneSidedLower { .. } => "lower",
        ObjectiveKind::TwoSidedQuantile { .. } => "quantile",
        ObjectiveKind::TwoSidedContent { .. } => "content",
    }
}

/// Outcome of one method on one simulated sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepOutcome {
    pub success: bool,
    pub length: f64,
    pub eta: Option<f64>,
}

/// Success against the true distribution.
pub fn true_success(dist: &DistributionSpec, obj: &CalibrationObjective, ti: &ToleranceInterval) -> Result<bool> {
    Ok(match obj.kind {
        ObjectiveKind::OneSidedUpper { content } => dist.cdf(ti.upper) >= content,
        ObjectiveKind::OneSidedLower { content } => dist.cdf(ti.lower) <= 1.0 - content,
        ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper } => {
            ti.lower <= dist.quantile(tau_lower)? && ti.upper >= dist.quantile(tau_upper)?
        }
        ObjectiveKind::TwoSidedContent { content, .. } => dist.cdf(ti.upper) - dist.cdf(ti.lower) >= content,
    })
}

fn with_extremes(s: &Sample, obj: &CalibrationObjective, method: Method) -> Result<ToleranceInterval> {
    let (p, conf) = (obj.content(), obj.confidence);
    match obj.interval_kind() {
        IntervalKind::UpperOneSided => ToleranceInterval::upper_one_sided(p, conf, s.max(), method),
        IntervalKind::LowerOneSided => ToleranceInterval::lower_one_sided(p, conf, s.min(), method),
        IntervalKind::TwoSided => {
            ToleranceInterval::two_sided(p, conf, s.min(), s.max(), method, obj.objective_tag())
        }
    }
}

fn benchmark_interval(s: &Sample, obj: &CalibrationObjective, method: Method, policy: InfeasiblePolicy) -> Result<ToleranceInterval> {
    let (p, alpha) = (obj.content(), obj.alpha());
    let ti = match (method, obj.interval_kind()) {
        (Method::Wilks, IntervalKind::UpperOneSided) => wilks_upper(s, p, alpha),
        (Method::Wilks, IntervalKind::LowerOneSided) => wilks_lower(s, p, alpha),
        (Method::Wilks, IntervalKind::TwoSided) => wilks_two_sided(s, p, alpha),
        (Method::Ym, IntervalKind::UpperOneSided) => ym_one_sided(s, p, alpha, Side::Upper),
        (Method::Ym, IntervalKind::LowerOneSided) => ym_one_sided(s, p, alpha, Side::Lower),
        (Method::Ym, IntervalKind::TwoSided) => ym_two_sided(s, p, alpha),
        (Method::CalGibbs, _) => unreachable!("not a benchmark"),
    };
    match ti {
        Err(Error::Infeasible { .. }) if policy == InfeasiblePolicy::UseExtremes => with_extremes(s, obj, method),
        other => other.map(|t| t.with_objective(obj.objective_tag())),
    }
}

/// Runs every configured method on repetition `rep`'s sample.
pub fn run_repetition(cfg: &SimConfig, rep: usize) -> Result<Vec<Result<RepOutcome>>> {
    let rep_seed = derive_seed(cfg.master_seed, &[rep as u64]);
    let s = cfg.dist.sample(cfg.n, rep_seed)?;
    Ok(cfg
        .methods
        .iter()
        .map(|&m| {
            let (ti, eta) = match m {
                Method::CalGibbs => {
                    let (ti, cal) =
                        calibrated_ti(&s, &cfg.objective, &cfg.schedule, &cfg.mcmc, derive_seed(rep_seed, &[1]))?;
                    (ti, Some(cal.eta_hat))
                }
                _ => (benchmark_interval(&s, &cfg.objective, m, cfg.infeasible)?, None),
            };
            Ok(RepOutcome { success: true_success(&cfg.dist, &cfg.objective, &ti)?, length: ti.length(), eta })
        })
        .collect())
}

fn summarize(method: Method, outcomes: &[&Result<RepOutcome>]) -> MethodSummary {
    let ok: Vec<&RepOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let failures = outcomes.len() - ok.len();
    let k = ok.len() as f64;
    let coverage = ok.iter().filter(|o| o.success).count() as f64 / k;
    let mean_length = ok.iter().map(|o| o.length).sum::<f64>() / k;
    let etas: Vec<f64> = ok.iter().filter_map(|o| o.eta).collect();
    let mean_eta = (!etas.is_empty()).then(|| etas.iter().sum::<f64>() / etas.len() as f64);
    MethodSummary { method, coverage, stderr: (coverage * (1.0 - coverage) / k).sqrt(), mean_length, mean_eta, failures }
}

/// Runs `cfg.reps` independent repetitions in parallel. Repetition `i`
/// draws its sample from `derive_seed(master_seed, [i])`, so results do not
/// depend on the thread count.
pub fn run_experiment(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let per_rep: Vec<Vec<Result<RepOutcome>>> =
        (0..cfg.reps).into_par_iter().map(|rep| run_repetition(cfg, rep)).collect::<Result<Vec<_>>>()?;
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, &m)| summarize(m, &per_rep.iter().map(|r| &r[j]).collect::<Vec<_>>()))
        .collect();
    Ok(SimResult {
        dist: cfg.dist.to_string(),
        n: cfg.n,
        content: cfg.objective.content(),
        alpha: cfg.objective.alpha(),
        objective: objective_label(&cfg.objective).to_string(),
        reps: cfg.reps,
        seed: cfg.master_seed,
        methods,
    })
}

/// One experiment per sample size, all with the same master seed.
pub fn run_sensitivity_sweep(base: &SimConfig, n_values: &[usize]) -> Result<Vec<SimResult>> {
    if n_values.is_empty() {
        return Err(Error::EmptyInput("sample sizes"));
    }
    n_values.iter().map(|&n| run_experiment(&SimConfig { n, ..base.clone() })).collect()
}

/// Mean and standard deviation (n - 1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime: String,
    /// Bootstrap coverage estimate at the last evaluated iterate.
    pub calibrated_coverage: MeanSd,
    /// Success indicator of the final interval against the true distribution.
    pub actual_coverage: MeanSd,
    pub eta_hat: MeanSd,
    pub length: MeanSd,
    pub runs: usize,
    pub failures: usize,
}

/// Calibrates on `runs` fresh samples under each named schedule. Run `i`
/// uses the same sample for every regime.
pub fn run_regime_study(
    dist: &DistributionSpec,
    n: usize,
    objective: &CalibrationObjective,
    regimes: &[(String, RMSchedule)],
    runs: usize,
    seed: u64,
    mcmc: &MCMCConfig,
) -> Result<Vec<RegimeSummary>> {
    if regimes.is_empty() {
        return Err(Error::EmptyInput("regimes"));
    }
    if runs == 0 {
        return Err(Error::ParameterDomain("runs must be positive".into()));
    }
    dist.validate()?;
    objective.validate()?;
    regimes
        .iter()
        .map(|(name, sched)| {
            sched.validate()?;
            let per_run: Vec<Result<(f64, f64, f64, f64)>> = (0..runs)
                .into_par_iter()
                .map(|run| {
                    let run_seed = derive_seed(seed, &[run as u64]);
                    let s = dist.sample(n, run_seed)?;
                    let (ti, cal) = calibrated_ti(&s, objective, sched, mcmc, derive_seed(run_seed, &[1]))?;
                    let hit = true_success(dist, objective, &ti)?;
                    Ok((cal.last_coverage().unwrap_or(f64::NAN), f64::from(u8::from(hit)), cal.eta_hat, ti.length()))
                })
                .collect();
            let ok: Vec<(f64, f64, f64, f64)> = per_run.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
            let col = |f: fn(&(f64, f64, f64, f64)) -> f64| MeanSd::of(&ok.iter().map(f).collect::<Vec<_>>());
            Ok(RegimeSummary {
                regime: name.clone(),
                calibrated_coverage: col(|r| r.0),
                actual_coverage: col(|r| r.1),
                eta_hat: col(|r| r.2),
                length: col(|r| r.3),
                runs,
                failures: runs - ok.len(),
            })
        })
        .collect()
}
