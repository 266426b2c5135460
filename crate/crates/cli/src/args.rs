use std::path::PathBuf;

use caltol_core::calibration::{CalibrationObjective, EtaInit, RMSchedule, Regime};
use caltol_core::distributions::DistributionSpec;
use caltol_core::gibbs::{MCMCConfig, Sampler};
use caltol_core::intervals::Method;
use caltol_core::simharness::InfeasiblePolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "caltol", version, about = "Calibrated Gibbs-posterior nonparametric tolerance intervals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tolerance interval for a dataset (cal-gibbs, wilks or ym).
    Interval(IntervalArgs),
    /// Calibrate the learning rate on a dataset and report the trajectory.
    Calibrate(CalibrateArgs),
    /// Monte Carlo coverage and length study at one sample size.
    Simulate(SimulateArgs),
    /// The same study repeated over a range of sample sizes.
    Sweep(SweepArgs),
    /// Compare Robbins-Monro step-size regimes over repeated calibrations.
    Regimes(RegimesArgs),
    /// Smallest sample size for which the Wilks interval exists.
    MinN(MinNArgs),
}

/// Probabilities are decimals in (0, 1). Percentages are refused rather
/// than silently divided by 100.
pub fn probability(text: &str) -> Result<f64, String> {
    if text.trim_end().ends_with('%') {
        return Err(format!("percent inputs are not accepted; write {text} as a decimal in (0, 1)"));
    }
    let p: f64 = text.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else if (1.0..=100.0).contains(&p) {
        Err(format!("{p} looks like a percentage; probabilities are decimals in (0, 1), e.g. 0.95"))
    } else {
        Err(format!("{p} must lie strictly between 0 and 1"))
    }
}

fn positive(text: &str) -> Result<f64, String> {
    match text.trim().parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("'{text}' must be a positive number")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Upper,
    Lower,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverageDef {
    Content,
    Quantile,
}

#[derive(Debug, Clone, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum, default_value_t = Kind::Upper)]
    pub kind: Kind,
    /// Population content P.
    #[arg(long, value_parser = probability, default_value = "0.9")]
    pub content: f64,
    /// Confidence level 1 - alpha [default: 0.9].
    #[arg(long, value_parser = probability, conflicts_with = "alpha")]
    pub confidence: Option<f64>,
    /// Alternative to --confidence.
    #[arg(long, value_parser = probability)]
    pub alpha: Option<f64>,
    /// Coverage definition for two-sided intervals.
    #[arg(long, value_enum, default_value_t = CoverageDef::Content)]
    pub objective: CoverageDef,
    /// Lower quantile level of a two-sided interval [default: (1 - P) / 2].
    #[arg(long, value_parser = probability)]
    pub tau_lower: Option<f64>,
    /// Upper quantile level of a two-sided interval [default: (1 + P) / 2].
    #[arg(long, value_parser = probability)]
    pub tau_upper: Option<f64>,
}

impl ObjectiveArgs {
    pub fn confidence(&self) -> f64 {
        match (self.confidence, self.alpha) {
            (Some(c), _) => c,
            (None, Some(a)) => 1.0 - a,
            (None, None) => 0.9,
        }
    }

    pub fn resolve(&self) -> Result<CalibrationObjective, CliError> {
        let conf = self.confidence();
        let p = self.content;
        if self.kind != Kind::TwoSided && (self.tau_lower.is_some() || self.tau_upper.is_some()) {
            return Err(CliError::Usage("--tau-lower/--tau-upper apply to --kind two-sided only".into()));
        }
        let obj = match self.kind {
            Kind::Upper => CalibrationObjective::upper(p, conf)?,
            Kind::Lower => CalibrationObjective::lower(p, conf)?,
            Kind::TwoSided => {
                let tl = self.tau_lower.unwrap_or((1.0 - p) / 2.0);
                let tu = self.tau_upper.unwrap_or((1.0 + p) / 2.0);
                if tl >= tu {
                    return Err(CliError::Usage(format!("--tau-lower {tl} must be below --tau-upper {tu}")));
                }
                match self.objective {
                    CoverageDef::Content => CalibrationObjective::two_sided_content(tl, tu, Some(p), conf)?,
                    CoverageDef::Quantile => {
                        if ((tu - tl) - p).abs() > 1e-9 {
                            return Err(CliError::Usage(format!(
                                "quantile objective: tau-upper - tau-lower = {} must equal the content {p}",
                                tu - tl
                            )));
                        }
                        CalibrationObjective::two_sided_quantile(tl, tu, conf)?
                    }
                }
            }
        };
        Ok(obj)
    }
}

/// `plugin` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eta0(pub EtaInit);

fn eta0(text: &str) -> Result<Eta0, String> {
    if text.eq_ignore_ascii_case("plugin") || text.eq_ignore_ascii_case("plug-in") {
        Ok(Eta0(EtaInit::PlugIn))
    } else {
        positive(text).map(|value| Eta0(EtaInit::Fixed { value }))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Step-size preset: aggressive, moderate or conservative.
    #[arg(long, default_value = "moderate")]
    pub regime: Regime,
    /// Starting learning rate, or `plugin` for the density-based start.
    #[arg(long, value_parser = eta0)]
    pub eta0: Option<Eta0>,
    /// Step-size constant c in c / (1 + s)^gamma.
    #[arg(long = "rm-c", value_parser = positive)]
    pub c: Option<f64>,
    /// Step-size decay exponent gamma.
    #[arg(long = "rm-gamma")]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Bootstrap replicates per coverage estimate.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub eta_min: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub eta_max: Option<f64>,
}

impl ScheduleArgs {
    pub fn resolve(&self) -> Result<RMSchedule, CliError> {
        let mut s = self.regime.schedule();
        if let Some(Eta0(init)) = self.eta0 {
            s.eta0 = init;
        }
        s.c = self.c.unwrap_or(s.c);
        s.gamma = self.gamma.unwrap_or(s.gamma);
        s.max_iter = self.max_iter.unwrap_or(s.max_iter);
        s.bootstrap = self.bootstrap.unwrap_or(s.bootstrap);
        s.bracket = (self.eta_min.unwrap_or(s.bracket.0), self.eta_max.unwrap_or(s.bracket.1));
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Args)]
pub struct McmcArgs {
    /// Posterior sampler: exact, slice or rwmh.
    #[arg(long, default_value = "exact")]
    pub sampler: Sampler,
    /// Retained posterior draws per fit.
    #[arg(long, default_value_t = 4000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, value_parser = positive, default_value = "1")]
    pub init_scale: f64,
}

impl McmcArgs {
    pub fn resolve(&self) -> Result<MCMCConfig, CliError> {
        let cfg = MCMCConfig {
            n_draws: self.draws,
            burn_in: self.burn_in,
            thin: self.thin,
            sampler: self.sampler,
            init_scale: self.init_scale,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IntervalArgs {
    /// CSV file with one numeric column, or `air-lead` / `potency`.
    #[arg(long)]
    pub data: String,
    #[arg(long, default_value = "cal-gibbs")]
    pub method: Method,
    /// Use this learning rate instead of calibrating (cal-gibbs only).
    #[arg(long, value_parser = positive)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub data: String,
    /// Search a geometric grid of this many points instead of Robbins-Monro.
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Infeasible {
    Skip,
    Extremes,
}

impl From<Infeasible> for InfeasiblePolicy {
    fn from(v: Infeasible) -> Self {
        match v {
            Infeasible::Skip => InfeasiblePolicy::Skip,
            Infeasible::Extremes => InfeasiblePolicy::UseExtremes,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    /// Sampling distribution, e.g. normal(0,1), pareto(1,2), gamma(2,1).
    #[arg(long, default_value = "normal(0,1)")]
    pub dist: DistributionSpec,
    #[arg(long, value_delimiter = ',', default_value = "wilks,ym,cal-gibbs")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 300)]
    pub reps: usize,
    /// Benchmark handling below its minimum sample size.
    #[arg(long, value_enum, default_value_t = Infeasible::Skip)]
    pub infeasible: Infeasible,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub study: StudyArgs,
}

/// Sample sizes as `15..30` (inclusive) or `15,20,25`.
#[derive(Debug, Clone, PartialEq)]
pub struct NValues(pub Vec<usize>);

fn n_values(text: &str) -> Result<NValues, String> {
    let bad = || format!("'{text}' is not a range like 15..30 or a list like 15,20,25");
    let text = text.trim();
    let values: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err(bad());
    }
    Ok(NValues(values))
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sample sizes, `15..30` or `15,20,25`.
    #[arg(long, value_parser = n_values)]
    pub n_values: NValues,
    #[command(flatten)]
    pub study: StudyArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegimesArgs {
    #[arg(long, default_value = "normal(0,1)")]
    pub dist: DistributionSpec,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "aggressive,moderate,conservative")]
    pub regimes: Vec<Regime>,
    /// Calibration runs per regime.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Starting learning rate for every regime, or `plugin`.
    #[arg(long, value_parser = eta0)]
    pub eta0: Option<Eta0>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sides {
    #[value(alias = "upper", alias = "lower")]
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, Args)]
pub struct MinNArgs {
    #[arg(long, value_enum, default_value_t = Sides::OneSided)]
    pub kind: Sides,
    #[arg(long, value_parser = probability, default_value = "0.9")]
    pub content: f64,
    /// Confidence level 1 - alpha [default: 0.9].
    #[arg(long, value_parser = probability, conflicts_with = "alpha")]
    pub confidence: Option<f64>,
    #[arg(long, value_parser = probability)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
