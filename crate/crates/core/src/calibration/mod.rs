//! Learning-rate calibration: bootstrap coverage estimates, Robbins-Monro
//! iteration with a grid-search fallback, plug-in starting values and the
//! end-to-end calibrated tolerance interval.

mod plugin;

pub use plugin::{kde, plugin_eta0, silverman_bandwidth, PlugInEta};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Sample;
use crate::error::{ensure_positive, ensure_probability, Error, Result};
use crate::gibbs::{
    exact_pair_posteriors, overlap_bound, sample_posterior_1d, sample_posterior_2d, CheckLossPosterior,
    GibbsSpec1D, GibbsSpec2D, JointPosteriorDraws, MCMCConfig, Sampler,
};
use crate::intervals::{
    exact_symmetry, lower_bound_from_draws, two_sided_symmetry, upper_bound_from_draws, IntervalKind, Method,
    Objective, ToleranceInterval,
};
use crate::rng::{derive_seed, rng_from_seed};

const RM_STREAM: u64 = 1;
const GRID_STREAM: u64 = 2;
const FINAL_STREAM: u64 = 3;

/// Below this bound on the mass removed by `q_L < q_U`, the symmetry rule is
/// evaluated on the untruncated product of the exact marginals.
const NEGLIGIBLE_OVERLAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind {
    OneSidedUpper { content: f64 },
    OneSidedLower { content: f64 },
    TwoSidedQuantile { tau_lower: f64, tau_upper: f64 },
    TwoSidedContent { tau_lower: f64, tau_upper: f64, content: f64 },
}

/// What a calibrated interval must achieve, and with which confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationObjective {
    pub kind: ObjectiveKind,
    pub confidence: f64,
}

/// Differences of probabilities, cleaned of representation noise (15 decimals).
fn round_prob(x: f64) -> f64 {
    (x * 1e15).round() / 1e15
}

impl CalibrationObjective {
    pub fn upper(content: f64, confidence: f64) -> Result<Self> {
        Self { kind: ObjectiveKind::OneSidedUpper { content }, confidence }.checked()
    }

    pub fn lower(content: f64, confidence: f64) -> Result<Self> {
        Self { kind: ObjectiveKind::OneSidedLower { content }, confidence }.checked()
    }

    pub fn two_sided_quantile(tau_lower: f64, tau_upper: f64, confidence: f64) -> Result<Self> {
        Self { kind: ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper }, confidence }.checked()
    }

    /// Content objective; `content` defaults to `tau_upper - tau_lower`.
    pub fn two_sided_content(tau_lower: f64, tau_upper: f64, content: Option<f64>, confidence: f64) -> Result<Self> {
        let content = content.unwrap_or_else(|| round_prob(tau_upper - tau_lower));
        Self { kind: ObjectiveKind::TwoSidedContent { tau_lower, tau_upper, content }, confidence }.checked()
    }

    fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_probability("confidence", self.confidence)?;
        match self.kind {
            ObjectiveKind::OneSidedUpper { content } | ObjectiveKind::OneSidedLower { content } => {
                ensure_probability("content", content)
            }
            ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper } => check_taus(tau_lower, tau_upper),
            ObjectiveKind::TwoSidedContent { tau_lower, tau_upper, content } => {
                check_taus(tau_lower, tau_upper)?;
                ensure_probability("content", content)
            }
        }
    }

    /// `1 - confidence`, reported as 0.1 rather than 0.09999999999999998.
    pub fn alpha(&self) -> f64 {
        round_prob(1.0 - self.confidence)
    }

    /// Population proportion the resulting interval is reported to contain.
    pub fn content(&self) -> f64 {
        match self.kind {
            ObjectiveKind::OneSidedUpper { content }
            | ObjectiveKind::OneSidedLower { content }
            | ObjectiveKind::TwoSidedContent { content, .. } => content,
            ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper } => round_prob(tau_upper - tau_lower),
        }
    }

    pub fn interval_kind(&self) -> IntervalKind {
        match self.kind {
            ObjectiveKind::OneSidedUpper { .. } => IntervalKind::UpperOneSided,
            ObjectiveKind::OneSidedLower { .. } => IntervalKind::LowerOneSided,
            _ => IntervalKind::TwoSided,
        }
    }

    pub fn objective_tag(&self) -> Objective {
        match self.kind {
            ObjectiveKind::TwoSidedContent { .. } => Objective::Content,
            _ => Objective::Quantile,
        }
    }

    fn is_success(&self, outcome_quantile: bool, outcome_content: bool) -> bool {
        match self.objective_tag() {
            Objective::Content => outcome_content,
            _ => outcome_quantile,
        }
    }
}

fn check_taus(tau_lower: f64, tau_upper: f64) -> Result<()> {
    ensure_probability("tau_lower", tau_lower)?;
    ensure_probability("tau_upper", tau_upper)?;
    if tau_lower >= tau_upper {
        return Err(Error::ParameterDomain(format!("tau_lower {tau_lower} must be below tau_upper {tau_upper}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaInit {
    Fixed { value: f64 },
    PlugIn,
}

/// Robbins-Monro step sizes `kappa_s = c / (1 + s)^gamma`, iteration budget,
/// bootstrap size and the bracket every iterate is clipped into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RMSchedule {
    pub eta0: EtaInit,
    pub c: f64,
    pub gamma: f64,
    pub max_iter: usize,
    pub bootstrap: usize,
    pub bracket: (f64, f64),
}

pub const DEFAULT_BRACKET: (f64, f64) = (1e-4, 50.0);

impl Default for RMSchedule {
    fn default() -> Self {
        Regime::Moderate.schedule()
    }
}

impl RMSchedule {
    pub fn with_eta0(mut self, eta0: f64) -> Self {
        self.eta0 = EtaInit::Fixed { value: eta0 };
        self
    }

    pub fn with_bootstrap(mut self, b: usize) -> Self {
        self.bootstrap = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("c", self.c)?;
        if !(self.gamma >= 0.5 && self.gamma <= 1.0) {
            return Err(Error::ParameterDomain(format!("gamma must lie in [0.5, 1], got {}", self.gamma)));
        }
        if self.max_iter == 0 {
            return Err(Error::ParameterDomain("max_iter must be positive".into()));
        }
        if self.bootstrap < 50 {
            return Err(Error::ParameterDomain(format!("at least 50 bootstrap replicates are needed, got {}", self.bootstrap)));
        }
        let (lo, hi) = self.bracket;
        ensure_positive("bracket lower end", lo)?;
        ensure_positive("bracket upper end", hi)?;
        if lo >= hi {
            return Err(Error::ParameterDomain(format!("bracket ({lo}, {hi}) is empty")));
        }
        if let EtaInit::Fixed { value } = self.eta0 {
            ensure_positive("eta0", value)?;
        }
        Ok(())
    }

    pub fn step(&self, s: usize) -> f64 {
        self.c / (1.0 + s as f64).powf(self.gamma)
    }

    fn clip(&self, eta: f64) -> f64 {
        eta.clamp(self.bracket.0, self.bracket.1)
    }
}

/// Named step-size presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Conservative,
    Moderate,
    Aggressive,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Aggressive, Regime::Moderate, Regime::Conservative];

    /// Preset with a plug-in starting value and `B = 200`.
    pub fn schedule(&self) -> RMSchedule {
        let (c, gamma, max_iter) = match self {
            Self::Conservative => (0.2, 0.9, 6),
            Self::Moderate => (0.5, 0.75, 25),
            Self::Aggressive => (1.75, 0.5, 10),
        };
        RMSchedule { eta0: EtaInit::PlugIn, c, gamma, max_iter, bootstrap: 200, bracket: DEFAULT_BRACKET }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Conservative => "conservative",
            Self::Moderate => "moderate",
            Self::Aggressive => "aggressive",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conservative" => Ok(Self::Conservative),
            "moderate" => Ok(Self::Moderate),
            "aggressive" => Ok(Self::Aggressive),
            other => Err(Error::ParameterDomain(format!("unknown regime '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    None,
    GridSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iter: usize,
    pub eta: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub eta_hat: f64,
    pub eta0: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub converged: bool,
    pub fallback_used: Fallback,
    pub plugin_degenerate: bool,
    pub seed: u64,
}

impl CalibrationResult {
    /// Coverage estimate at the last Robbins-Monro iterate that was evaluated.
    pub fn last_coverage(&self) -> Option<f64> {
        self.trajectory.last().map(|p| p.coverage)
    }
}

/// Interval endpoints of the Gibbs posterior at learning rate `eta`
/// (`-inf`/`inf` on the open side of one-sided objectives).
pub fn gibbs_bounds(s: &Sample, obj: &CalibrationObjective, eta: f64, mcmc: &MCMCConfig, seed: u64) -> Result<(f64, f64)> {
    let alpha = obj.alpha();
    match obj.kind {
        ObjectiveKind::OneSidedUpper { content } => {
            let spec = GibbsSpec1D::new(content, eta);
            let upper = if mcmc.sampler == Sampler::Exact {
                spec.validate()?;
                CheckLossPosterior::new(s, &spec)?.quantile(1.0 - alpha)
            } else {
                upper_bound_from_draws(&sample_posterior_1d(s, &spec, mcmc, seed)?, alpha)?
            };
            Ok((f64::NEG_INFINITY, upper))
        }
        ObjectiveKind::OneSidedLower { content } => {
            let spec = GibbsSpec1D::new(1.0 - content, eta);
            let lower = if mcmc.sampler == Sampler::Exact {
                spec.validate()?;
                CheckLossPosterior::new(s, &spec)?.quantile(alpha)
            } else {
                lower_bound_from_draws(&sample_posterior_1d(s, &spec, mcmc, seed)?, alpha)?
            };
            Ok((lower, f64::INFINITY))
        }
        ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper }
        | ObjectiveKind::TwoSidedContent { tau_lower, tau_upper, .. } => {
            let spec = GibbsSpec2D::new(tau_lower, tau_upper, eta);
            let bounds = if mcmc.sampler == Sampler::Exact {
                let (lp, up) = exact_pair_posteriors(s, &spec)?;
                if overlap_bound(&lp, &up) < NEGLIGIBLE_OVERLAP {
                    exact_symmetry(&lp, &up, alpha)
                } else {
                    let (pairs, rate) = crate::gibbs::ordered_pairs(&lp, &up, mcmc.n_draws, seed);
                    two_sided_symmetry(&JointPosteriorDraws { pairs, seed, acceptance_rate: Some(rate) }, alpha)?
                }
            } else {
                two_sided_symmetry(&sample_posterior_2d(s, &spec, mcmc, seed)?, alpha)?
            };
            Ok((bounds.lower, bounds.upper))
        }
    }
}

/// Result of one bootstrap replicate, scored against the original sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub lower: f64,
    pub upper: f64,
    /// The interval brackets the original sample's type-1 quantile(s).
    pub quantile_success: bool,
    /// The interval holds at least the target share of the original sample.
    pub content_success: bool,
    /// Success under the objective's own criterion.
    pub success: bool,
}

fn score(original: &Sample, obj: &CalibrationObjective, lower: f64, upper: f64) -> Result<ReplicateOutcome> {
    let n = original.len() as f64;
    let (quantile_success, content_success) = match obj.kind {
        ObjectiveKind::OneSidedUpper { content } => {
            (original.empirical_quantile(content)? <= upper, original.ecdf(upper) >= content)
        }
        ObjectiveKind::OneSidedLower { content } => {
            let at_or_above = original.sorted().iter().filter(|&&y| y >= lower).count() as f64;
            (lower <= original.empirical_quantile(1.0 - content)?, at_or_above / n >= content)
        }
        ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper } => (
            lower <= original.empirical_quantile(tau_lower)? && upper >= original.empirical_quantile(tau_upper)?,
            original.ecdf_content(lower, upper)? >= tau_upper - tau_lower,
        ),
        ObjectiveKind::TwoSidedContent { tau_lower, tau_upper, content } => (
            lower <= original.empirical_quantile(tau_lower)? && upper >= original.empirical_quantile(tau_upper)?,
            original.ecdf_content(lower, upper)? >= content,
        ),
    };
    Ok(ReplicateOutcome {
        lower,
        upper,
        quantile_success,
        content_success,
        success: obj.is_success(quantile_success, content_success),
    })
}

/// Fits the Gibbs posterior at `eta` to `b` bootstrap resamples and scores
/// each interval against the original sample. Replicates run in parallel
/// and are returned in replicate order.
pub fn bootstrap_outcomes(
    s: &Sample,
    eta: f64,
    obj: &CalibrationObjective,
    b: usize,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<Vec<ReplicateOutcome>> {
    ensure_positive("eta", eta)?;
    obj.validate()?;
    if s.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: s.len() });
    }
    if b == 0 {
        return Err(Error::ParameterDomain("at least one bootstrap replicate is needed".into()));
    }
    (0..b as u64)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(seed, &[rep]);
            let resample = s.resample(&mut rng_from_seed(rep_seed));
            let (lower, upper) = gibbs_bounds(&resample, obj, eta, mcmc, derive_seed(rep_seed, &[1]))?;
            score(s, obj, lower, upper)
        })
        .collect()
}

/// Bootstrap estimate of the coverage of the Gibbs interval at `eta`.
pub fn estimate_coverage(
    s: &Sample,
    eta: f64,
    obj: &CalibrationObjective,
    b: usize,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<f64> {
    let outcomes = bootstrap_outcomes(s, eta, obj, b, mcmc, seed)?;
    Ok(outcomes.iter().filter(|o| o.success).count() as f64 / outcomes.len() as f64)
}

struct RmRun {
    eta_hat: f64,
    trajectory: Vec<TrajectoryPoint>,
    converged: bool,
    stuck_at_floor: bool,
}

/// Robbins-Monro recursion with a pluggable coverage oracle. Stops early
/// once three consecutive updates land on the bracket floor.
fn rm_iterate<F>(eta0: f64, sched: &RMSchedule, target: f64, mut coverage: F) -> Result<RmRun>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let mut eta = sched.clip(eta0);
    let mut iterates = vec![eta];
    let mut trajectory = Vec::with_capacity(sched.max_iter);
    let mut floor_run = 0;
    let mut stuck_at_floor = false;
    for s in 0..sched.max_iter {
        let c = coverage(s, eta)?;
        trajectory.push(TrajectoryPoint { iter: s, eta, coverage: c });
        eta = sched.clip(eta + sched.step(s) * (c - target));
        iterates.push(eta);
        floor_run = if eta <= sched.bracket.0 { floor_run + 1 } else { 0 };
        if floor_run >= 3 {
            stuck_at_floor = true;
            break;
        }
    }
    let tail = &iterates[iterates.len().saturating_sub(3)..];
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let converged = !stuck_at_floor && tail.len() == 3 && (hi - lo) / hi < 0.05;
    Ok(RmRun { eta_hat: eta, trajectory, converged, stuck_at_floor })
}

/// Largest grid value whose coverage meets `target`, or the smallest grid
/// value (with `false`) when none does.
fn select_from_grid(grid: &[f64], coverages: &[f64], target: f64) -> (f64, bool) {
    grid.iter()
        .zip(coverages)
        .filter(|(_, &c)| c >= target)
        .map(|(&g, _)| g)
        .fold(None, |best: Option<f64>, g| Some(best.map_or(g, |b| b.max(g))))
        .map_or((grid[0], false), |g| (g, true))
}

fn resolve_eta0(s: &Sample, obj: &CalibrationObjective, sched: &RMSchedule) -> Result<(f64, bool)> {
    match sched.eta0 {
        EtaInit::Fixed { value } => Ok((sched.clip(value), false)),
        EtaInit::PlugIn => {
            let p = plugin_eta0(s, obj, sched.bracket)?;
            Ok((p.eta, p.degenerate))
        }
    }
}

/// Calibrates `eta` by Robbins-Monro. If the iterates sit on the bracket
/// floor for three consecutive steps the geometric grid search takes over.
pub fn robbins_monro_calibrate(
    s: &Sample,
    obj: &CalibrationObjective,
    sched: &RMSchedule,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<CalibrationResult> {
    sched.validate()?;
    obj.validate()?;
    mcmc.validate_for_intervals()?;
    let (eta0, plugin_degenerate) = resolve_eta0(s, obj, sched)?;
    let oracle = |eta: f64, cov_seed: u64| estimate_coverage(s, eta, obj, sched.bootstrap, mcmc, cov_seed);
    let mut result = calibrate_with_oracle(eta0, sched, obj.confidence, seed, oracle)?;
    result.plugin_degenerate = plugin_degenerate;
    Ok(result)
}

/// Robbins-Monro followed, if needed, by the fallback grid search, with
/// coverage supplied by `oracle(eta, seed)`.
fn calibrate_with_oracle<F>(eta0: f64, sched: &RMSchedule, target: f64, seed: u64, oracle: F) -> Result<CalibrationResult>
where
    F: Fn(f64, u64) -> Result<f64>,
{
    let run = rm_iterate(eta0, sched, target, |iter, eta| oracle(eta, derive_seed(seed, &[RM_STREAM, iter as u64])))?;
    if !run.stuck_at_floor {
        return Ok(CalibrationResult {
            eta_hat: run.eta_hat,
            eta0,
            trajectory: run.trajectory,
            converged: run.converged,
            fallback_used: Fallback::None,
            plugin_degenerate: false,
            seed,
        });
    }
    let crn = derive_seed(seed, &[GRID_STREAM]);
    let mut grid = geometric_grid(sched.bracket, 60);
    let mut coverages = grid.iter().map(|&eta| oracle(eta, crn)).collect::<Result<Vec<_>>>()?;
    let (best, found) = select_from_grid(&grid, &coverages, target);
    if found {
        if let Some(pos) = grid.iter().position(|&g| g == best).filter(|&p| p + 1 < grid.len()) {
            let (a, b) = (grid[pos], grid[pos + 1]);
            for i in 1..=10 {
                let eta = a * (b / a).powf(i as f64 / 11.0);
                coverages.push(oracle(eta, crn)?);
                grid.push(eta);
            }
        }
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid[i].total_cmp(&grid[j]));
    let sorted_grid: Vec<f64> = order.iter().map(|&i| grid[i]).collect();
    let sorted_cov: Vec<f64> = order.iter().map(|&i| coverages[i]).collect();
    let (eta_hat, _) = select_from_grid(&sorted_grid, &sorted_cov, target);

    let offset = run.trajectory.len();
    let mut trajectory = run.trajectory;
    trajectory.extend(
        grid.iter().zip(&coverages).enumerate().map(|(i, (&eta, &coverage))| TrajectoryPoint {
            iter: offset + i,
            eta,
            coverage,
        }),
    );
    Ok(CalibrationResult {
        eta_hat,
        eta0,
        trajectory,
        converged: false,
        fallback_used: Fallback::GridSearch,
        plugin_degenerate: false,
        seed,
    })
}

/// Geometric grid of `points` values spanning `bracket`.
pub fn geometric_grid(bracket: (f64, f64), points: usize) -> Vec<f64> {
    let (lo, hi) = bracket;
    if points < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo * (ratio * i as f64).exp() }).collect()
}

fn coverage_on_grid(
    s: &Sample,
    obj: &CalibrationObjective,
    grid: &[f64],
    b: usize,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    // Common bootstrap resamples across the grid keep the curve smooth.
    let crn = derive_seed(seed, &[GRID_STREAM]);
    grid.iter().map(|&eta| estimate_coverage(s, eta, obj, b, mcmc, crn)).collect()
}

/// Evaluates coverage on an ascending grid and returns the largest value
/// meeting the confidence target (the tightest interval that still covers).
pub fn grid_search_calibrate(
    s: &Sample,
    obj: &CalibrationObjective,
    grid: &[f64],
    b: usize,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<CalibrationResult> {
    obj.validate()?;
    mcmc.validate_for_intervals()?;
    if grid.is_empty() {
        return Err(Error::EmptyInput("eta grid"));
    }
    if grid.iter().any(|g| g.is_nan()) || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] <= 0.0 {
        return Err(Error::ParameterDomain("eta grid must be positive and strictly ascending".into()));
    }
    let coverages = coverage_on_grid(s, obj, grid, b, mcmc, seed)?;
    let (eta_hat, converged) = select_from_grid(grid, &coverages, obj.confidence);
    Ok(CalibrationResult {
        eta_hat,
        eta0: grid[0],
        trajectory: grid
            .iter()
            .zip(&coverages)
            .enumerate()
            .map(|(iter, (&eta, &coverage))| TrajectoryPoint { iter, eta, coverage })
            .collect(),
        converged,
        fallback_used: Fallback::None,
        plugin_degenerate: false,
        seed,
    })
}

/// Gibbs tolerance interval on `s` at a given learning rate.
pub fn gibbs_interval(
    s: &Sample,
    obj: &CalibrationObjective,
    eta: f64,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<ToleranceInterval> {
    let (lower, upper) = gibbs_bounds(s, obj, eta, mcmc, seed)?;
    let (p, conf) = (obj.content(), obj.confidence);
    let ti = match obj.interval_kind() {
        IntervalKind::UpperOneSided => ToleranceInterval::upper_one_sided(p, conf, upper, Method::CalGibbs)?,
        IntervalKind::LowerOneSided => ToleranceInterval::lower_one_sided(p, conf, lower, Method::CalGibbs)?,
        IntervalKind::TwoSided => {
            ToleranceInterval::two_sided(p, conf, lower, upper, Method::CalGibbs, obj.objective_tag())?
        }
    };
    Ok(ti.with_objective(obj.objective_tag()))
}

/// Calibrates `eta` on `s`, then fits the posterior to `s` at the
/// calibrated value and builds the interval.
pub fn calibrated_ti(
    s: &Sample,
    obj: &CalibrationObjective,
    sched: &RMSchedule,
    mcmc: &MCMCConfig,
    seed: u64,
) -> Result<(ToleranceInterval, CalibrationResult)> {
    let cal = robbins_monro_calibrate(s, obj, sched, mcmc, seed)?;
    let ti = gibbs_interval(s, obj, cal.eta_hat, mcmc, derive_seed(seed, &[FINAL_STREAM]))?;
    Ok((ti, cal))
}
