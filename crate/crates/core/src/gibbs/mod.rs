//! Check-loss Gibbs posteriors for one quantile and for an ordered pair of
//! quantiles, with exact and MCMC samplers.
//!
//! The one-quantile posterior is `exp{-eta * sum_i rho_tau(y_i - q)} pi0(q)`.
//! The pair posterior is sampled in the unconstrained coordinates
//! `theta1 = q_L`, `theta2 = ln(q_U - q_L)`, whose density carries the
//! Jacobian factor `e^theta2`.

mod exact;
mod mcmc;
mod risk;

pub use exact::CheckLossPosterior;
pub(crate) use exact::{ordered_pair_draws as ordered_pairs, overlap_bound};
pub(crate) use risk::CheckRisk;

use serde::{Deserialize, Serialize};

use crate::distributions::Sample;
use crate::error::{ensure_positive, ensure_probability, Error, Result};

/// Check (pinball) loss `rho_tau(r) = r (tau - 1{r < 0})`.
#[inline]
pub fn check_loss(r: f64, tau: f64) -> f64 {
    if r < 0.0 {
        (tau - 1.0) * r
    } else {
        tau * r
    }
}

/// Prior on a single quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum PriorSpec {
    /// Improper flat prior.
    #[default]
    Flat,
    Normal { mean: f64, sd: f64 },
    Uniform { a: f64, b: f64 },
}


impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Flat => Ok(()),
            Self::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::ParameterDomain("prior mean must be finite".into()));
                }
                ensure_positive("prior sd", sd)
            }
            Self::Uniform { a, b } => {
                if a.is_finite() && b.is_finite() && a < b {
                    Ok(())
                } else {
                    Err(Error::ParameterDomain(format!("uniform prior needs a < b, got ({a}, {b})")))
                }
            }
        }
    }

    /// Log prior density up to a constant; `-inf` outside a uniform support.
    pub fn log_density(&self, q: f64) -> f64 {
        match *self {
            Self::Flat => 0.0,
            Self::Normal { mean, sd } => -0.5 * ((q - mean) / sd).powi(2),
            Self::Uniform { a, b } => {
                if q >= a && q <= b {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Support as a closed interval, when the prior is flat or uniform.
    pub(crate) fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Flat => Some((f64::NEG_INFINITY, f64::INFINITY)),
            Self::Uniform { a, b } => Some((a, b)),
            Self::Normal { .. } => None,
        }
    }
}

/// Gibbs posterior for a single quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec1D {
    pub tau: f64,
    pub eta: f64,
    pub prior: PriorSpec,
}

impl GibbsSpec1D {
    pub fn new(tau: f64, eta: f64) -> Self {
        Self { tau, eta, prior: PriorSpec::Flat }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_probability("tau", self.tau)?;
        ensure_positive("eta", self.eta)?;
        self.prior.validate()
    }
}

/// Joint Gibbs posterior for the quantile pair `(Q_{tau_L}, Q_{tau_U})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec2D {
    pub tau_lower: f64,
    pub tau_upper: f64,
    pub eta: f64,
    pub prior_lower: PriorSpec,
    pub prior_upper: PriorSpec,
}

impl GibbsSpec2D {
    pub fn new(tau_lower: f64, tau_upper: f64, eta: f64) -> Self {
        Self { tau_lower, tau_upper, eta, prior_lower: PriorSpec::Flat, prior_upper: PriorSpec::Flat }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_probability("tau_lower", self.tau_lower)?;
        ensure_probability("tau_upper", self.tau_upper)?;
        if self.tau_lower >= self.tau_upper {
            return Err(Error::ParameterDomain(format!(
                "tau_lower must be below tau_upper, got {} >= {}",
                self.tau_lower, self.tau_upper
            )));
        }
        ensure_positive("eta", self.eta)?;
        self.prior_lower.validate()?;
        self.prior_upper.validate()
    }

    pub(crate) fn lower(&self) -> GibbsSpec1D {
        GibbsSpec1D { tau: self.tau_lower, eta: self.eta, prior: self.prior_lower }
    }

    pub(crate) fn upper(&self) -> GibbsSpec1D {
        GibbsSpec1D { tau: self.tau_upper, eta: self.eta, prior: self.prior_upper }
    }
}

/// `-eta * sum_i rho_tau(y_i - q) + ln pi0(q)`, up to an additive constant.
pub fn log_gibbs_1d(q: f64, s: &Sample, spec: &GibbsSpec1D) -> f64 {
    let prior = spec.prior.log_density(q);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    let loss: f64 = s.values().iter().map(|&y| check_loss(y - q, spec.tau)).sum();
    -spec.eta * loss + prior
}

/// Log density of the pair posterior in `(theta1, theta2)` coordinates,
/// including the log-Jacobian `theta2`.
pub fn log_gibbs_2d(theta1: f64, theta2: f64, s: &Sample, spec: &GibbsSpec2D) -> f64 {
    let q_lower = theta1;
    let q_upper = theta1 + theta2.exp();
    let prior = spec.prior_lower.log_density(q_lower) + spec.prior_upper.log_density(q_upper);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    let loss: f64 = s
        .values()
        .iter()
        .map(|&y| check_loss(y - q_lower, spec.tau_lower) + check_loss(y - q_upper, spec.tau_upper))
        .sum();
    -spec.eta * loss + theta2 + prior
}

/// Posterior sampling engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Closed-form inversion of the piecewise-exponential posterior
    /// (flat or uniform priors). Draws are i.i.d. and interval bounds are
    /// computed from the exact posterior distribution.
    Exact,
    /// Stepping-out/shrinkage slice sampler (coordinate-wise for pairs).
    Slice,
    /// Random-walk Metropolis-Hastings with proposal scales adapted during burn-in.
    RandomWalkMh,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "slice" => Ok(Self::Slice),
            "rwmh" | "mh" | "random-walk-mh" => Ok(Self::RandomWalkMh),
            other => Err(Error::ParameterDomain(format!("unknown sampler '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCMCConfig {
    pub n_draws: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub sampler: Sampler,
    /// Multiplier on the data-driven initial step size / slice width.
    pub init_scale: f64,
}

impl Default for MCMCConfig {
    fn default() -> Self {
        Self { n_draws: 4000, burn_in: 1000, thin: 1, sampler: Sampler::Exact, init_scale: 1.0 }
    }
}

impl MCMCConfig {
    pub fn with_sampler(sampler: Sampler) -> Self {
        Self { sampler, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_draws == 0 {
            return Err(Error::ParameterDomain("n_draws must be positive".into()));
        }
        if self.thin == 0 {
            return Err(Error::ParameterDomain("thin must be positive".into()));
        }
        ensure_positive("init_scale", self.init_scale)
    }

    /// Interval construction needs at least 100 posterior draws.
    pub(crate) fn validate_for_intervals(&self) -> Result<()> {
        self.validate()?;
        if self.n_draws < 100 {
            return Err(Error::ParameterDomain(format!(
                "at least 100 posterior draws are needed for interval construction, got {}",
                self.n_draws
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub draws: Vec<f64>,
    pub seed: u64,
    /// Metropolis-Hastings acceptance rate; `None` for other samplers.
    pub acceptance_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPosteriorDraws {
    /// `(q_L, q_U)` with `q_U > q_L` for every pair.
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    pub acceptance_rate: Option<f64>,
}

/// Draws from the one-quantile Gibbs posterior. MCMC chains start at the
/// type-1 sample quantile.
pub fn sample_posterior_1d(
    s: &Sample,
    spec: &GibbsSpec1D,
    cfg: &MCMCConfig,
    seed: u64,
) -> Result<PosteriorDraws> {
    spec.validate()?;
    cfg.validate()?;
    match cfg.sampler {
        Sampler::Exact => {
            let post = CheckLossPosterior::new(s, spec)?;
            Ok(PosteriorDraws { draws: post.draws(cfg.n_draws, seed), seed, acceptance_rate: None })
        }
        Sampler::Slice | Sampler::RandomWalkMh => mcmc::run_1d(s, spec, cfg, seed),
    }
}

/// Draws from the quantile-pair Gibbs posterior, returned as `(q_L, q_U)`.
pub fn sample_posterior_2d(
    s: &Sample,
    spec: &GibbsSpec2D,
    cfg: &MCMCConfig,
    seed: u64,
) -> Result<JointPosteriorDraws> {
    spec.validate()?;
    cfg.validate()?;
    match cfg.sampler {
        Sampler::Exact => {
            let (lower, upper) = exact_pair_posteriors(s, spec)?;
            let (pairs, rate) = exact::ordered_pair_draws(&lower, &upper, cfg.n_draws, seed);
            Ok(JointPosteriorDraws { pairs, seed, acceptance_rate: Some(rate) })
        }
        Sampler::Slice | Sampler::RandomWalkMh => mcmc::run_2d(s, spec, cfg, seed),
    }
}

/// The two exact marginal posteriors whose product, truncated to
/// `q_L < q_U`, is the pair posterior.
pub(crate) fn exact_pair_posteriors(
    s: &Sample,
    spec: &GibbsSpec2D,
) -> Result<(CheckLossPosterior, CheckLossPosterior)> {
    spec.validate()?;
    Ok((CheckLossPosterior::new(s, &spec.lower())?, CheckLossPosterior::new(s, &spec.upper())?))
}
