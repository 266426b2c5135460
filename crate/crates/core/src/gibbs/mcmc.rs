//! Slice and random-walk Metropolis-Hastings chains for the check-loss
//! posteriors.

use rand::distr::{Open01, StandardUniform};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{
    CheckRisk, GibbsSpec1D, GibbsSpec2D, JointPosteriorDraws, MCMCConfig, PosteriorDraws, Sampler,
};
use crate::distributions::Sample;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, TaskRng};

const STEP_OUT_LIMIT: usize = 1000;
const SHRINK_LIMIT: usize = 200;
const ADAPT_BATCH: usize = 50;

struct Target1D {
    risk: CheckRisk,
    spec: GibbsSpec1D,
}

impl Target1D {
    fn new(s: &Sample, spec: &GibbsSpec1D) -> Self {
        Self { risk: CheckRisk::new(s.sorted(), spec.tau), spec: *spec }
    }

    fn log_density(&self, q: f64) -> f64 {
        let prior = self.spec.prior.log_density(q);
        if prior == f64::NEG_INFINITY {
            return prior;
        }
        -self.spec.eta * self.risk.eval(q) + prior
    }
}

struct Target2D {
    lower: Target1D,
    upper: Target1D,
}

impl Target2D {
    fn log_density(&self, t1: f64, t2: f64) -> f64 {
        let gap = t2.exp();
        if !gap.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.lower.log_density(t1) + self.upper.log_density(t1 + gap) + t2
    }
}

fn slice_step<R: Rng, F: Fn(f64) -> f64>(x0: f64, fx0: f64, width: f64, f: &F, rng: &mut R) -> (f64, f64) {
    let level = fx0 - rng.sample::<f64, _>(Exp1);
    let u: f64 = rng.sample(StandardUniform);
    let mut left = x0 - width * u;
    let mut right = left + width;
    let j = (STEP_OUT_LIMIT as f64 * rng.sample::<f64, _>(StandardUniform)) as usize;
    let mut k = STEP_OUT_LIMIT - 1 - j;
    let mut j = j;
    while j > 0 && f(left) > level {
        left -= width;
        j -= 1;
    }
    while k > 0 && f(right) > level {
        right += width;
        k -= 1;
    }
    for _ in 0..SHRINK_LIMIT {
        let x1 = left + rng.sample::<f64, _>(Open01) * (right - left);
        let fx1 = f(x1);
        if fx1 > level {
            return (x1, fx1);
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
    }
    (x0, fx0)
}

struct Proposal {
    scale: f64,
    tried: usize,
    accepted: usize,
}

impl Proposal {
    fn new(scale: f64) -> Self {
        Self { scale, tried: 0, accepted: 0 }
    }

    fn step<R: Rng, F: Fn(f64) -> f64>(&mut self, x0: f64, fx0: f64, f: &F, rng: &mut R) -> (f64, f64) {
        let x1 = x0 + self.scale * rng.sample::<f64, _>(StandardNormal);
        let fx1 = f(x1);
        self.tried += 1;
        let log_u = rng.sample::<f64, _>(Open01).ln();
        if log_u < fx1 - fx0 {
            self.accepted += 1;
            (x1, fx1)
        } else {
            (x0, fx0)
        }
    }

    /// Nudges the scale toward a 20-40% acceptance rate and resets counters.
    fn adapt(&mut self) {
        if self.tried == 0 {
            return;
        }
        let rate = self.accepted as f64 / self.tried as f64;
        if rate < 0.2 {
            self.scale *= if rate < 0.05 { 0.5 } else { 0.75 };
        } else if rate > 0.4 {
            self.scale *= if rate > 0.7 { 2.0 } else { 1.35 };
        }
        self.tried = 0;
        self.accepted = 0;
    }
}

fn data_width(s: &Sample, init_scale: f64) -> f64 {
    let iqr = s.iqr();
    let base = if iqr > 0.0 { iqr } else { 1.0 };
    base * init_scale
}

fn check_start(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Initialization(format!("log density is not finite at the {what} starting point")))
    }
}

pub(super) fn run_1d(s: &Sample, spec: &GibbsSpec1D, cfg: &MCMCConfig, seed: u64) -> Result<PosteriorDraws> {
    let target = Target1D::new(s, spec);
    let f = |q: f64| target.log_density(q);
    let mut x = s.empirical_quantile(spec.tau)?;
    let mut fx = f(x);
    check_start(fx, "sample-quantile")?;
    let mut rng: TaskRng = rng_from_seed(seed);
    let width = data_width(s, cfg.init_scale);
    let mut mh = Proposal::new(width / (s.len() as f64).sqrt());
    let mut kept = Vec::with_capacity(cfg.n_draws);
    let total = cfg.burn_in + cfg.n_draws * cfg.thin;
    let (mut tried, mut accepted) = (0usize, 0usize);
    for it in 0..total {
        (x, fx) = match cfg.sampler {
            Sampler::RandomWalkMh => mh.step(x, fx, &f, &mut rng),
            _ => slice_step(x, fx, width, &f, &mut rng),
        };
        if it < cfg.burn_in {
            if cfg.sampler == Sampler::RandomWalkMh && (it + 1) % ADAPT_BATCH == 0 {
                mh.adapt();
            }
            if it + 1 == cfg.burn_in {
                (mh.tried, mh.accepted) = (0, 0);
            }
            continue;
        }
        tried = mh.tried;
        accepted = mh.accepted;
        if (it - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            kept.push(x);
        }
    }
    let acceptance_rate =
        (cfg.sampler == Sampler::RandomWalkMh && tried > 0).then(|| accepted as f64 / tried as f64);
    Ok(PosteriorDraws { draws: kept, seed, acceptance_rate })
}

pub(super) fn run_2d(s: &Sample, spec: &GibbsSpec2D, cfg: &MCMCConfig, seed: u64) -> Result<JointPosteriorDraws> {
    let target = Target2D { lower: Target1D::new(s, &spec.lower()), upper: Target1D::new(s, &spec.upper()) };
    let ql = s.empirical_quantile(spec.tau_lower)?;
    let qu = s.empirical_quantile(spec.tau_upper)?;
    let gap = (qu - ql).max(0.1 * s.iqr()).max(1e-8);
    let (mut t1, mut t2) = (ql, gap.ln());
    let mut ft = target.log_density(t1, t2);
    check_start(ft, "sample-quantile pair")?;

    let mut rng: TaskRng = rng_from_seed(seed);
    let width1 = data_width(s, cfg.init_scale);
    let width2 = cfg.init_scale;
    let root_n = (s.len() as f64).sqrt();
    let mut mh1 = Proposal::new(width1 / root_n);
    let mut mh2 = Proposal::new(width2 / root_n);
    let mut pairs = Vec::with_capacity(cfg.n_draws);
    let total = cfg.burn_in + cfg.n_draws * cfg.thin;
    for it in 0..total {
        {
            let f1 = |x: f64| target.log_density(x, t2);
            (t1, ft) = match cfg.sampler {
                Sampler::RandomWalkMh => mh1.step(t1, ft, &f1, &mut rng),
                _ => slice_step(t1, ft, width1, &f1, &mut rng),
            };
        }
        {
            let f2 = |x: f64| target.log_density(t1, x);
            (t2, ft) = match cfg.sampler {
                Sampler::RandomWalkMh => mh2.step(t2, ft, &f2, &mut rng),
                _ => slice_step(t2, ft, width2, &f2, &mut rng),
            };
        }
        if it < cfg.burn_in {
            if cfg.sampler == Sampler::RandomWalkMh && (it + 1) % ADAPT_BATCH == 0 {
                mh1.adapt();
                mh2.adapt();
            }
            if it + 1 == cfg.burn_in {
                (mh1.tried, mh1.accepted, mh2.tried, mh2.accepted) = (0, 0, 0, 0);
            }
            continue;
        }
        if (it - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            let upper = t1 + t2.exp();
            pairs.push((t1, if upper > t1 { upper } else { f64::from_bits(t1.to_bits() + 1) }));
        }
    }
    let acceptance_rate = (cfg.sampler == Sampler::RandomWalkMh).then(|| {
        let tried = mh1.tried + mh2.tried;
        if tried == 0 { 0.0 } else { (mh1.accepted + mh2.accepted) as f64 / tried as f64 }
    });
    Ok(JointPosteriorDraws { pairs, seed, acceptance_rate })
}
