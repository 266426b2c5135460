//! Ground-truth distribution families, the [`Sample`] type and the numeric
//! kernels shared by the rest of the crate.

mod sample;
pub mod special;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, StandardUniform};

pub use sample::Sample;
pub(crate) use sample::sorted_type1_quantile;
pub use special::{binom_cdf, binom_pmf, normal_cdf, normal_pdf, normal_quantile, reg_inc_beta};

use crate::error::{ensure_probability, Error, Result};
use crate::rng::rng_from_seed;

/// A fully specified continuous distribution used as simulation truth.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    /// Gamma with shape k and rate (inverse scale).
    Gamma { shape: f64, rate: f64 },
    /// Pareto type I on `[scale, inf)`, `F(x) = 1 - (scale / x)^shape`.
    Pareto { scale: f64, shape: f64 },
    NormalMixture { weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64> },
    Beta { a: f64, b: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")))
    }
}

impl DistributionSpec {
    pub fn standard_normal() -> Self {
        Self::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::ParameterDomain(format!("mean must be finite, got {mean}")));
                }
                positive("sd", *sd)
            }
            Self::Gamma { shape, rate } => {
                positive("shape", *shape)?;
                positive("rate", *rate)
            }
            Self::Pareto { scale, shape } => {
                positive("scale", *scale)?;
                positive("shape", *shape)
            }
            Self::Beta { a, b } => {
                positive("a", *a)?;
                positive("b", *b)
            }
            Self::NormalMixture { weights, means, sds } => {
                if weights.is_empty() || weights.len() != means.len() || weights.len() != sds.len() {
                    return Err(Error::ParameterDomain(
                        "mixture weights, means and sds must be nonempty and of equal length".into(),
                    ));
                }
                for w in weights {
                    positive("mixture weight", *w)?;
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::ParameterDomain(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
                for m in means {
                    if !m.is_finite() {
                        return Err(Error::ParameterDomain(format!("mean must be finite, got {m}")));
                    }
                }
                for s in sds {
                    positive("sd", *s)?;
                }
                Ok(())
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            Self::Gamma { shape, rate } => special::reg_lower_gamma(*shape, rate * x),
            Self::Pareto { scale, shape } => {
                if x <= *scale {
                    0.0
                } else {
                    -(shape * (scale / x).ln()).exp_m1()
                }
            }
            Self::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    reg_inc_beta(*a, *b, x).unwrap_or(f64::NAN)
                }
            }
            Self::NormalMixture { weights, means, sds } => weights
                .iter()
                .zip(means.iter().zip(sds))
                .map(|(w, (m, s))| w * normal_cdf((x - m) / s))
                .sum(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => special::normal_pdf((x - mean) / sd) / sd,
            Self::Gamma { shape, rate } => {
                if x < 0.0 || (x == 0.0 && *shape > 1.0) {
                    0.0
                } else {
                    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x
                        - special::ln_gamma(*shape))
                    .exp()
                }
            }
            Self::Pareto { scale, shape } => {
                if x < *scale {
                    0.0
                } else {
                    shape * scale.powf(*shape) / x.powf(shape + 1.0)
                }
            }
            Self::Beta { a, b } => {
                if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    let ln_beta =
                        special::ln_gamma(*a) + special::ln_gamma(*b) - special::ln_gamma(a + b);
                    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta).exp()
                }
            }
            Self::NormalMixture { weights, means, sds } => weights
                .iter()
                .zip(means.iter().zip(sds))
                .map(|(w, (m, s))| w * special::normal_pdf((x - m) / s) / s)
                .sum(),
        }
    }

    /// `inf { y : F(y) >= p }`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability("p", p)?;
        self.validate()?;
        Ok(match self {
            Self::Normal { mean, sd } => mean + sd * normal_quantile(p)?,
            Self::Pareto { scale, shape } => scale * (-(1.0 - p).ln() / shape).exp(),
            Self::Gamma { .. } => {
                let mut hi = 1.0;
                while self.cdf(hi) < p {
                    hi *= 2.0;
                }
                self.invert_cdf(p, 0.0, hi)
            }
            Self::Beta { .. } => self.invert_cdf(p, 0.0, 1.0),
            Self::NormalMixture { means, sds, .. } => {
                let z = normal_quantile(p)?;
                let (lo, hi) = means.iter().zip(sds).fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), (m, s)| (lo.min(m + s * z), hi.max(m + s * z)),
                );
                self.invert_cdf(p, lo - 1e-9, hi + 1e-9)
            }
        })
    }

    fn invert_cdf(&self, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Normal { mean, sd } => Normal::new(*mean, *sd).expect("validated").sample(rng),
            Self::Gamma { shape, rate } => {
                Gamma::new(*shape, 1.0 / rate).expect("validated").sample(rng)
            }
            Self::Pareto { scale, shape } => {
                // 1 - U lies in (0, 1].
                let u: f64 = rng.sample(StandardUniform);
                scale * (1.0 - u).powf(-1.0 / shape)
            }
            Self::Beta { a, b } => Beta::new(*a, *b).expect("validated").sample(rng),
            Self::NormalMixture { weights, means, sds } => {
                let u: f64 = rng.sample(StandardUniform);
                let mut acc = 0.0;
                let mut idx = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                Normal::new(means[idx], sds[idx]).expect("validated").sample(rng)
            }
        }
    }

    /// `n` i.i.d. draws; identical `(spec, n, seed)` gives identical output.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        self.validate()?;
        if n == 0 {
            return Err(Error::ParameterDomain("sample size must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        Sample::new((0..n).map(|_| self.draw(&mut rng)).collect())
    }

    /// Short label used in reports, e.g. `normal(0,1)`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

/// Free-function form of [`DistributionSpec::sample`].
pub fn sample_dist(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Sample> {
    spec.sample(n, seed)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            Self::Gamma { shape, rate } => write!(f, "gamma({shape},{rate})"),
            Self::Pareto { scale, shape } => write!(f, "pareto({scale},{shape})"),
            Self::Beta { a, b } => write!(f, "beta({a},{b})"),
            Self::NormalMixture { weights, means, sds } => {
                write!(f, "mixture(")?;
                for (i, ((w, m), s)) in weights.iter().zip(means).zip(sds).enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{w},{m},{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `normal(0,1)`, `gamma(2,1)`, `pareto(1,2)`, `beta(5,2)` and
    /// `mixture(0.9,0,1;0.1,0,10)` (weight, mean, sd per component). A colon
    /// form such as `normal:0,1` is accepted as well.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ParameterDomain(format!("cannot parse distribution '{s}'"));
        let (name, args) = if let Some(open) = s.find('(') {
            let close = s.rfind(')').ok_or_else(bad)?;
            (&s[..open], &s[open + 1..close])
        } else if let Some((n, a)) = s.split_once(':') {
            (n, a)
        } else {
            return Err(bad());
        };
        let nums = |text: &str| -> Result<Vec<f64>> {
            text.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let two = |text: &str| -> Result<(f64, f64)> {
            match nums(text)?.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(bad()),
            }
        };
        let spec = match name.trim().to_ascii_lowercase().as_str() {
            "normal" => {
                let (mean, sd) = two(args)?;
                Self::Normal { mean, sd }
            }
            "gamma" => {
                let (shape, rate) = two(args)?;
                Self::Gamma { shape, rate }
            }
            "pareto" => {
                let (scale, shape) = two(args)?;
                Self::Pareto { scale, shape }
            }
            "beta" => {
                let (a, b) = two(args)?;
                Self::Beta { a, b }
            }
            "mixture" => {
                let (mut weights, mut means, mut sds) = (vec![], vec![], vec![]);
                for comp in args.split(';') {
                    match nums(comp)?.as_slice() {
                        [w, m, sd] => {
                            weights.push(*w);
                            means.push(*m);
                            sds.push(*sd);
                        }
                        _ => return Err(bad()),
                    }
                }
                Self::NormalMixture { weights, means, sds }
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::standard_normal(),
            DistributionSpec::Normal { mean: 10.0, sd: 3.0 },
            DistributionSpec::Gamma { shape: 2.0, rate: 1.0 },
            DistributionSpec::Pareto { scale: 1.0, shape: 2.0 },
            DistributionSpec::NormalMixture {
                weights: vec![0.9, 0.1],
                means: vec![0.0, 0.0],
                sds: vec![1.0, 10.0],
            },
            DistributionSpec::Beta { a: 5.0, b: 2.0 },
        ]
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DistributionSpec::standard_normal();
        assert_eq!(d.sample(5, 42).unwrap(), d.sample(5, 42).unwrap());
        assert_ne!(d.sample(5, 42).unwrap(), d.sample(5, 43).unwrap());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = [
            DistributionSpec::Normal { mean: 0.0, sd: 0.0 },
            DistributionSpec::Gamma { shape: -1.0, rate: 1.0 },
            DistributionSpec::Pareto { scale: 1.0, shape: 0.0 },
            DistributionSpec::Beta { a: 1.0, b: -2.0 },
            DistributionSpec::NormalMixture {
                weights: vec![0.5, 0.4],
                means: vec![0.0, 0.0],
                sds: vec![1.0, 1.0],
            },
        ];
        for d in bad {
            assert!(matches!(d.sample(3, 1), Err(Error::ParameterDomain(_))), "{d:?}");
        }
    }

    #[test]
    fn mixture_variance_matches_moment_identity() {
        let d = &families()[4];
        let s = d.sample(100_000, 11).unwrap();
        // 0.9 * 1 + 0.1 * 100
        assert!((s.variance() - 10.9).abs() / 10.9 < 0.05, "{}", s.variance());
    }

    #[test]
    fn pareto_upper_decile_matches_formula() {
        let d = DistributionSpec::Pareto { scale: 1.0, shape: 2.0 };
        let s = d.sample(100_000, 5).unwrap();
        let q = s.empirical_quantile(0.9).unwrap();
        let want = 0.1f64.powf(-0.5);
        assert!((q - want).abs() / want < 0.02, "{q}");
    }

    #[test]
    fn closed_form_quantiles() {
        let z = DistributionSpec::standard_normal().quantile(0.9).unwrap();
        assert!((z - 1.2816).abs() < 1e-4);
        let p = DistributionSpec::Pareto { scale: 1.0, shape: 2.0 };
        assert_eq!(p.cdf(1.0), 0.0);
        assert!((p.quantile(0.75).unwrap() - 2.0).abs() < 1e-12);
        // Reference values from an independent implementation.
        let g = DistributionSpec::Gamma { shape: 2.0, rate: 1.0 }.quantile(0.9).unwrap();
        assert!((g - 3.889_720_169_867_429).abs() < 1e-9);
        let b = DistributionSpec::Beta { a: 5.0, b: 2.0 }.quantile(0.9).unwrap();
        assert!((b - 0.907_404_741_086_871_3).abs() < 1e-9);
        assert!(DistributionSpec::standard_normal().quantile(1.0).is_err());
    }

    #[test]
    fn cdf_inverts_quantile_on_grid() {
        for d in families() {
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let q = d.quantile(p).unwrap();
                assert!((d.cdf(q) - p).abs() <= 1e-8, "{d}: p = {p}, F(Q(p)) = {}", d.cdf(q));
            }
        }
    }

    #[test]
    fn quantile_of_cdf_does_not_exceed_x() {
        for d in families() {
            for i in 1..40 {
                let x = d.quantile(i as f64 / 40.0).unwrap() * 1.01 + 0.01;
                let p = d.cdf(x);
                if p > 0.0 && p < 1.0 {
                    assert!(d.quantile(p).unwrap() <= x + 1e-7 * x.abs().max(1.0), "{d} at {x}");
                }
            }
        }
    }

    #[test]
    fn pdf_is_nonnegative_and_integrates_to_cdf_increments() {
        for d in families() {
            let a = d.quantile(0.2).unwrap();
            let b = d.quantile(0.6).unwrap();
            let m = 2000;
            let h = (b - a) / m as f64;
            let simpson: f64 = (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * d.pdf(a + i as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0;
            assert!((simpson - 0.4).abs() < 1e-6, "{d}: {simpson}");
            assert!(d.pdf(a) >= 0.0);
        }
    }

    #[test]
    fn large_samples_pass_ks_check() {
        // Critical value at significance 0.001 is about 1.9495 / sqrt(n).
        let n = 100_000;
        let crit = 1.9495 / (n as f64).sqrt();
        for (i, d) in families().into_iter().enumerate() {
            let s = d.sample(n, 1000 + i as u64).unwrap();
            let ks = ks_statistic(s.sorted(), |x| d.cdf(x));
            assert!(ks < crit, "{d}: KS {ks} >= {crit}");
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for d in families() {
            let parsed: DistributionSpec = d.to_string().parse().unwrap();
            assert_eq!(parsed, d);
        }
        assert_eq!(
            "normal:0,1".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::standard_normal()
        );
        assert!("cauchy(0,1)".parse::<DistributionSpec>().is_err());
        assert!("normal(0,-1)".parse::<DistributionSpec>().is_err());
    }
}
