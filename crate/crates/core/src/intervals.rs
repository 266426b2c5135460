//! Tolerance interval values and the rules that turn posterior draws into
//! one-sided bounds or a two-sided interval.

use serde::{Deserialize, Serialize};

use crate::distributions::sorted_type1_quantile;
use crate::error::{ensure_probability, Error, Result};
use crate::gibbs::{CheckLossPosterior, JointPosteriorDraws, PosteriorDraws};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    UpperOneSided,
    LowerOneSided,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CalGibbs,
    Wilks,
    Ym,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CalGibbs => "cal-gibbs",
            Self::Wilks => "wilks",
            Self::Ym => "ym",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cal-gibbs" | "calgibbs" | "gibbs" => Ok(Self::CalGibbs),
            "wilks" => Ok(Self::Wilks),
            "ym" => Ok(Self::Ym),
            other => Err(Error::ParameterDomain(format!("unknown method '{other}'"))),
        }
    }
}

/// Which notion of coverage an interval was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Content,
    Quantile,
    NotApplicable,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Content => "content",
            Self::Quantile => "quantile",
            Self::NotApplicable => "n/a",
        }
    }
}

/// Interval `[lower, upper]` claimed to contain at least `content` of the
/// population with probability `confidence`. One-sided intervals carry an
/// infinite marker on the open side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceInterval {
    pub kind: IntervalKind,
    pub content: f64,
    pub confidence: f64,
    #[serde(with = "bound_serde")]
    pub lower: f64,
    #[serde(with = "bound_serde")]
    pub upper: f64,
    pub method: Method,
    pub objective: Objective,
}

impl ToleranceInterval {
    pub fn upper_one_sided(content: f64, confidence: f64, upper: f64, method: Method) -> Result<Self> {
        Self::build(IntervalKind::UpperOneSided, content, confidence, f64::NEG_INFINITY, upper, method, Objective::NotApplicable)
    }

    pub fn lower_one_sided(content: f64, confidence: f64, lower: f64, method: Method) -> Result<Self> {
        Self::build(IntervalKind::LowerOneSided, content, confidence, lower, f64::INFINITY, method, Objective::NotApplicable)
    }

    pub fn two_sided(
        content: f64,
        confidence: f64,
        lower: f64,
        upper: f64,
        method: Method,
        objective: Objective,
    ) -> Result<Self> {
        Self::build(IntervalKind::TwoSided, content, confidence, lower, upper, method, objective)
    }

    fn build(
        kind: IntervalKind,
        content: f64,
        confidence: f64,
        lower: f64,
        upper: f64,
        method: Method,
        objective: Objective,
    ) -> Result<Self> {
        ensure_probability("content", content)?;
        ensure_probability("confidence", confidence)?;
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::ParameterDomain("interval endpoint is NaN".into()));
        }
        let finite_ok = match kind {
            IntervalKind::UpperOneSided => lower == f64::NEG_INFINITY && upper.is_finite(),
            IntervalKind::LowerOneSided => upper == f64::INFINITY && lower.is_finite(),
            IntervalKind::TwoSided => lower.is_finite() && upper.is_finite(),
        };
        if !finite_ok {
            return Err(Error::ParameterDomain(format!("endpoints ({lower}, {upper}) do not fit a {kind:?} interval")));
        }
        if lower > upper {
            return Err(Error::Ordering { lower, upper });
        }
        Ok(Self { kind, content, confidence, lower, upper, method, objective })
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    /// `U - L` for two-sided intervals, the finite endpoint otherwise.
    pub fn length(&self) -> f64 {
        match self.kind {
            IntervalKind::TwoSided => self.upper - self.lower,
            IntervalKind::UpperOneSided => self.upper,
            IntervalKind::LowerOneSided => self.lower,
        }
    }
}

/// Infinite endpoints are written as the strings `"-inf"` / `"inf"` so the
/// JSON stays valid.
mod bound_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("invalid bound '{other}'"))),
            },
        }
    }
}

fn sorted_copy(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Type-1 `(1 - alpha)` quantile of the draws.
pub fn upper_bound_from_draws(d: &PosteriorDraws, alpha: f64) -> Result<f64> {
    ensure_probability("alpha", alpha)?;
    if d.draws.is_empty() {
        return Err(Error::EmptyInput("posterior draws"));
    }
    Ok(sorted_type1_quantile(&sorted_copy(&d.draws), 1.0 - alpha))
}

/// Type-1 `alpha` quantile of the draws.
pub fn lower_bound_from_draws(d: &PosteriorDraws, alpha: f64) -> Result<f64> {
    ensure_probability("alpha", alpha)?;
    if d.draws.is_empty() {
        return Err(Error::EmptyInput("posterior draws"));
    }
    Ok(sorted_type1_quantile(&sorted_copy(&d.draws), alpha))
}

/// Output of the symmetry rule; `lower + upper == 2 * mid_mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryBounds {
    pub lower: f64,
    pub upper: f64,
    pub mid_mean: f64,
}

/// Symmetry rule on joint draws: with `m` the posterior mean of the
/// midpoints `(q_L + q_U) / 2`, `U` is the `(1 - alpha)` quantile of
/// `max(q_U, 2m - q_L)` and `L = 2m - U`.
pub fn two_sided_symmetry(j: &JointPosteriorDraws, alpha: f64) -> Result<SymmetryBounds> {
    ensure_probability("alpha", alpha)?;
    if j.pairs.is_empty() {
        return Err(Error::EmptyInput("joint posterior draws"));
    }
    let mid_mean = j.pairs.iter().map(|&(l, u)| 0.5 * (l + u)).sum::<f64>() / j.pairs.len() as f64;
    let reach: Vec<f64> = j.pairs.iter().map(|&(l, u)| u.max(2.0 * mid_mean - l)).collect();
    let upper = sorted_type1_quantile(&sorted_copy(&reach), 1.0 - alpha);
    Ok(SymmetryBounds { lower: 2.0 * mid_mean - upper, upper, mid_mean })
}

/// Fraction of pairs with `lower <= q_L` and `q_U <= upper`.
pub fn retention(pairs: &[(f64, f64)], lower: f64, upper: f64) -> f64 {
    if pairs.is_empty() {
        return f64::NAN;
    }
    pairs.iter().filter(|&&(l, u)| lower <= l && u <= upper).count() as f64 / pairs.len() as f64
}

/// Symmetry rule evaluated on the product of two exact marginal posteriors,
/// valid when the ordering constraint removes negligible mass.
pub(crate) fn exact_symmetry(
    lower: &CheckLossPosterior,
    upper: &CheckLossPosterior,
    alpha: f64,
) -> SymmetryBounds {
    let mid_mean = 0.5 * (lower.mean() + upper.mean());
    let target = 1.0 - alpha;
    let g = |u: f64| upper.cdf(u) * (1.0 - lower.cdf(2.0 * mid_mean - u));
    let eps = alpha / 4.0;
    let mut lo = upper.quantile(target);
    let mut hi = upper.quantile(1.0 - eps).max(2.0 * mid_mean - lower.quantile(eps));
    let mut widen = (hi - lo).abs().max(1e-12);
    while g(hi) < target {
        hi += widen;
        widen *= 2.0;
    }
    if g(lo) >= target {
        hi = lo;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    SymmetryBounds { lower: 2.0 * mid_mean - hi, upper: hi, mid_mean }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::gibbs::{exact_pair_posteriors, GibbsSpec1D, GibbsSpec2D};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn draws(v: Vec<f64>) -> PosteriorDraws {
        PosteriorDraws { draws: v, seed: 0, acceptance_rate: None }
    }

    fn joint(pairs: Vec<(f64, f64)>) -> JointPosteriorDraws {
        JointPosteriorDraws { pairs, seed: 0, acceptance_rate: None }
    }

    #[test]
    fn one_sided_fixtures() {
        let d = draws((1..=100).map(f64::from).collect());
        assert_eq!(upper_bound_from_draws(&d, 0.1).unwrap(), 90.0);
        assert_eq!(lower_bound_from_draws(&d, 0.1).unwrap(), 10.0);
        let c = draws(vec![4.2; 37]);
        assert_eq!(upper_bound_from_draws(&c, 0.05).unwrap(), 4.2);
        assert_eq!(lower_bound_from_draws(&c, 0.3).unwrap(), 4.2);
        assert!(matches!(upper_bound_from_draws(&draws(vec![]), 0.1), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn symmetry_fixtures() {
        let b = two_sided_symmetry(&joint(vec![(1.5, 4.0); 10]), 0.1).unwrap();
        assert_eq!((b.lower, b.upper, b.mid_mean), (1.5, 4.0, 2.75));

        let b = two_sided_symmetry(&joint(vec![(0.0, 1.0), (0.0, 3.0), (-2.0, 1.0), (-2.0, 3.0)]), 0.25).unwrap();
        assert_eq!(b.mid_mean, 0.5);
        assert_eq!(b.upper, 3.0);
        assert_eq!(b.lower, -2.0);
    }

    #[test]
    fn interval_constructors_validate() {
        assert!(ToleranceInterval::two_sided(0.9, 0.9, 2.0, 1.0, Method::Wilks, Objective::Content).is_err());
        assert!(ToleranceInterval::upper_one_sided(1.5, 0.9, 1.0, Method::Wilks).is_err());
        let t = ToleranceInterval::upper_one_sided(0.9, 0.9, 3.0, Method::Ym).unwrap();
        assert_eq!(t.lower, f64::NEG_INFINITY);
        assert_eq!(t.length(), 3.0);
        let l = ToleranceInterval::lower_one_sided(0.9, 0.9, -1.0, Method::Ym).unwrap();
        assert_eq!(l.length(), -1.0);
    }

    #[test]
    fn json_round_trip_with_infinite_marker() {
        let t = ToleranceInterval::upper_one_sided(0.75, 0.85, 1000.0, Method::Wilks).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.contains("\"-inf\""));
        let back: ToleranceInterval = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn correlated_pairs_symmetry_retention() {
        // Correlated joint draws: symmetry rule retains ~1-alpha of pairs,
        // independent marginal (1-alpha) bounds only ~(1-alpha)^2.
        let mut rng = rng_from_seed(17);
        let z = Normal::new(0.0, 1.0).unwrap();
        let pairs: Vec<(f64, f64)> = (0..20_000)
            .map(|_| {
                let (a, b): (f64, f64) = (z.sample(&mut rng), z.sample(&mut rng));
                (-2.0 + 0.3 * a, 2.0 + 0.3 * (0.2 * a + 0.98 * b))
            })
            .collect();
        let j = joint(pairs.clone());
        let b = two_sided_symmetry(&j, 0.1).unwrap();
        let sym = retention(&pairs, b.lower, b.upper);
        let lows: Vec<f64> = sorted_copy(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let highs: Vec<f64> = sorted_copy(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        let marg = retention(&pairs, sorted_type1_quantile(&lows, 0.1), sorted_type1_quantile(&highs, 0.9));
        assert!((0.88..=0.92).contains(&sym), "{sym}");
        assert!(marg < sym, "{marg} vs {sym}");
    }

    #[test]
    fn exact_symmetry_matches_draw_rule() {
        let s = DistributionSpec::standard_normal().sample(60, 3).unwrap();
        let (lower, upper) = exact_pair_posteriors(&s, &GibbsSpec2D::new(0.05, 0.95, 2.0)).unwrap();
        let exact = exact_symmetry(&lower, &upper, 0.1);
        assert!((exact.lower + exact.upper - 2.0 * exact.mid_mean).abs() < 1e-12);
        let ld = lower.draws(400_000, 1);
        let ud = upper.draws(400_000, 2);
        let pairs: Vec<(f64, f64)> = ld.into_iter().zip(ud).collect();
        let mc = two_sided_symmetry(&joint(pairs), 0.1).unwrap();
        assert!((mc.upper - exact.upper).abs() < 0.01, "{} vs {}", mc.upper, exact.upper);
        assert!((mc.mid_mean - exact.mid_mean).abs() < 0.005);
    }

    #[test]
    fn exact_symmetry_of_single_posterior_reduces_to_quantiles() {
        let s = DistributionSpec::standard_normal().sample(40, 8).unwrap();
        let post = CheckLossPosterior::new(&s, &GibbsSpec1D::new(0.9, 1.0)).unwrap();
        let b = exact_symmetry(&post, &post, 0.2);
        assert!(b.upper >= post.quantile(0.8));
    }

    proptest! {
        #[test]
        fn symmetry_identities(
            raw in prop::collection::vec((-10.0f64..10.0, 0.001f64..5.0), 1..300),
            alpha in 0.01f64..0.5,
        ) {
            let pairs: Vec<(f64, f64)> = raw.iter().map(|&(l, g)| (l, l + g)).collect();
            let j = joint(pairs.clone());
            let b = two_sided_symmetry(&j, alpha).unwrap();
            let scale = b.upper.abs().max(b.lower.abs()).max(1.0);
            prop_assert!((b.lower + b.upper - 2.0 * b.mid_mean).abs() <= 4.0 * f64::EPSILON * scale);
            let reach: Vec<f64> = pairs.iter().map(|&(l, u)| u.max(2.0 * b.mid_mean - l)).collect();
            let kept = reach.iter().filter(|&&r| r <= b.upper).count() as f64 / reach.len() as f64;
            prop_assert!(kept >= 1.0 - alpha - 1e-9);
            prop_assert!(kept <= 1.0 - alpha + 1.0 / reach.len() as f64 + 1e-12);
            // Monotone in alpha.
            let wider = two_sided_symmetry(&j, alpha / 2.0).unwrap();
            prop_assert!(wider.upper >= b.upper && wider.lower <= b.lower);
        }

        #[test]
        fn one_sided_monotone_and_reflected(v in prop::collection::vec(-100.0f64..100.0, 1..200), alpha in 0.02f64..0.5) {
            let d = draws(v.clone());
            prop_assert!(upper_bound_from_draws(&d, alpha / 2.0).unwrap() >= upper_bound_from_draws(&d, alpha).unwrap());
            let mut uniq = v.clone();
            uniq.sort_by(f64::total_cmp);
            uniq.dedup();
            let n = uniq.len() as f64;
            // Reflection holds exactly when n * alpha is not an integer.
            if uniq.len() == v.len() && ((n * alpha) - (n * alpha).round()).abs() > 1e-6 {
                let neg = draws(v.iter().map(|x| -x).collect());
                prop_assert_eq!(lower_bound_from_draws(&neg, alpha).unwrap(), -upper_bound_from_draws(&d, alpha).unwrap());
            }
        }
    }
}
