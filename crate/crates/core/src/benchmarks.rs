//! Order-statistic comparators: Wilks tolerance limits, Young-Mathew
//! interpolated/extrapolated limits and minimum sample sizes.
//!
//! With `B ~ Binomial(n, P)` counting observations below the population
//! `P`-quantile, `Y_(k)` is an upper `(P, 1 - alpha)` bound when
//! `conf(k) = Pr(B <= k - 1) >= 1 - alpha`.

use serde::{Deserialize, Serialize};

use crate::distributions::{binom_cdf, binom_pmf, Sample};
use crate::error::{ensure_probability, Error, Result};
use crate::intervals::{Method, Objective, ToleranceInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// Order-statistic recipe behind a benchmark bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStatPlan {
    pub n: usize,
    /// `[k]` for one-sided plans, `[r, s]` for two-sided ones (1-indexed).
    pub indices: Vec<usize>,
    pub achieved_confidence: f64,
    /// Real-valued index `v` of a YM bound.
    pub fractional_index: Option<f64>,
    /// YM interpolation weight.
    pub lambda: Option<f64>,
    /// Number of spacings a YM bound reaches beyond the extreme order
    /// statistics when no interpolation is feasible.
    pub extrapolation: Option<f64>,
}

fn conf(k: usize, n: usize, p: f64) -> Result<f64> {
    binom_cdf(k as i64 - 1, n as u64, p)
}

fn check_inputs(n: usize, p: f64, alpha: f64) -> Result<()> {
    ensure_probability("content", p)?;
    ensure_probability("alpha", alpha)?;
    if n == 0 {
        return Err(Error::EmptyInput("sample"));
    }
    Ok(())
}

/// Smallest `n` with `1 - P^n >= 1 - alpha`.
pub fn min_n_one_sided(p: f64, alpha: f64) -> Result<usize> {
    ensure_probability("content", p)?;
    ensure_probability("alpha", alpha)?;
    let fails = |n: usize| n as f64 * p.ln() > alpha.ln();
    let mut n = (alpha.ln() / p.ln()).ceil().max(1.0) as usize;
    while fails(n) {
        n += 1;
    }
    while n > 1 && !fails(n - 1) {
        n -= 1;
    }
    Ok(n)
}

/// Smallest `n` with `(n - 1) P^n - n P^(n-1) + 1 >= 1 - alpha`, i.e. the
/// sample minimum and maximum bracket content `P` with confidence `1 - alpha`.
pub fn min_n_two_sided(p: f64, alpha: f64) -> Result<usize> {
    ensure_probability("content", p)?;
    ensure_probability("alpha", alpha)?;
    // Miss probability P^n + n P^(n-1) (1 - P), evaluated in log space.
    let miss = |n: usize| {
        let nf = n as f64;
        (nf * p.ln()).exp() + (nf.ln() + (nf - 1.0) * p.ln() + (-p).ln_1p()).exp()
    };
    let mut n = min_n_one_sided(p, alpha)?.max(2);
    while miss(n) > alpha {
        n += 1;
    }
    Ok(n)
}

pub fn wilks_upper_plan(n: usize, p: f64, alpha: f64) -> Result<OrderStatPlan> {
    check_inputs(n, p, alpha)?;
    for k in 1..=n {
        let c = conf(k, n, p)?;
        if c >= 1.0 - alpha {
            return Ok(OrderStatPlan {
                n,
                indices: vec![k],
                achieved_confidence: c,
                fractional_index: None,
                lambda: None,
                extrapolation: None,
            });
        }
    }
    Err(Error::Infeasible { n, min_n: min_n_one_sided(p, alpha)? })
}

pub fn wilks_lower_plan(n: usize, p: f64, alpha: f64) -> Result<OrderStatPlan> {
    check_inputs(n, p, alpha)?;
    // Pr(Y_(k) <= Q_{1-P}) = Pr(Bin(n, 1-P) >= k).
    for k in (1..=n).rev() {
        let c = 1.0 - binom_cdf(k as i64 - 1, n as u64, 1.0 - p)?;
        if c >= 1.0 - alpha {
            return Ok(OrderStatPlan {
                n,
                indices: vec![k],
                achieved_confidence: c,
                fractional_index: None,
                lambda: None,
                extrapolation: None,
            });
        }
    }
    Err(Error::Infeasible { n, min_n: min_n_one_sided(p, alpha)? })
}

/// Smallest span `m = s - r` with `Pr(B <= m - 1) >= 1 - alpha`, placed at
/// symmetric depth `r = ceil((n - m) / 2)`.
pub fn wilks_two_sided_plan(n: usize, p: f64, alpha: f64) -> Result<OrderStatPlan> {
    check_inputs(n, p, alpha)?;
    for m in 1..n {
        let c = conf(m, n, p)?;
        if c >= 1.0 - alpha {
            let r = (n - m).div_ceil(2);
            return Ok(OrderStatPlan {
                n,
                indices: vec![r, r + m],
                achieved_confidence: c,
                fractional_index: None,
                lambda: None,
                extrapolation: None,
            });
        }
    }
    Err(Error::Infeasible { n, min_n: min_n_two_sided(p, alpha)? })
}

pub fn wilks_upper(s: &Sample, p: f64, alpha: f64) -> Result<ToleranceInterval> {
    let plan = wilks_upper_plan(s.len(), p, alpha)?;
    ToleranceInterval::upper_one_sided(p, 1.0 - alpha, s.order_stat(plan.indices[0]), Method::Wilks)
}

pub fn wilks_lower(s: &Sample, p: f64, alpha: f64) -> Result<ToleranceInterval> {
    let plan = wilks_lower_plan(s.len(), p, alpha)?;
    ToleranceInterval::lower_one_sided(p, 1.0 - alpha, s.order_stat(plan.indices[0]), Method::Wilks)
}

pub fn wilks_two_sided(s: &Sample, p: f64, alpha: f64) -> Result<ToleranceInterval> {
    let plan = wilks_two_sided_plan(s.len(), p, alpha)?;
    ToleranceInterval::two_sided(
        p,
        1.0 - alpha,
        s.order_stat(plan.indices[0]),
        s.order_stat(plan.indices[1]),
        Method::Wilks,
        Objective::Content,
    )
}

/// Upper-side YM plan. The binomial confidence is continued linearly in the
/// index between integers: with `k` the minimal Wilks index,
/// `lambda = [(1 - alpha) - conf(k - 1)] / Pr(B = k - 1)` and the bound sits
/// at `v = k - 1 + lambda`. Without a feasible `k` the last segment's slope
/// is extended past `Y_(n)`.
pub fn ym_upper_plan(n: usize, p: f64, alpha: f64) -> Result<OrderStatPlan> {
    check_inputs(n, p, alpha)?;
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let target = 1.0 - alpha;
    match wilks_upper_plan(n, p, alpha) {
        Ok(w) => {
            let k = w.indices[0];
            let lambda = if k == 1 {
                1.0
            } else {
                ((target - conf(k - 1, n, p)?) / binom_pmf(k as i64 - 1, n as u64, p)?).clamp(0.0, 1.0)
            };
            Ok(OrderStatPlan {
                n,
                indices: vec![k],
                achieved_confidence: target,
                fractional_index: Some((k - 1) as f64 + lambda),
                lambda: Some(lambda),
                extrapolation: None,
            })
        }
        Err(Error::Infeasible { .. }) => {
            let t = (target - conf(n, n, p)?) / binom_pmf(n as i64 - 1, n as u64, p)?;
            Ok(OrderStatPlan {
                n,
                indices: vec![n],
                achieved_confidence: target,
                fractional_index: Some(n as f64 + t),
                lambda: None,
                extrapolation: Some(t),
            })
        }
        Err(e) => Err(e),
    }
}

/// Two-sided YM plan on the Wilks `(r, s)` with interpolation weight `lambda`,
/// or extrapolation by `t` spacings beyond both extremes when even the
/// sample range is infeasible.
pub fn ym_two_sided_plan(n: usize, p: f64, alpha: f64) -> Result<OrderStatPlan> {
    check_inputs(n, p, alpha)?;
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let target = 1.0 - alpha;
    match wilks_two_sided_plan(n, p, alpha) {
        Ok(w) => {
            let k = w.indices[1] - w.indices[0];
            let lambda = ((target - conf(k - 1, n, p)?) / binom_pmf(k as i64 - 1, n as u64, p)?).clamp(0.0, 1.0);
            Ok(OrderStatPlan {
                n,
                indices: w.indices,
                achieved_confidence: target,
                fractional_index: Some((k - 1) as f64 + lambda),
                lambda: Some(lambda),
                extrapolation: None,
            })
        }
        Err(Error::Infeasible { .. }) => {
            let t = (target - conf(n - 1, n, p)?) / binom_pmf(n as i64 - 2, n as u64, p)?;
            Ok(OrderStatPlan {
                n,
                indices: vec![1, n],
                achieved_confidence: target,
                fractional_index: Some((n - 1) as f64 + t),
                lambda: None,
                extrapolation: Some(t),
            })
        }
        Err(e) => Err(e),
    }
}

fn ym_upper_value(sorted: &[f64], plan: &OrderStatPlan) -> f64 {
    let n = sorted.len();
    let y = |i: usize| sorted[i - 1];
    if let Some(t) = plan.extrapolation {
        return y(n) + t * (y(n) - y(n - 1));
    }
    let k = plan.indices[0];
    let lambda = plan.lambda.unwrap_or(1.0);
    if k == 1 {
        y(1)
    } else {
        (1.0 - lambda) * y(k - 1) + lambda * y(k)
    }
}

pub fn ym_one_sided(s: &Sample, p: f64, alpha: f64, side: Side) -> Result<ToleranceInterval> {
    let plan = ym_upper_plan(s.len(), p, alpha)?;
    match side {
        Side::Upper => ToleranceInterval::upper_one_sided(p, 1.0 - alpha, ym_upper_value(s.sorted(), &plan), Method::Ym),
        Side::Lower => {
            let neg = s.negated();
            let bound = -ym_upper_value(neg.sorted(), &plan);
            ToleranceInterval::lower_one_sided(p, 1.0 - alpha, bound, Method::Ym)
        }
    }
}

/// Two-sided YM interval. Interpolating either endpoint gives a candidate;
/// the shorter is kept (the lower-endpoint candidate on ties).
pub fn ym_two_sided(s: &Sample, p: f64, alpha: f64) -> Result<ToleranceInterval> {
    let plan = ym_two_sided_plan(s.len(), p, alpha)?;
    let n = s.len();
    let y = |i: usize| s.order_stat(i);
    let (lower, upper) = if let Some(t) = plan.extrapolation {
        (y(1) - t * (y(2) - y(1)), y(n) + t * (y(n) - y(n - 1)))
    } else {
        let (r, sr) = (plan.indices[0], plan.indices[1]);
        let lambda = plan.lambda.unwrap_or(1.0);
        let a = (lambda * y(r) + (1.0 - lambda) * y(r + 1), y(sr));
        let b = (y(r), (1.0 - lambda) * y(sr - 1) + lambda * y(sr));
        if b.1 - b.0 < a.1 - a.0 {
            b
        } else {
            a
        }
    };
    ToleranceInterval::two_sided(p, 1.0 - alpha, lower, upper, Method::Ym, Objective::Content)
}
