//! Closed-form check-loss posterior under flat or uniform priors.
//!
//! Between consecutive distinct observations the log density is linear in
//! `q` with slope `eta * (tau * n - #{y <= q})`, so the posterior is a
//! finite mixture of (possibly truncated) exponential pieces.

use rand::distr::Open01;
use rand::Rng;

use super::{CheckRisk, GibbsSpec1D};
use crate::distributions::Sample;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    slope: f64,
}

impl Piece {
    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Log of the integral of `exp(l(q) - l_ref)` over the piece, where
    /// `l` is linear with `l(lo) = l_lo`, `l(hi) = l_hi`.
    fn log_mass(&self, l_lo: f64, l_hi: f64) -> f64 {
        let s = self.slope;
        if self.lo == f64::NEG_INFINITY {
            return l_hi - s.ln();
        }
        if self.hi == f64::INFINITY {
            return l_lo - (-s).ln();
        }
        let w = self.width();
        if s == 0.0 {
            return l_lo + w.ln();
        }
        let top = l_lo.max(l_hi);
        top + (-(-s.abs() * w).exp_m1()).ln() - s.abs().ln()
    }

    /// Fraction of the piece's mass lying below `x`.
    fn fraction_below(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let s = self.slope;
        if self.lo == f64::NEG_INFINITY {
            return (s * (x - self.hi)).exp();
        }
        if self.hi == f64::INFINITY {
            return -(s * (x - self.lo)).exp_m1();
        }
        let (w, y) = (self.width(), x - self.lo);
        if s == 0.0 {
            y / w
        } else if s < 0.0 {
            (s * y).exp_m1() / (s * w).exp_m1()
        } else {
            (-s * (w - y)).exp() * (-s * y).exp_m1() / (-s * w).exp_m1()
        }
    }

    /// Inverse of [`Piece::fraction_below`] for `u` in `(0, 1)`.
    fn inverse(&self, u: f64) -> f64 {
        let s = self.slope;
        if self.lo == f64::NEG_INFINITY {
            return self.hi + u.ln() / s;
        }
        if self.hi == f64::INFINITY {
            return self.lo + (-u).ln_1p() / s;
        }
        let w = self.width();
        let y = if s == 0.0 {
            u * w
        } else if s < 0.0 {
            (u * (s * w).exp_m1()).ln_1p() / s
        } else {
            w - ((1.0 - u) * (-s * w).exp_m1()).ln_1p() / (-s)
        };
        (self.lo + y.clamp(0.0, w)).clamp(self.lo, self.hi)
    }

    fn mean(&self) -> f64 {
        let s = self.slope;
        if self.lo == f64::NEG_INFINITY {
            return self.hi - 1.0 / s;
        }
        if self.hi == f64::INFINITY {
            return self.lo - 1.0 / s;
        }
        let w = self.width();
        let t = s * w;
        let g = if t.abs() < 1e-6 { 0.5 + t / 12.0 } else { 1.0 / (-(-t).exp_m1()) - 1.0 / t };
        self.lo + w * g
    }
}

/// Exact one-quantile Gibbs posterior for flat or uniform priors.
#[derive(Debug, Clone)]
pub struct CheckLossPosterior {
    pieces: Vec<Piece>,
    probs: Vec<f64>,
    /// `cum[j]` is the posterior mass strictly below piece `j`.
    cum: Vec<f64>,
}

impl CheckLossPosterior {
    pub fn new(s: &Sample, spec: &GibbsSpec1D) -> Result<Self> {
        spec.validate()?;
        let (a, b) = spec.prior.support().ok_or_else(|| {
            Error::Unsupported("the exact sampler needs a flat or uniform prior; use slice or rwmh".into())
        })?;
        let sorted = s.sorted();
        let n = sorted.len() as f64;
        let risk = CheckRisk::new(sorted, spec.tau);

        let mut knots = vec![a];
        for &y in sorted {
            if y > a && y < b && knots.last() != Some(&y) {
                knots.push(y);
            }
        }
        knots.push(b);

        let mut pieces = Vec::with_capacity(knots.len() - 1);
        let mut log_masses = Vec::with_capacity(knots.len() - 1);
        for pair in knots.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let at_or_below = if lo == f64::NEG_INFINITY {
                sorted.partition_point(|&y| y < hi)
            } else {
                sorted.partition_point(|&y| y <= lo)
            };
            let piece = Piece { lo, hi, slope: spec.eta * (spec.tau * n - at_or_below as f64) };
            let l_lo = if lo.is_finite() { -spec.eta * risk.eval(lo) } else { f64::NAN };
            let l_hi = if hi.is_finite() { -spec.eta * risk.eval(hi) } else { f64::NAN };
            log_masses.push(piece.log_mass(l_lo, l_hi));
            pieces.push(piece);
        }

        let top = log_masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = log_masses.iter().map(|&l| (l - top).exp()).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|&m| m / total).collect();
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            cum.push(acc);
            acc += p;
        }
        if !total.is_finite() || probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::Initialization("posterior normalization failed".into()));
        }
        Ok(Self { pieces, probs, cum })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let j = self.pieces.partition_point(|p| p.hi <= x);
        if j == self.pieces.len() {
            return 1.0;
        }
        (self.cum[j] + self.probs[j] * self.pieces[j].fraction_below(x)).min(1.0)
    }

    /// Posterior quantile for `u` in `(0, 1)`; the endpoints map to the
    /// support bounds.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.pieces[0].lo;
        }
        if u >= 1.0 {
            return self.pieces[self.pieces.len() - 1].hi;
        }
        let mut j = self.cum.partition_point(|&c| c <= u).saturating_sub(1);
        while self.probs[j] == 0.0 && j > 0 {
            j -= 1;
        }
        let within = ((u - self.cum[j]) / self.probs[j]).clamp(0.0, 1.0);
        let within = if within <= 0.0 {
            f64::MIN_POSITIVE
        } else if within >= 1.0 {
            1.0 - f64::EPSILON / 2.0
        } else {
            within
        };
        self.pieces[j].inverse(within)
    }

    pub fn mean(&self) -> f64 {
        self.pieces.iter().zip(&self.probs).filter(|(_, &p)| p > 0.0).map(|(piece, &p)| p * piece.mean()).sum()
    }

    /// I.i.d. draws by inversion.
    pub fn draws(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| self.quantile(rng.sample(Open01))).collect()
    }

    /// Draw restricted to `(lo, hi)` by inverting the cdf on that range.
    pub(crate) fn draw_truncated<R: Rng>(&self, lo: f64, hi: f64, rng: &mut R) -> f64 {
        let (f_lo, f_hi) = (self.cdf(lo), self.cdf(hi));
        let u: f64 = rng.sample(Open01);
        if f_hi > f_lo {
            self.quantile(f_lo + u * (f_hi - f_lo)).clamp(lo, hi)
        } else if lo.is_finite() && hi.is_finite() {
            lo + u * (hi - lo)
        } else if lo.is_finite() {
            lo
        } else {
            hi
        }
    }
}

/// Probability mass that the pair constraint `q_L < q_U` could remove,
/// bounded through the midpoint of the two posterior medians.
pub(crate) fn overlap_bound(lower: &CheckLossPosterior, upper: &CheckLossPosterior) -> f64 {
    let c = 0.5 * (lower.quantile(0.5) + upper.quantile(0.5));
    (1.0 - lower.cdf(c)) + upper.cdf(c)
}

/// I.i.d. ordered pairs by rejection from the product of the marginals,
/// switching to block Gibbs with exact truncated conditionals when fewer
/// than 1% of proposals are accepted. Returns the pairs and the rejection
/// acceptance rate.
pub(crate) fn ordered_pair_draws(
    lower: &CheckLossPosterior,
    upper: &CheckLossPosterior,
    n: usize,
    seed: u64,
) -> (Vec<(f64, f64)>, f64) {
    let mut rng = rng_from_seed(seed);
    let mut pairs = Vec::with_capacity(n);
    let mut tried = 0usize;
    let pilot = 1000usize.max(n);
    while pairs.len() < n {
        let ql = lower.quantile(rng.sample(Open01));
        let qu = upper.quantile(rng.sample(Open01));
        tried += 1;
        if qu > ql {
            pairs.push((ql, qu));
        }
        if tried >= pilot && (pairs.len() as f64) < 0.01 * tried as f64 {
            break;
        }
    }
    let rate = pairs.len() as f64 / tried as f64;
    if pairs.len() == n {
        return (pairs, rate);
    }

    pairs.clear();
    let mut qu = upper.quantile(0.5);
    let mut ql;
    for _ in 0..200 {
        ql = lower.draw_truncated(f64::NEG_INFINITY, qu, &mut rng);
        qu = upper.draw_truncated(ql, f64::INFINITY, &mut rng);
    }
    while pairs.len() < n {
        ql = lower.draw_truncated(f64::NEG_INFINITY, qu, &mut rng);
        qu = upper.draw_truncated(ql, f64::INFINITY, &mut rng);
        if qu <= ql {
            qu = next_up(ql);
        }
        pairs.push((ql, qu));
    }
    (pairs, rate)
}

fn next_up(x: f64) -> f64 {
    let bumped = x + x.abs().max(1.0) * f64::EPSILON;
    if bumped > x {
        bumped
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}
