use rand::Rng;

use crate::error::{ensure_probability, Error, Result};

/// Immutable batch of finite observations with a cached sorted view.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

/// `ceil(n * tau)` clamped to `1..=n`, snapping products within rounding
/// distance of an integer (so 10 * 0.7 selects the 7th value, not the 8th).
pub(crate) fn type1_rank(n: usize, tau: f64) -> usize {
    let x = n as f64 * tau;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, n)
}

/// Type-1 (inverse-CDF) quantile of an already sorted slice.
pub(crate) fn sorted_type1_quantile(sorted: &[f64], tau: f64) -> f64 {
    sorted[type1_rank(sorted.len(), tau) - 1]
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("sample"));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observations in nondecreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// The k-th order statistic, 1-indexed.
    pub fn order_stat(&self, k: usize) -> f64 {
        self.sorted[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance; zero for a single observation.
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Interquartile range from type-1 quartiles.
    pub fn iqr(&self) -> f64 {
        sorted_type1_quantile(&self.sorted, 0.75) - sorted_type1_quantile(&self.sorted, 0.25)
    }

    /// `inf { y : F_n(y) >= tau }`, i.e. the `ceil(n tau)`-th order statistic.
    pub fn empirical_quantile(&self, tau: f64) -> Result<f64> {
        ensure_probability("tau", tau)?;
        Ok(sorted_type1_quantile(&self.sorted, tau))
    }

    /// Empirical CDF `F_n(x)`: fraction of observations `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Fraction of observations inside the closed interval `[lower, upper]`.
    pub fn ecdf_content(&self, lower: f64, upper: f64) -> Result<f64> {
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(Error::Ordering { lower, upper });
        }
        let below = self.sorted.partition_point(|&v| v < lower);
        let through = self.sorted.partition_point(|&v| v <= upper);
        Ok((through - below) as f64 / self.len() as f64)
    }

    /// Nonparametric bootstrap resample of the same size.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        let n = self.len();
        let values: Vec<f64> = (0..n).map(|_| self.values[rng.random_range(0..n)]).collect();
        Sample::new(values).expect("resampled values are finite and nonempty")
    }

    pub fn negated(&self) -> Sample {
        Sample::new(self.values.iter().map(|v| -v).collect()).expect("negation keeps values finite")
    }
}
