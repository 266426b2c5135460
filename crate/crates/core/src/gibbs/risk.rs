/// Cumulative check loss `R(q) = sum_i rho_tau(y_i - q)` evaluated in
/// O(log n) from prefix sums of the sorted sample.
#[derive(Debug, Clone)]
pub(crate) struct CheckRisk {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    tau: f64,
}

impl CheckRisk {
    pub fn new(sorted: &[f64], tau: f64) -> Self {
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &y in sorted {
            acc += y;
            prefix.push(acc);
        }
        Self { sorted: sorted.to_vec(), prefix, tau }
    }

    pub fn eval(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let k = self.sorted.partition_point(|&y| y <= q);
        let below = self.prefix[k];
        let above = self.prefix[n] - below;
        let upper_part = above - q * (n - k) as f64;
        let lower_part = q * k as f64 - below;
        self.tau * upper_part + (1.0 - self.tau) * lower_part
    }
}
