use serde::{Deserialize, Serialize};

use super::{CalibrationObjective, ObjectiveKind};
use crate::distributions::{normal_pdf, Sample};
use crate::error::{Error, Result};

/// Plug-in starting value for the learning rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlugInEta {
    pub eta: f64,
    /// Set when the density estimate at a target quantile was below 1e-12
    /// and the bracket floor was returned instead.
    pub degenerate: bool,
}

/// Silverman's rule-of-thumb bandwidth `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
pub fn silverman_bandwidth(s: &Sample) -> f64 {
    let spread = match (s.sd(), s.iqr() / 1.34) {
        (sd, iqr) if iqr > 0.0 => sd.min(iqr),
        (sd, _) => sd,
    };
    0.9 * spread * (s.len() as f64).powf(-0.2)
}

/// Gaussian kernel density estimate at `x`.
pub fn kde(s: &Sample, x: f64, bandwidth: f64) -> f64 {
    if bandwidth.is_nan() || bandwidth <= 0.0 {
        return 0.0;
    }
    let sum: f64 = s.values().iter().map(|&y| normal_pdf((x - y) / bandwidth)).sum();
    sum / (s.len() as f64 * bandwidth)
}

/// `f(Q_tau) / (tau (1 - tau))` for one-sided objectives and
/// `[f(Q_tauL) + f(Q_tauU)] / [tauL (1 - tauL) + tauU (1 - tauU)]` for
/// two-sided ones, with `f` a kernel density estimate, clipped into `bracket`.
pub fn plugin_eta0(s: &Sample, obj: &CalibrationObjective, bracket: (f64, f64)) -> Result<PlugInEta> {
    obj.validate()?;
    if s.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, got: s.len() });
    }
    let h = silverman_bandwidth(s);
    let density = |tau: f64| -> Result<f64> { Ok(kde(s, s.empirical_quantile(tau)?, h)) };
    let (densities, normalizer) = match obj.kind {
        ObjectiveKind::OneSidedUpper { content } => (vec![density(content)?], content * (1.0 - content)),
        ObjectiveKind::OneSidedLower { content } => {
            let tau = 1.0 - content;
            (vec![density(tau)?], tau * (1.0 - tau))
        }
        ObjectiveKind::TwoSidedQuantile { tau_lower, tau_upper }
        | ObjectiveKind::TwoSidedContent { tau_lower, tau_upper, .. } => (
            vec![density(tau_lower)?, density(tau_upper)?],
            tau_lower * (1.0 - tau_lower) + tau_upper * (1.0 - tau_upper),
        ),
    };
    if densities.iter().any(|&d| d.is_nan() || d < 1e-12) {
        return Ok(PlugInEta { eta: bracket.0, degenerate: true });
    }
    let eta = densities.iter().sum::<f64>() / normalizer;
    Ok(PlugInEta { eta: eta.clamp(bracket.0, bracket.1), degenerate: false })
}
