//! Link asymmetry measures, prediction accuracy, and synthesis of link
//! parameter vectors with a prescribed asymmetry.

use thiserror::Error;

use crate::scenario::PathSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("reference throughput must be positive (got {0})")]
    NonPositiveReference(f64),
    #[error("{name} must be non-negative and finite (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("need at least one link")]
    NoLinks,
    #[error("a single link cannot have non-zero asymmetry (got {0})")]
    SingleLinkAsymmetry(f64),
}

/// Mean absolute difference over all unordered pairs; 0 for fewer than
/// two values.
pub fn mean_pairwise_gap(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for q in 1..n {
        for r in 0..q {
            sum += (values[r] - values[q]).abs();
        }
    }
    2.0 * sum / (n * (n - 1)) as f64
}

/// Average absolute delay difference between any two links, seconds.
pub fn avg_delay_asymmetry(delays_s: &[f64]) -> f64 {
    mean_pairwise_gap(delays_s)
}

/// Average absolute bandwidth difference between any two links, bits/s.
pub fn avg_bandwidth_asymmetry(bandwidths_bps: &[f64]) -> f64 {
    mean_pairwise_gap(bandwidths_bps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetrySummary {
    pub avg_delay_asymmetry: f64,
    pub avg_bandwidth_asymmetry: f64,
    pub min_delay: f64,
    pub min_bandwidth: f64,
}

impl AsymmetrySummary {
    pub fn of(paths: &PathSet) -> Self {
        let d = paths.delays();
        let b = paths.bandwidths();
        Self {
            avg_delay_asymmetry: avg_delay_asymmetry(&d),
            avg_bandwidth_asymmetry: avg_bandwidth_asymmetry(&b),
            min_delay: d.iter().copied().fold(f64::INFINITY, f64::min),
            min_bandwidth: b.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// `1 − |T_S − T_M| / T_S`. Large mispredictions go negative.
pub fn prediction_accuracy(t_sim: f64, t_model: f64) -> Result<f64, MetricsError> {
    if t_sim.is_nan() || t_sim <= 0.0 {
        return Err(MetricsError::NonPositiveReference(t_sim));
    }
    Ok(1.0 - (t_sim - t_model).abs() / t_sim)
}

/// `n` values in arithmetic progression from `min` whose mean pairwise gap
/// is `target`.
///
/// An n-term progression with step Δ has mean pairwise gap Δ(n+1)/3, so
/// Δ = 3·target/(n+1).
pub fn synth_progression(n: usize, min: f64, target: f64) -> Result<Vec<f64>, MetricsError> {
    if n == 0 {
        return Err(MetricsError::NoLinks);
    }
    if !(min >= 0.0 && min.is_finite()) {
        return Err(MetricsError::Negative {
            name: "minimum",
            value: min,
        });
    }
    if !(target >= 0.0 && target.is_finite()) {
        return Err(MetricsError::Negative {
            name: "target asymmetry",
            value: target,
        });
    }
    if n == 1 && target != 0.0 {
        return Err(MetricsError::SingleLinkAsymmetry(target));
    }
    let step = 3.0 * target / (n + 1) as f64;
    Ok((0..n).map(|k| min + k as f64 * step).collect())
}

pub fn synth_delays(n: usize, d_min: f64, target_asym: f64) -> Result<Vec<f64>, MetricsError> {
    synth_progression(n, d_min, target_asym)
}

pub fn synth_bandwidths(n: usize, b_min: f64, target_asym: f64) -> Result<Vec<f64>, MetricsError> {
    synth_progression(n, b_min, target_asym)
}
