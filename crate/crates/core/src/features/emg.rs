use super::entropy;
use super::stats;
use super::FeatureError;

pub const EMG_FEATURES: [&str; 7] = [
    "zero_crossing_rate",
    "wilson_amplitude",
    "mean_abs",
    "median_abs",
    "std",
    "cumulative_residual_entropy",
    "fuzzy_entropy",
];

/// Successive-difference threshold for the Wilson amplitude, in µV.
pub const WILSON_THRESHOLD_UV: f64 = 50.0;

/// Zero crossings per sample step.
pub fn zero_crossing_rate(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    stats::zero_crossings(x) as f64 / (x.len() - 1) as f64
}

pub fn wilson_amplitude(x: &[f64], threshold: f64) -> usize {
    x.windows(2).filter(|w| (w[0] - w[1]).abs() > threshold).count()
}

/// Features of one 20 Hz-highpassed EMG channel window.
pub fn emg_channel_features(hp: &[f64]) -> Result<[f64; 7], FeatureError> {
    if hp.is_empty() {
        return Err(FeatureError::TooShort {
            what: "emg window",
            len: 0,
            required: 4,
        });
    }
    let abs: Vec<f64> = hp.iter().map(|v| v.abs()).collect();
    Ok([
        zero_crossing_rate(hp),
        wilson_amplitude(hp, WILSON_THRESHOLD_UV) as f64,
        stats::mean(&abs),
        stats::median(&abs),
        stats::std_dev_exact(hp),
        entropy::cumulative_residual_entropy(hp),
        entropy::fuzzy_entropy_default(hp)?,
    ])
}
