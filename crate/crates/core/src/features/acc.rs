use super::emg::zero_crossing_rate;
use super::poincare::poincare_descriptors;
use super::spectral::total_average_power;
use super::stats;
use super::FeatureError;

pub const ACC_FEATURES: [&str; 13] = [
    "iqr",
    "std",
    "kurtosis",
    "skewness",
    "zero_crossing_rate",
    "max",
    "mean",
    "median",
    "total_avg_power",
    "sd1",
    "sd2",
    "sd_ratio",
    "ccm",
];

/// Channels scored for accelerometry: the three axes plus the derived magnitude.
pub const ACC_CHANNELS: [&str; 4] = ["acc_x", "acc_y", "acc_z", "mag"];

/// Features of one 2 Hz-highpassed accelerometer channel window.
pub fn acc_channel_features(hp: &[f64]) -> Result<[f64; 13], FeatureError> {
    let p = poincare_descriptors(hp)?;
    let sorted = stats::sorted(hp);
    Ok([
        stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25),
        stats::std_dev_exact(hp),
        stats::kurtosis(hp),
        stats::skewness(hp),
        zero_crossing_rate(hp),
        sorted[sorted.len() - 1],
        stats::mean(hp),
        stats::quantile_sorted(&sorted, 0.5),
        total_average_power(hp),
        p.sd1,
        p.sd2,
        p.ratio,
        p.ccm,
    ])
}
