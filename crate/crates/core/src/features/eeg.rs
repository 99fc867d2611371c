use super::entropy;
use super::spectral::{periodogram, shannon_of_weights, Spectrum};
use super::stats;
use super::FeatureError;

pub const EEG_FEATURES: [&str; 21] = [
    "zero_crossings",
    "local_maxima",
    "local_minima",
    "skewness",
    "kurtosis",
    "rms",
    "total_power",
    "peak_frequency",
    "delta_mean_power",
    "delta_norm_power",
    "theta_mean_power",
    "theta_norm_power",
    "alpha_mean_power",
    "alpha_norm_power",
    "beta_mean_power",
    "beta_norm_power",
    "hf_mean_power",
    "hf_norm_power",
    "sample_entropy",
    "shannon_entropy",
    "spectral_entropy",
];

/// Clinical bands inside the 1-25 Hz passband as `(lo, hi, hi inclusive)`.
pub const EEG_BANDS: [(f64, f64, bool); 4] = [
    (1.0, 4.0, false),
    (4.0, 8.0, false),
    (8.0, 13.0, false),
    (13.0, 25.0, true),
];
pub const PASSBAND_HZ: (f64, f64) = (1.0, 25.0);
pub const HF_BAND_HZ: (f64, f64) = (40.0, 80.0);

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn flat_as_zero(mut spec: Spectrum, x: &[f64]) -> Spectrum {
    if stats::std_dev_exact(x) == 0.0 {
        spec.power.fill(0.0);
    }
    spec
}

fn band_pair(spec: &Spectrum, lo: f64, hi: f64, inclusive: bool, total: f64) -> (f64, f64) {
    let bins = spec.bins(lo, hi, inclusive);
    let count = bins.len();
    let power = spec.sum(bins);
    (ratio(power, count as f64), ratio(power, total))
}

/// Features of one EEG channel. `bp` is the 1-25 Hz bandpassed window and
/// `hp` the 1 Hz highpassed window over the same span.
pub fn eeg_channel_features(bp: &[f64], hp: &[f64], fs: f64) -> Result<[f64; 21], FeatureError> {
    if bp.len() != hp.len() {
        return Err(FeatureError::LengthMismatch {
            expected: bp.len(),
            found: hp.len(),
        });
    }
    let mut out = [0.0; 21];
    let (maxima, minima) = stats::local_extrema(bp);
    out[0] = stats::zero_crossings(bp) as f64;
    out[1] = maxima as f64;
    out[2] = minima as f64;
    out[3] = stats::skewness(bp);
    out[4] = stats::kurtosis(bp);
    out[5] = stats::rms(bp);

    // A flat window has no spectrum beyond FFT rounding noise.
    let spec = flat_as_zero(periodogram(bp, fs), bp);
    let pass = spec.bins(PASSBAND_HZ.0, PASSBAND_HZ.1, true);
    let in_band = &spec.power[pass.clone()];
    let total: f64 = in_band.iter().sum();
    out[6] = total;
    out[7] = if total > 0.0 {
        let mut best = 0;
        for (k, &p) in in_band.iter().enumerate() {
            if p > in_band[best] {
                best = k;
            }
        }
        spec.freq(pass.start + best)
    } else {
        0.0
    };
    for (i, &(lo, hi, inclusive)) in EEG_BANDS.iter().enumerate() {
        let (mean, norm) = band_pair(&spec, lo, hi, inclusive, total);
        out[8 + 2 * i] = mean;
        out[9 + 2 * i] = norm;
    }

    let hp_spec = flat_as_zero(periodogram(hp, fs), hp);
    let hp_total = hp_spec.sum(hp_spec.bins(PASSBAND_HZ.0, fs / 2.0, true));
    let (mean, norm) = band_pair(&hp_spec, HF_BAND_HZ.0, HF_BAND_HZ.1, true, hp_total);
    out[16] = mean;
    out[17] = norm;

    out[18] = entropy::sample_entropy_default(bp)?;
    out[19] = entropy::shannon_entropy(bp);
    out[20] = if in_band.len() > 1 {
        shannon_of_weights(in_band) / (in_band.len() as f64).ln()
    } else {
        0.0
    };
    Ok(out)
}
