//! Heart-rate features from an R-peak series.
//!
//! Each window looks at a trailing context of R peaks ending at the window
//! end. Tachycardia is detected on a smoothed 4 Hz heart-rate trace against
//! the context's own first-quartile baseline.

use std::f64::consts::PI;

use chrono::{DateTime, Timelike, Utc};

use super::poincare::modified_csi;
use super::spectral::periodogram;
use super::stats;

/// Seven features; the circadian slot holds a (sin, cos) pair.
pub const ECG_FEATURES: [&str; 8] = [
    "hr_increase_duration",
    "hr_after_tachycardia",
    "hr_before_tachycardia",
    "vlf_power",
    "lf_power",
    "modified_csi",
    "circadian_sin",
    "circadian_cos",
];

pub const CONTEXT_S: f64 = 60.0;
pub const MIN_RR_INTERVALS: usize = 10;
pub const TACHOGRAM_FS: f64 = 4.0;
/// Smoothing span of the heart-rate trace.
pub const SMOOTH_S: f64 = 3.0;
/// Episode threshold relative to baseline heart rate.
pub const TACHY_FACTOR: f64 = 1.25;
pub const TACHY_MIN_S: f64 = 10.0;
/// Span before/after onset for the HR medians.
pub const FLANK_S: f64 = 10.0;
pub const VLF_HZ: (f64, f64) = (0.003, 0.04);
pub const LF_HZ: (f64, f64) = (0.04, 0.15);

/// Linear interpolation of `(t, v)` pairs onto a regular grid from `t[0]`.
fn resample(t: &[f64], v: &[f64], fs: f64) -> Vec<f64> {
    let span = t[t.len() - 1] - t[0];
    let count = (span * fs).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for k in 0..count {
        let tk = t[0] + k as f64 / fs;
        while j + 2 < t.len() && t[j + 1] < tk {
            j += 1;
        }
        let (t0, t1) = (t[j], t[j + 1]);
        let frac = if t1 > t0 { ((tk - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(v[j] + (v[j + 1] - v[j]) * frac);
    }
    out
}

/// Centered moving average, truncated at the edges.
fn smooth(x: &[f64], half: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            stats::mean(&x[lo..hi])
        })
        .collect()
}

/// Last run of `above` lasting at least `min_len` samples, as `(start, len)`.
fn last_long_run(above: &[bool], min_len: usize) -> Option<(usize, usize)> {
    let mut found = None;
    let mut i = 0;
    while i < above.len() {
        if above[i] {
            let start = i;
            while i < above.len() && above[i] {
                i += 1;
            }
            if i - start >= min_len {
                found = Some((start, i - start));
            }
        } else {
            i += 1;
        }
    }
    found
}

/// Day phase of a wall-clock instant as `(sin, cos)`.
pub fn circadian(clock: DateTime<Utc>) -> (f64, f64) {
    let secs = clock.num_seconds_from_midnight() as f64 + clock.nanosecond() as f64 * 1e-9;
    let phase = 2.0 * PI * secs / 86_400.0;
    (phase.sin(), phase.cos())
}

/// Features for a window ending at `window_end_s` (recording time) whose
/// start falls at wall-clock `clock`. `peaks_s` are ascending R-peak times.
/// Returns `None` when the context holds too few RR intervals.
pub fn ecg_window_features(peaks_s: &[f64], window_end_s: f64, clock: DateTime<Utc>) -> Option<[f64; 8]> {
    let lo = peaks_s.partition_point(|&p| p < window_end_s - CONTEXT_S);
    let hi = peaks_s.partition_point(|&p| p <= window_end_s);
    let peaks = &peaks_s[lo..hi];
    if peaks.len() < MIN_RR_INTERVALS + 1 {
        return None;
    }
    let rr: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let hr: Vec<f64> = rr.iter().map(|r| 60.0 / r).collect();
    let times = &peaks[1..];

    let hr_grid = resample(times, &hr, TACHOGRAM_FS);
    let rr_grid = resample(times, &rr, TACHOGRAM_FS);
    let smoothed = smooth(&hr_grid, (SMOOTH_S * TACHOGRAM_FS / 2.0).round() as usize);
    let baseline = stats::quantile_sorted(&stats::sorted(&smoothed), 0.25);
    let above: Vec<bool> = smoothed.iter().map(|&h| h > TACHY_FACTOR * baseline).collect();
    let flank = (FLANK_S * TACHOGRAM_FS) as usize;
    let (duration, after, before) =
        match last_long_run(&above, (TACHY_MIN_S * TACHOGRAM_FS) as usize) {
            Some((onset, len)) => {
                let pre = &hr_grid[onset.saturating_sub(flank)..onset];
                let post = &hr_grid[onset..(onset + flank).min(hr_grid.len())];
                let before = if pre.is_empty() { hr_grid[onset] } else { stats::median(pre) };
                (len as f64 / TACHOGRAM_FS, stats::median(post), before)
            }
            None => {
                let m = stats::median(&hr_grid);
                (0.0, m, m)
            }
        };

    let mu = stats::mean(&rr_grid);
    let centered: Vec<f64> = rr_grid.iter().map(|v| v - mu).collect();
    let spec = periodogram(&centered, TACHOGRAM_FS);
    let vlf = spec.sum(spec.bins(VLF_HZ.0, VLF_HZ.1, false));
    let lf = spec.sum(spec.bins(LF_HZ.0, LF_HZ.1, false));
    let csi = modified_csi(&rr).ok()?;
    let (sin, cos) = circadian(clock);
    Some([duration, after, before, vlf, lf, csi, sin, cos])
}
