use std::ops::Range;

use crate::io::{Channel, Modality};

use super::DspError;

/// Window length used throughout the pipeline.
pub const WINDOW_S: f64 = 2.0;
/// Step between consecutive windows (50% overlap).
pub const HOP_S: f64 = 1.0;

/// A fixed-length view into a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    pub channel_name: &'a str,
    pub start_s: f64,
    pub len_s: f64,
    pub samples: &'a [f64],
}

fn to_samples(seconds: f64, fs: f64) -> usize {
    (seconds * fs).round() as usize
}

/// Number of full windows in `n` samples: `floor((T - win) / hop) + 1`.
pub fn window_count(n: usize, fs: f64, win_s: f64, hop_s: f64) -> usize {
    let win = to_samples(win_s, fs);
    let hop = to_samples(hop_s, fs).max(1);
    if win == 0 || n < win {
        0
    } else {
        (n - win) / hop + 1
    }
}

/// Sample ranges of every full window; a tail shorter than a window is dropped.
pub fn window_ranges(n: usize, fs: f64, win_s: f64, hop_s: f64) -> Vec<Range<usize>> {
    let win = to_samples(win_s, fs);
    let count = window_count(n, fs, win_s, hop_s);
    (0..count)
        .map(|k| {
            let start = to_samples(k as f64 * hop_s, fs);
            start..start + win
        })
        .collect()
}

pub fn segment_windows(
    channel: &Channel,
    win_s: f64,
    hop_s: f64,
) -> Result<Vec<Window<'_>>, DspError> {
    let ranges = window_ranges(channel.len(), channel.fs(), win_s, hop_s);
    if ranges.is_empty() {
        return Err(DspError::TooShort {
            duration_s: channel.duration_s(),
            required_s: win_s,
        });
    }
    Ok(ranges
        .into_iter()
        .enumerate()
        .map(|(k, r)| Window {
            channel_name: channel.name(),
            start_s: k as f64 * hop_s,
            len_s: win_s,
            samples: &channel.samples()[r],
        })
        .collect())
}

/// Derived accelerometer channel `sqrt((x² + y² + z²) / 3)` named `mag`.
pub fn acc_magnitude_channel(x: &Channel, y: &Channel, z: &Channel) -> Result<Channel, DspError> {
    if x.fs() != y.fs() || x.fs() != z.fs() {
        return Err(DspError::Mismatch(format!(
            "sampling rates {} / {} / {} Hz",
            x.fs(),
            y.fs(),
            z.fs()
        )));
    }
    if x.len() != y.len() || x.len() != z.len() {
        return Err(DspError::Mismatch(format!(
            "lengths {} / {} / {}",
            x.len(),
            y.len(),
            z.len()
        )));
    }
    let samples = x
        .samples()
        .iter()
        .zip(y.samples())
        .zip(z.samples())
        .map(|((a, b), c)| ((a * a + b * b + c * c) / 3.0).sqrt())
        .collect();
    Channel::new("mag", Modality::Acc, x.fs(), samples)
        .map_err(|e| DspError::Mismatch(e.to_string()))
}
