//! Min/max envelope decimation of conditioned segments.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use tcsdet_core::io::{Channel, Modality, Recording};

use crate::conditioning::{condition_segment, Conditioning};
use crate::ReviewError;

/// Sample ranges of the pixel buckets: one sample each when `px >= n`,
/// otherwise `px` contiguous ranges that tile `0..n`.
pub fn bucket_ranges(n: usize, px: usize) -> Vec<Range<usize>> {
    if px >= n {
        return (0..n).map(|i| i..i + 1).collect();
    }
    (0..px).map(|k| k * n / px..(k + 1) * n / px).collect()
}

/// Per-bucket minimum and maximum of `x`.
pub fn envelope(x: &[f64], px: usize) -> (Vec<f64>, Vec<f64>) {
    bucket_ranges(x.len(), px)
        .into_iter()
        .map(|r| {
            let b = &x[r];
            let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .unzip()
}

/// Recommended display sensitivity in µV/cm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayGain {
    pub uv_per_cm: f64,
    pub presets: Vec<f64>,
}

pub fn display_gain(modality: Modality) -> Option<DisplayGain> {
    let (uv_per_cm, presets) = match modality {
        Modality::Eeg => (100.0, vec![100.0]),
        Modality::Ecg => (700.0, vec![700.0]),
        // Both EMG sensitivities in use are offered.
        Modality::Emg => (100.0, vec![100.0, 300.0]),
        Modality::Acc | Modality::Gyr => return None,
    };
    Some(DisplayGain { uv_per_cm, presets })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRender {
    pub name: String,
    pub modality: Modality,
    pub units: String,
    pub fs_hz: f64,
    pub conditioned: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<DisplayGain>,
    /// Index of the first rendered sample in the channel.
    pub first_sample: usize,
    /// Raw samples covered; bucket `k` spans `bucket_ranges(samples, px)[k]`.
    pub samples: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentView {
    pub recording_id: String,
    pub start_s: f64,
    pub end_s: f64,
    pub px: usize,
    pub conditioning: Conditioning,
    pub channels: Vec<ChannelRender>,
}

fn sample_range(ch: &Channel, start_s: f64, end_s: f64) -> Result<Range<usize>, ReviewError> {
    let span_err = || ReviewError::Span {
        start_s,
        end_s,
        duration_s: ch.duration_s(),
    };
    if !(start_s.is_finite() && end_s.is_finite()) || start_s < 0.0 || end_s <= start_s {
        return Err(span_err());
    }
    if end_s > ch.duration_s() + 0.5 / ch.fs() {
        return Err(span_err());
    }
    let a = (start_s * ch.fs()).floor() as usize;
    let b = ((end_s * ch.fs()).ceil() as usize).min(ch.len());
    if b <= a {
        return Err(span_err());
    }
    Ok(a..b)
}

pub fn render_segment(ch: &Channel, start_s: f64, end_s: f64, px: usize) -> Result<ChannelRender, ReviewError> {
    if px == 0 {
        return Err(ReviewError::Malformed("px must be at least 1".into()));
    }
    let range = sample_range(ch, start_s, end_s)?;
    let first_sample = range.start;
    let (x, conditioned) = condition_segment(ch, range)?;
    let (min, max) = envelope(&x, px);
    Ok(ChannelRender {
        name: ch.name().to_string(),
        modality: ch.modality(),
        units: ch.modality().units().to_string(),
        fs_hz: ch.fs(),
        conditioned,
        gain: display_gain(ch.modality()),
        first_sample,
        samples: x.len(),
        min,
        max,
    })
}

/// Every channel of `rec` over the same span.
pub fn render_view(rec: &Recording, start_s: f64, end_s: f64, px: usize) -> Result<SegmentView, ReviewError> {
    let channels = rec
        .channels()
        .iter()
        .map(|ch| render_segment(ch, start_s, end_s, px))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SegmentView {
        recording_id: rec.id().to_string(),
        start_s,
        end_s,
        px,
        conditioning: Conditioning::default(),
        channels,
    })
}
