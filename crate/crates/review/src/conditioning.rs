//! Fixed display filters applied before a segment is rendered.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use tcsdet_core::dsp::{design_butterworth, DspError, FilterSpec, SosFilter};
use tcsdet_core::io::{Channel, Modality};

pub const HIGHPASS_HZ: f64 = 0.53;
pub const LOWPASS_HZ: f64 = 35.0;
pub const NOTCH_BAND_HZ: (f64, f64) = (48.0, 52.0);
pub const ORDER: usize = 4;
/// Signal history filtered ahead of a segment so the view starts settled.
pub const PAD_S: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub highpass_hz: f64,
    pub lowpass_hz: f64,
    pub bandstop_hz: [f64; 2],
    pub order: usize,
    /// Modalities the filters apply to.
    pub modalities: Vec<Modality>,
}

impl Default for Conditioning {
    fn default() -> Self {
        Self {
            highpass_hz: HIGHPASS_HZ,
            lowpass_hz: LOWPASS_HZ,
            bandstop_hz: [NOTCH_BAND_HZ.0, NOTCH_BAND_HZ.1],
            order: ORDER,
            modalities: vec![Modality::Eeg, Modality::Emg, Modality::Ecg],
        }
    }
}

/// High-pass, low-pass and 50 Hz band-stop cascade for electrophysiological
/// channels; `None` for motion channels, which are shown as recorded.
pub fn review_filter(modality: Modality, fs: f64) -> Result<Option<SosFilter>, DspError> {
    match modality {
        Modality::Eeg | Modality::Emg | Modality::Ecg => {
            let hp = design_butterworth(&FilterSpec::highpass(ORDER, HIGHPASS_HZ, fs))?;
            let lp = design_butterworth(&FilterSpec::lowpass(ORDER, LOWPASS_HZ, fs))?;
            let bs = design_butterworth(&FilterSpec::bandstop(ORDER, NOTCH_BAND_HZ.0, NOTCH_BAND_HZ.1, fs))?;
            Ok(Some(hp.then(&lp).then(&bs)))
        }
        Modality::Acc | Modality::Gyr => Ok(None),
    }
}

/// Conditioned samples of `range`, plus whether filtering was applied.
pub fn condition_segment(ch: &Channel, range: Range<usize>) -> Result<(Vec<f64>, bool), DspError> {
    let x = ch.samples();
    if range.is_empty() || range.end > x.len() {
        return Err(DspError::EmptyInput);
    }
    let Some(filter) = review_filter(ch.modality(), ch.fs())? else {
        return Ok((x[range].to_vec(), false));
    };
    let pad = (PAD_S * ch.fs()) as usize;
    let lo = range.start.saturating_sub(pad);
    let y = filter.apply_steady(&x[lo..range.end])?;
    Ok((y[range.start - lo..].to_vec(), true))
}
