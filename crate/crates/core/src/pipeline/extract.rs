//! Whole-recording filtering followed by per-window feature extraction.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use chrono::Duration as ChronoDuration;

use crate::dsp::{design_butterworth, detect_r_peaks, window_count};
use crate::features::{
    acc_channel_features, ecg_window_features, eeg_channel_features, emg_channel_features, FeatureMatrix,
    FeatureSchema,
};
use crate::io::{AnnotationSet, Channel, Modality, Recording};

use super::{PipelineConfig, PipelineError};

/// A window is labelled seizure when at least this fraction of it overlaps an event.
pub const LABEL_OVERLAP: f64 = 0.5;

/// Seizure labels for windows starting at `starts` of length `window_s`.
pub fn window_labels(starts: &[f64], window_s: f64, truth: &AnnotationSet) -> Vec<bool> {
    starts
        .iter()
        .map(|&s| {
            let e = s + window_s;
            let overlap: f64 = truth
                .events()
                .iter()
                .map(|ev| (e.min(ev.offset_s) - s.max(ev.onset_s)).max(0.0))
                .sum();
            overlap >= LABEL_OVERLAP * window_s
        })
        .collect()
}

/// Windows every channel of the recording can fill.
pub fn common_window_count(rec: &Recording, cfg: &PipelineConfig) -> usize {
    rec.channels()
        .iter()
        .map(|c| window_count(c.len(), c.fs(), cfg.window_s, cfg.hop_s))
        .min()
        .unwrap_or(0)
}

fn filtered(ch: &Channel, band: &super::config::BandConfig) -> Result<Vec<f64>, PipelineError> {
    let sos = design_butterworth(&band.spec(ch.fs())?)?;
    Ok(sos.apply_steady(ch.samples())?)
}

enum Prepared {
    Eeg { bp: Vec<Vec<f64>>, hp: Vec<Vec<f64>> },
    Emg { hp: Vec<Vec<f64>> },
    Acc { hp: Vec<Vec<f64>> },
    Ecg { peaks_s: Vec<f64> },
}

/// Filtered channels of one modality, ready for per-window extraction.
pub struct ModalityExtractor {
    schema: FeatureSchema,
    fs: f64,
    win: usize,
    window_s: f64,
    hop_s: f64,
    start_time: chrono::DateTime<chrono::Utc>,
    prepared: Prepared,
    /// Wall time spent filtering whole channels.
    pub prepare_time: Duration,
}

impl ModalityExtractor {
    pub fn prepare(rec: &Recording, modality: Modality, cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let t0 = Instant::now();
        let channels: Vec<&Channel> = rec.channels_of(modality).collect();
        if channels.is_empty() {
            return Err(PipelineError::MissingModality {
                recording: rec.id().to_string(),
                modality,
            });
        }
        let fs = channels[0].fs();
        if channels.iter().any(|c| c.fs() != fs) {
            return Err(PipelineError::Config(format!("{modality} channels differ in sampling rate")));
        }
        let names: Vec<&str> = channels.iter().map(|c| c.name()).collect();
        let f = &cfg.filters;
        let (schema, prepared) = match modality {
            Modality::Eeg => {
                let bp = channels.iter().map(|c| filtered(c, &f.eeg_bandpass)).collect::<Result<_, _>>()?;
                let hp = channels.iter().map(|c| filtered(c, &f.eeg_highpass)).collect::<Result<_, _>>()?;
                (FeatureSchema::eeg(&names)?, Prepared::Eeg { bp, hp })
            }
            Modality::Emg => {
                let hp = channels.iter().map(|c| filtered(c, &f.emg_highpass)).collect::<Result<_, _>>()?;
                (FeatureSchema::emg(&names)?, Prepared::Emg { hp })
            }
            Modality::Acc => {
                let mut hp = Vec::with_capacity(4);
                for axis in ["x", "y", "z"] {
                    let ch = channels
                        .iter()
                        .find(|c| c.axis() == Some(axis))
                        .ok_or_else(|| PipelineError::Config(format!("accelerometer axis {axis} missing")))?;
                    hp.push(filtered(ch, &f.acc_highpass)?);
                }
                // Magnitude of the highpassed axes, so gravity does not dominate it.
                let mag = (0..hp[0].len())
                    .map(|i| ((hp[0][i].powi(2) + hp[1][i].powi(2) + hp[2][i].powi(2)) / 3.0).sqrt())
                    .collect();
                hp.push(mag);
                (FeatureSchema::acc(), Prepared::Acc { hp })
            }
            Modality::Ecg => {
                let peaks = detect_r_peaks(channels[0])?;
                let peaks_s = peaks.into_iter().map(|p| p as f64 / fs).collect();
                (FeatureSchema::ecg(), Prepared::Ecg { peaks_s })
            }
            Modality::Gyr => return Err(PipelineError::Config("gyr has no detector".into())),
        };
        Ok(Self {
            schema,
            fs,
            win: (cfg.window_s * fs).round() as usize,
            window_s: cfg.window_s,
            hop_s: cfg.hop_s,
            start_time: rec.start_time(),
            prepared,
            prepare_time: t0.elapsed(),
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn window_start_s(&self, k: usize) -> f64 {
        k as f64 * self.hop_s
    }

    /// Feature row of window `k`, or `None` when it cannot be computed
    /// (too few RR intervals for ECG).
    pub fn window(&self, k: usize) -> Result<Option<Vec<f64>>, PipelineError> {
        let start_s = self.window_start_s(k);
        let a = (start_s * self.fs).round() as usize;
        let range = a..a + self.win;
        let mut row = Vec::with_capacity(self.schema.len());
        match &self.prepared {
            Prepared::Eeg { bp, hp } => {
                for (b, h) in bp.iter().zip(hp) {
                    row.extend(eeg_channel_features(&b[range.clone()], &h[range.clone()], self.fs)?);
                }
            }
            Prepared::Emg { hp } => {
                for h in hp {
                    row.extend(emg_channel_features(&h[range.clone()])?);
                }
            }
            Prepared::Acc { hp } => {
                for h in hp {
                    row.extend(acc_channel_features(&h[range.clone()])?);
                }
            }
            Prepared::Ecg { peaks_s } => {
                let clock = self.start_time + ChronoDuration::milliseconds((start_s * 1000.0).round() as i64);
                match ecg_window_features(peaks_s, start_s + self.window_s, clock) {
                    Some(v) => row.extend(v),
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(row))
    }

    /// Feature matrix over windows `0..n`.
    pub fn matrix(&self, n: usize) -> Result<FeatureMatrix, PipelineError> {
        let mut m = FeatureMatrix::new(self.schema.clone());
        for k in 0..n {
            match self.window(k)? {
                Some(row) => m.push(self.window_start_s(k), &row)?,
                None => m.push_invalid(self.window_start_s(k)),
            }
        }
        Ok(m)
    }
}

/// Feature matrices for each modality on the recording's common window grid,
/// labelled when `truth` is given.
pub fn extract_features(
    rec: &Recording,
    modalities: &[Modality],
    truth: Option<&AnnotationSet>,
    cfg: &PipelineConfig,
) -> Result<BTreeMap<Modality, FeatureMatrix>, PipelineError> {
    let n = common_window_count(rec, cfg);
    let mut out = BTreeMap::new();
    for &m in modalities {
        let mut matrix = ModalityExtractor::prepare(rec, m, cfg)?.matrix(n)?;
        if let Some(t) = truth {
            let labels = window_labels(matrix.window_starts_s(), cfg.window_s, t);
            matrix.set_labels(labels)?;
        }
        out.insert(m, matrix);
    }
    Ok(out)
}
