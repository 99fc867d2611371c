//! Per-window feature extractors and the feature matrix container.

pub mod acc;
pub mod ecg;
pub mod eeg;
pub mod emg;
pub mod entropy;
mod persist;
pub mod poincare;
pub mod spectral;
pub mod stats;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsp::DspError;
use crate::io::Modality;

pub use acc::{acc_channel_features, ACC_CHANNELS, ACC_FEATURES};
pub use ecg::{ecg_window_features, ECG_FEATURES};
pub use eeg::{eeg_channel_features, EEG_FEATURES};
pub use emg::{emg_channel_features, EMG_FEATURES};
pub use persist::{read_matrix, write_matrix};
pub use poincare::{modified_csi, poincare_descriptors, Poincare};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("{what} needs at least {required} samples, got {len}")]
    TooShort {
        what: &'static str,
        len: usize,
        required: usize,
    },
    #[error("window length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("schema: {0}")]
    Schema(String),
    #[error("non-finite feature {name} in window {row}")]
    NonFinite { name: String, row: usize },
    #[error("missing {0} channels")]
    MissingChannel(Modality),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("{path}: {source}")]
    Fs {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: malformed feature file: {reason}")]
    Format { path: String, reason: String },
}

/// Ordered feature names for one modality, channel-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    modality: Modality,
    names: Vec<String>,
}

impl FeatureSchema {
    pub fn new(modality: Modality, names: Vec<String>) -> Result<Self, FeatureError> {
        if names.is_empty() {
            return Err(FeatureError::Schema("no feature names".into()));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(FeatureError::Schema(format!("duplicate feature name {n}")));
            }
        }
        Ok(Self { modality, names })
    }

    /// `{channel}.{feature}` for every channel and per-channel feature.
    pub fn per_channel(modality: Modality, channels: &[&str], features: &[&str]) -> Result<Self, FeatureError> {
        let names = channels
            .iter()
            .flat_map(|c| features.iter().map(move |f| format!("{c}.{f}")))
            .collect();
        Self::new(modality, names)
    }

    pub fn eeg(channels: &[&str]) -> Result<Self, FeatureError> {
        Self::per_channel(Modality::Eeg, channels, &EEG_FEATURES)
    }

    pub fn emg(channels: &[&str]) -> Result<Self, FeatureError> {
        Self::per_channel(Modality::Emg, channels, &EMG_FEATURES)
    }

    pub fn acc() -> Self {
        Self::per_channel(Modality::Acc, &ACC_CHANNELS, &ACC_FEATURES).expect("static schema")
    }

    pub fn ecg() -> Self {
        Self::new(Modality::Ecg, ECG_FEATURES.iter().map(|s| s.to_string()).collect())
            .expect("static schema")
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Hex SHA-256 over the modality and the ordered names.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.modality.as_str().as_bytes());
        for n in &self.names {
            h.update(b"\n");
            h.update(n.as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Schema restricted to the given column indices.
    pub fn select(&self, columns: &[usize]) -> Result<Self, FeatureError> {
        Self::new(
            self.modality,
            columns.iter().map(|&c| self.names[c].clone()).collect(),
        )
    }
}

/// Windows × features table. Values are stored at binary32 precision so a
/// matrix survives the on-disk format unchanged. Rows marked invalid hold
/// zeros and are excluded from training.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    schema: FeatureSchema,
    window_starts_s: Vec<f64>,
    values: Vec<f64>,
    labels: Option<Vec<bool>>,
    valid: Vec<bool>,
}

impl FeatureMatrix {
    pub fn new(schema: FeatureSchema) -> Self {
        Self {
            schema,
            window_starts_s: Vec::new(),
            values: Vec::new(),
            labels: None,
            valid: Vec::new(),
        }
    }

    pub fn push(&mut self, start_s: f64, row: &[f64]) -> Result<(), FeatureError> {
        if row.len() != self.cols() {
            return Err(FeatureError::LengthMismatch {
                expected: self.cols(),
                found: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            let stored = v as f32;
            if !stored.is_finite() {
                return Err(FeatureError::NonFinite {
                    name: self.schema.names[j].clone(),
                    row: self.rows(),
                });
            }
            self.values.push(stored as f64);
        }
        self.window_starts_s.push(start_s);
        self.valid.push(true);
        if let Some(l) = &mut self.labels {
            l.push(false);
        }
        Ok(())
    }

    pub fn push_invalid(&mut self, start_s: f64) {
        self.values.extend(std::iter::repeat_n(0.0, self.cols()));
        self.window_starts_s.push(start_s);
        self.valid.push(false);
        if let Some(l) = &mut self.labels {
            l.push(false);
        }
    }

    pub fn set_labels(&mut self, labels: Vec<bool>) -> Result<(), FeatureError> {
        if labels.len() != self.rows() {
            return Err(FeatureError::LengthMismatch {
                expected: self.rows(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn rows(&self) -> usize {
        self.window_starts_s.len()
    }

    pub fn cols(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window_starts_s(&self) -> &[f64] {
        &self.window_starts_s
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    /// Copy of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = Self::new(self.schema.clone());
        for &i in rows {
            out.values.extend_from_slice(self.row(i));
            out.window_starts_s.push(self.window_starts_s[i]);
            out.valid.push(self.valid[i]);
        }
        out.labels = self.labels.as_ref().map(|l| rows.iter().map(|&i| l[i]).collect());
        out
    }

    /// Indices of valid rows.
    pub fn valid_rows(&self) -> Vec<usize> {
        (0..self.rows()).filter(|&i| self.valid[i]).collect()
    }

    /// Stack matrices sharing a schema. Labels survive only if every part has them.
    pub fn concat(parts: &[&FeatureMatrix]) -> Result<Self, FeatureError> {
        let first = parts
            .first()
            .ok_or_else(|| FeatureError::Schema("nothing to concatenate".into()))?;
        let mut out = Self::new(first.schema.clone());
        let labelled = parts.iter().all(|p| p.labels.is_some());
        let mut labels = Vec::new();
        for p in parts {
            if p.schema != first.schema {
                return Err(FeatureError::Schema("concatenating different schemas".into()));
            }
            out.values.extend_from_slice(&p.values);
            out.window_starts_s.extend_from_slice(&p.window_starts_s);
            out.valid.extend_from_slice(&p.valid);
            if let Some(l) = &p.labels {
                labels.extend_from_slice(l);
            }
        }
        if labelled {
            out.labels = Some(labels);
        }
        Ok(out)
    }

    pub(crate) fn from_parts(
        schema: FeatureSchema,
        window_starts_s: Vec<f64>,
        values: Vec<f64>,
        labels: Option<Vec<bool>>,
        valid: Vec<bool>,
    ) -> Self {
        Self {
            schema,
            window_starts_s,
            values,
            labels,
            valid,
        }
    }
}
