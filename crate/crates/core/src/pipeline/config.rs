use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::TrainerConfig;
use crate::dsp::{FilterSpec, HOP_S, WINDOW_S};
use crate::fusion::{FusionError, FusionRule, MERGE_GAP_S, MULTIMODAL_POSITIVES_PER_MODALITY, SPAN_WINDOWS};
use crate::io::Modality;

use super::PipelineError;

/// Cutoffs and order of one Butterworth stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub order: usize,
    pub low_hz: Option<f64>,
    pub high_hz: Option<f64>,
}

impl BandConfig {
    pub fn highpass(order: usize, cutoff_hz: f64) -> Self {
        Self {
            order,
            low_hz: Some(cutoff_hz),
            high_hz: None,
        }
    }

    pub fn bandpass(order: usize, low_hz: f64, high_hz: f64) -> Self {
        Self {
            order,
            low_hz: Some(low_hz),
            high_hz: Some(high_hz),
        }
    }

    pub fn spec(&self, fs: f64) -> Result<FilterSpec, PipelineError> {
        match (self.low_hz, self.high_hz) {
            (Some(lo), Some(hi)) => Ok(FilterSpec::bandpass(self.order, lo, hi, fs)),
            (Some(lo), None) => Ok(FilterSpec::highpass(self.order, lo, fs)),
            (None, Some(hi)) => Ok(FilterSpec::lowpass(self.order, hi, fs)),
            (None, None) => Err(PipelineError::Config("filter stage without cutoffs".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub eeg_bandpass: BandConfig,
    pub eeg_highpass: BandConfig,
    pub emg_highpass: BandConfig,
    pub acc_highpass: BandConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            eeg_bandpass: BandConfig::bandpass(4, 1.0, 25.0),
            eeg_highpass: BandConfig::highpass(4, 1.0),
            emg_highpass: BandConfig::highpass(4, 20.0),
            acc_highpass: BandConfig::highpass(4, 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub span_windows: usize,
    /// Positives per modality when more than one modality votes.
    pub positives_per_modality: usize,
    pub merge_gap_s: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            span_windows: SPAN_WINDOWS,
            positives_per_modality: MULTIMODAL_POSITIVES_PER_MODALITY,
            merge_gap_s: MERGE_GAP_S,
        }
    }
}

impl FusionConfig {
    /// Every slot for a single modality, `positives_per_modality` per modality otherwise.
    pub fn rule(&self, modalities: &BTreeSet<Modality>) -> Result<FusionRule, FusionError> {
        let required = match modalities.len() {
            1 => self.span_windows,
            k => self.positives_per_modality * k,
        };
        FusionRule::new(modalities.clone(), self.span_windows, required)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Modalities fused by `detect`. ECG is left out by default.
    pub modalities: Vec<Modality>,
    pub filters: FilterConfig,
    pub window_s: f64,
    pub hop_s: f64,
    pub fusion: FusionConfig,
    pub classifier: TrainerConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            modalities: vec![Modality::Eeg, Modality::Emg, Modality::Acc],
            filters: FilterConfig::default(),
            window_s: WINDOW_S,
            hop_s: HOP_S,
            fusion: FusionConfig::default(),
            classifier: TrainerConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::fs(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.modalities.is_empty() {
            return Err(PipelineError::Config("no modalities selected".into()));
        }
        if self.modalities.contains(&Modality::Gyr) {
            return Err(PipelineError::Config("gyr has no detector".into()));
        }
        let unique: BTreeSet<_> = self.modalities.iter().collect();
        if unique.len() != self.modalities.len() {
            return Err(PipelineError::Config("duplicate modality".into()));
        }
        // The fusion grid assumes 2 s windows on a 1 s hop.
        if self.window_s != WINDOW_S || self.hop_s != HOP_S {
            return Err(PipelineError::Config(format!(
                "window {} s / hop {} s: only {WINDOW_S} s / {HOP_S} s is supported",
                self.window_s, self.hop_s
            )));
        }
        self.fusion
            .rule(&self.modality_set())
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn modality_set(&self) -> BTreeSet<Modality> {
        self.modalities.iter().copied().collect()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Hash of the parts that affect feature extraction only.
    pub fn extraction_hash(&self) -> String {
        let json = serde_json::to_vec(&(&self.filters, self.window_s, self.hop_s)).expect("serializes");
        hex::encode(Sha256::digest(&json))
    }
}
