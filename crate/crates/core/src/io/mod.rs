//! On-disk containers and documents.
//!
//! A recording is a directory holding `recording.json` plus one raw
//! little-endian binary32 file per channel. Annotations, detections and
//! review verdicts are JSON documents next to it.

mod documents;
mod recording;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use documents::{
    read_annotations, read_detections, read_reviews, write_annotations, write_detections,
    write_reviews, AnnotationSet, Detection, DetectionLog, ReviewLog, SeizureEvent, SeizureType,
    Verdict, VerdictKind,
};
pub use recording::{read_recording, write_recording, Channel, Recording};

/// Signal modality carried by a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Eeg,
    Emg,
    Ecg,
    Acc,
    Gyr,
}

impl Modality {
    pub const ALL: [Modality; 5] = [
        Modality::Eeg,
        Modality::Emg,
        Modality::Ecg,
        Modality::Acc,
        Modality::Gyr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Eeg => "eeg",
            Modality::Emg => "emg",
            Modality::Ecg => "ecg",
            Modality::Acc => "acc",
            Modality::Gyr => "gyr",
        }
    }

    /// Physical unit of the stored samples.
    pub fn units(self) -> &'static str {
        match self {
            Modality::Eeg | Modality::Emg | Modality::Ecg => "uV",
            Modality::Acc => "g",
            Modality::Gyr => "deg/s",
        }
    }

    /// Nominal sampling rate used when a channel does not specify one.
    pub fn default_fs(self) -> f64 {
        match self {
            Modality::Eeg | Modality::Emg | Modality::Ecg => 250.0,
            Modality::Acc | Modality::Gyr => 25.0,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eeg" => Ok(Modality::Eeg),
            "emg" => Ok(Modality::Emg),
            "ecg" => Ok(Modality::Ecg),
            "acc" => Ok(Modality::Acc),
            "gyr" => Ok(Modality::Gyr),
            other => Err(format!("unknown modality '{other}'")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed document: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: missing channel file")]
    MissingChannelFile { path: PathBuf },
    #[error("{path}: sample count mismatch (metadata declares {expected}, file holds {found})")]
    SampleCountMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: file length {len} bytes is not a multiple of 4")]
    TruncatedSample { path: PathBuf, len: u64 },
    #[error("{path}: non-finite sample at index {index} (byte offset {})", index * 4)]
    NonFinite { path: PathBuf, index: usize },
    #[error("channel '{channel}' lasts {duration_s} s but the recording lasts {reference_s} s")]
    DurationMismatch {
        channel: String,
        duration_s: f64,
        reference_s: f64,
    },
    #[error("no channels")]
    NoChannels,
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

impl IoError {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        IoError::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn fs(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Fs {
            path: path.into(),
            source,
        }
    }
}

/// Serializes `value` as pretty JSON terminated by a newline.
pub(crate) fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| IoError::fs(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(
    path: &std::path::Path,
) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::fs(path, e))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}
