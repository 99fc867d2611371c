use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, IoError, Modality};

const METADATA_FILE: &str = "recording.json";

/// One sampled signal.
///
/// Samples are kept in `f64` in memory and stored as binary32 on disk, so
/// only binary32-representable values survive a write/read cycle unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    name: String,
    modality: Modality,
    fs: f64,
    samples: Vec<f64>,
}

impl Channel {
    pub fn new(
        name: impl Into<String>,
        modality: Modality,
        fs: f64,
        samples: Vec<f64>,
    ) -> Result<Self, IoError> {
        let name = name.into();
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(IoError::invalid("channel name", format!("'{name}'")));
        }
        if !(fs.is_finite() && fs > 0.0) {
            return Err(IoError::invalid("sampling rate", format!("{name}: {fs}")));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(IoError::invalid(
                "samples",
                format!("{name}: non-finite value at index {index}"),
            ));
        }
        Ok(Self {
            name,
            modality,
            fs,
            samples,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Axis letter for accelerometer/gyroscope channels (`acc_x` -> `x`).
    pub fn axis(&self) -> Option<&str> {
        let axis = self.name.rsplit('_').next().unwrap_or(&self.name);
        matches!(axis, "x" | "y" | "z").then_some(axis)
    }
}

/// A multichannel, possibly multirate recording sharing one time base.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    id: String,
    subject_id: String,
    start_time: DateTime<Utc>,
    channels: Vec<Channel>,
}

impl Recording {
    pub fn new(
        id: impl Into<String>,
        subject_id: impl Into<String>,
        start_time: DateTime<Utc>,
        channels: Vec<Channel>,
    ) -> Result<Self, IoError> {
        let id = id.into();
        if channels.is_empty() {
            return Err(IoError::NoChannels);
        }
        let mut names = HashSet::new();
        for ch in &channels {
            if !names.insert(ch.name()) {
                return Err(IoError::invalid(
                    "recording",
                    format!("duplicate channel name '{}'", ch.name()),
                ));
            }
        }
        for modality in [Modality::Acc, Modality::Gyr] {
            let axes: Vec<Option<&str>> = channels
                .iter()
                .filter(|c| c.modality() == modality)
                .map(Channel::axis)
                .collect();
            if axes.is_empty() {
                continue;
            }
            let set: BTreeSet<&str> = axes.iter().flatten().copied().collect();
            if axes.len() != 3 || set.len() != 3 {
                return Err(IoError::invalid(
                    "recording",
                    format!("{modality} channels must be exactly the x, y and z axes"),
                ));
            }
        }
        // Multirate channels cannot end on the same instant; allow one
        // sample period of the slowest channel.
        let slowest = channels.iter().map(Channel::fs).fold(f64::INFINITY, f64::min);
        let tolerance = 1.0 / slowest + 1e-9;
        let reference = channels
            .iter()
            .min_by(|a, b| a.fs().total_cmp(&b.fs()))
            .map(Channel::duration_s)
            .unwrap_or_default();
        for ch in &channels {
            if (ch.duration_s() - reference).abs() > tolerance {
                return Err(IoError::DurationMismatch {
                    channel: ch.name().to_string(),
                    duration_s: ch.duration_s(),
                    reference_s: reference,
                });
            }
        }
        Ok(Self {
            id,
            subject_id: subject_id.into(),
            start_time,
            channels,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn start_time(&self) -> DateTime<Utc> {
        self.start_time
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name() == name)
    }

    pub fn channels_of(&self, modality: Modality) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(move |c| c.modality() == modality)
    }

    pub fn has_modality(&self, modality: Modality) -> bool {
        self.channels_of(modality).next().is_some()
    }

    /// Duration of the slowest channel, in seconds.
    pub fn duration_s(&self) -> f64 {
        self.channels
            .iter()
            .min_by(|a, b| a.fs().total_cmp(&b.fs()))
            .map(Channel::duration_s)
            .unwrap_or_default()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordingMeta {
    id: String,
    subject_id: String,
    start_time: DateTime<Utc>,
    channels: Vec<ChannelMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelMeta {
    name: String,
    modality: Modality,
    fs_hz: f64,
    units: String,
    file: String,
    samples: usize,
}

fn channel_file_name(name: &str) -> String {
    format!("{name}.f32")
}

pub fn read_recording(dir: &Path) -> Result<Recording, IoError> {
    let meta_path = dir.join(METADATA_FILE);
    let meta: RecordingMeta = read_json(&meta_path)?;
    if meta.channels.is_empty() {
        return Err(IoError::NoChannels);
    }
    let mut channels = Vec::with_capacity(meta.channels.len());
    for cm in meta.channels {
        if cm.file.contains(['/', '\\']) || cm.file.starts_with('.') {
            return Err(IoError::invalid(
                "channel file",
                format!("{}: '{}' must be a plain file name", meta_path.display(), cm.file),
            ));
        }
        if cm.units != cm.modality.units() {
            return Err(IoError::invalid(
                "channel units",
                format!(
                    "{}: channel '{}' declares '{}', expected '{}'",
                    meta_path.display(),
                    cm.name,
                    cm.units,
                    cm.modality.units()
                ),
            ));
        }
        let path = dir.join(&cm.file);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(IoError::MissingChannelFile { path })
            }
            Err(e) => return Err(IoError::fs(path, e)),
        };
        if bytes.len() % 4 != 0 {
            return Err(IoError::TruncatedSample {
                path,
                len: bytes.len() as u64,
            });
        }
        let found = bytes.len() / 4;
        if found != cm.samples {
            return Err(IoError::SampleCountMismatch {
                path,
                expected: cm.samples,
                found,
            });
        }
        let mut samples = Vec::with_capacity(found);
        for (index, chunk) in bytes.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                return Err(IoError::NonFinite { path, index });
            }
            samples.push(f64::from(v));
        }
        channels.push(Channel::new(cm.name, cm.modality, cm.fs_hz, samples)?);
    }
    Recording::new(meta.id, meta.subject_id, meta.start_time, channels)
}

/// Writes `rec` into `dir`, creating it if needed. Identical recordings
/// produce byte-identical files.
pub fn write_recording(rec: &Recording, dir: &Path) -> Result<(), IoError> {
    if rec.channels.is_empty() {
        return Err(IoError::NoChannels);
    }
    fs::create_dir_all(dir).map_err(|e| IoError::fs(dir, e))?;
    let mut metas = Vec::with_capacity(rec.channels.len());
    for ch in &rec.channels {
        let file = channel_file_name(ch.name());
        let mut bytes = Vec::with_capacity(ch.len() * 4);
        for &v in ch.samples() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        let path = dir.join(&file);
        fs::write(&path, bytes).map_err(|e| IoError::fs(path, e))?;
        metas.push(ChannelMeta {
            name: ch.name().to_string(),
            modality: ch.modality(),
            fs_hz: ch.fs(),
            units: ch.modality().units().to_string(),
            file,
            samples: ch.len(),
        });
    }
    let meta = RecordingMeta {
        id: rec.id.clone(),
        subject_id: rec.subject_id.clone(),
        start_time: rec.start_time,
        channels: metas,
    };
    write_json(&dir.join(METADATA_FILE), &meta)
}
