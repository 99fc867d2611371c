use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, IoError, Modality};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeizureType {
    #[serde(rename = "FBTC")]
    Fbtc,
    #[serde(rename = "GTCS")]
    Gtcs,
}

/// One ground-truth seizure. Times are seconds from recording start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeizureEvent {
    pub onset_s: f64,
    pub offset_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tonic_onset_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clonic_onset_s: Option<f64>,
    pub seizure_type: SeizureType,
}

impl SeizureEvent {
    pub fn new(onset_s: f64, offset_s: f64, seizure_type: SeizureType) -> Self {
        Self {
            onset_s,
            offset_s,
            tonic_onset_s: None,
            clonic_onset_s: None,
            seizure_type,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.offset_s - self.onset_s
    }
}

/// Sorted, non-overlapping ground-truth seizures.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawAnnotations")]
pub struct AnnotationSet {
    events: Vec<SeizureEvent>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotations {
    events: Vec<SeizureEvent>,
}

impl TryFrom<RawAnnotations> for AnnotationSet {
    type Error = IoError;

    fn try_from(raw: RawAnnotations) -> Result<Self, Self::Error> {
        AnnotationSet::new(raw.events)
    }
}

impl AnnotationSet {
    pub fn new(events: Vec<SeizureEvent>) -> Result<Self, IoError> {
        for ev in &events {
            let finite = [ev.onset_s, ev.offset_s]
                .into_iter()
                .chain(ev.tonic_onset_s)
                .chain(ev.clonic_onset_s)
                .all(f64::is_finite);
            if !finite || ev.onset_s < 0.0 || ev.onset_s >= ev.offset_s {
                return Err(IoError::invalid(
                    "annotation",
                    format!("event [{}, {}] must have 0 <= onset < offset", ev.onset_s, ev.offset_s),
                ));
            }
            for phase in [ev.tonic_onset_s, ev.clonic_onset_s].into_iter().flatten() {
                if phase < ev.onset_s || phase > ev.offset_s {
                    return Err(IoError::invalid(
                        "annotation",
                        format!("phase onset {phase} outside [{}, {}]", ev.onset_s, ev.offset_s),
                    ));
                }
            }
            if let (Some(t), Some(c)) = (ev.tonic_onset_s, ev.clonic_onset_s) {
                if t > c {
                    return Err(IoError::invalid(
                        "annotation",
                        format!("tonic onset {t} after clonic onset {c}"),
                    ));
                }
            }
        }
        for pair in events.windows(2) {
            if pair[1].onset_s < pair[0].onset_s {
                return Err(IoError::invalid(
                    "annotation",
                    format!("events not sorted by onset ({} after {})", pair[1].onset_s, pair[0].onset_s),
                ));
            }
            if pair[1].onset_s < pair[0].offset_s {
                return Err(IoError::invalid(
                    "annotation",
                    format!(
                        "events [{}, {}] and [{}, {}] overlap",
                        pair[0].onset_s, pair[0].offset_s, pair[1].onset_s, pair[1].offset_s
                    ),
                ));
            }
        }
        Ok(Self { events })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[SeizureEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A fused detection event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub id: String,
    pub start_s: f64,
    pub end_s: f64,
    pub modalities: BTreeSet<Modality>,
    /// Mean SVM decision value over the trigger span, when available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_margin: Option<f64>,
}

impl Detection {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawDetections")]
pub struct DetectionLog {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    recording_id: Option<String>,
    detections: Vec<Detection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetections {
    #[serde(default)]
    recording_id: Option<String>,
    detections: Vec<Detection>,
}

impl TryFrom<RawDetections> for DetectionLog {
    type Error = IoError;

    fn try_from(raw: RawDetections) -> Result<Self, Self::Error> {
        let log = DetectionLog::new(raw.detections)?;
        Ok(match raw.recording_id {
            Some(id) => log.with_recording_id(id),
            None => log,
        })
    }
}

impl DetectionLog {
    /// Validates ids, spans and start ordering.
    pub fn new(detections: Vec<Detection>) -> Result<Self, IoError> {
        let mut ids = HashSet::new();
        for d in &detections {
            if !(d.start_s.is_finite() && d.end_s.is_finite()) || d.start_s >= d.end_s {
                return Err(IoError::invalid(
                    "detection",
                    format!("'{}' span [{}, {}] must have start < end", d.id, d.start_s, d.end_s),
                ));
            }
            if !ids.insert(d.id.as_str()) {
                return Err(IoError::invalid("detection", format!("duplicate id '{}'", d.id)));
            }
        }
        if detections.windows(2).any(|p| p[1].start_s < p[0].start_s) {
            return Err(IoError::invalid("detection log", "detections not sorted by start"));
        }
        Ok(Self {
            recording_id: None,
            detections,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_recording_id(mut self, id: impl Into<String>) -> Self {
        self.recording_id = Some(id.into());
        self
    }

    pub fn recording_id(&self) -> Option<&str> {
        self.recording_id.as_deref()
    }

    pub fn detections(&self) -> &[Detection] {
        &self.detections
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Detection> {
        self.detections.iter().find(|d| d.id == id)
    }

    /// Returns the log with every id rewritten as `{prefix}:{id}`.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let detections = self
            .detections
            .iter()
            .map(|d| Detection {
                id: format!("{prefix}:{}", d.id),
                ..d.clone()
            })
            .collect();
        Self {
            recording_id: self.recording_id.clone(),
            detections,
        }
    }

    /// Keeps only detections for which `keep` returns true.
    pub fn filtered(&self, mut keep: impl FnMut(&Detection) -> bool) -> Self {
        Self {
            recording_id: self.recording_id.clone(),
            detections: self.detections.iter().filter(|d| keep(d)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Tp,
    Fp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub detection_id: String,
    pub verdict: VerdictKind,
    pub reviewer: String,
    pub decided_at: DateTime<Utc>,
    pub review_ms: u64,
}

/// Reviewer verdicts in decision order; at most one per detection and reviewer.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawReviews")]
pub struct ReviewLog {
    verdicts: Vec<Verdict>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReviews {
    verdicts: Vec<Verdict>,
}

impl TryFrom<RawReviews> for ReviewLog {
    type Error = IoError;

    fn try_from(raw: RawReviews) -> Result<Self, Self::Error> {
        ReviewLog::new(raw.verdicts)
    }
}

impl ReviewLog {
    pub fn new(verdicts: Vec<Verdict>) -> Result<Self, IoError> {
        let mut log = Self::default();
        for v in verdicts {
            log.push(v)?;
        }
        Ok(log)
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn contains(&self, detection_id: &str, reviewer: &str) -> bool {
        self.verdicts
            .iter()
            .any(|v| v.detection_id == detection_id && v.reviewer == reviewer)
    }

    /// Appends a verdict, rejecting a second verdict by the same reviewer.
    pub fn push(&mut self, verdict: Verdict) -> Result<(), IoError> {
        if self.contains(&verdict.detection_id, &verdict.reviewer) {
            return Err(IoError::invalid(
                "review",
                format!(
                    "reviewer '{}' already judged '{}'",
                    verdict.reviewer, verdict.detection_id
                ),
            ));
        }
        self.verdicts.push(verdict);
        Ok(())
    }
}

pub fn read_annotations(path: &Path) -> Result<AnnotationSet, IoError> {
    read_json(path)
}

pub fn write_annotations(set: &AnnotationSet, path: &Path) -> Result<(), IoError> {
    write_json(path, set)
}

pub fn read_detections(path: &Path) -> Result<DetectionLog, IoError> {
    read_json(path)
}

pub fn write_detections(log: &DetectionLog, path: &Path) -> Result<(), IoError> {
    write_json(path, log)
}

pub fn read_reviews(path: &Path) -> Result<ReviewLog, IoError> {
    read_json(path)
}

pub fn write_reviews(log: &ReviewLog, path: &Path) -> Result<(), IoError> {
    write_json(path, log)
}
