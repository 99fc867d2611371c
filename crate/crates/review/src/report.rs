//! Review queue, export and pre/post comparison. Everything here is a pure
//! function of the detections, the verdicts and the annotations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use tcsdet_core::evaluation::{apply_review, score_all, EventScore, ScoringInput};
use tcsdet_core::io::{AnnotationSet, Detection, DetectionLog, Modality, ReviewLog, Verdict, VerdictKind};

use crate::ReviewError;

/// One recording's detections (ids local to the recording) and ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingReview {
    pub recording_id: String,
    pub hours: f64,
    pub truth: AnnotationSet,
    pub detections: DetectionLog,
}

/// Everything under review. Detections are addressed as `{recording}:{id}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReviewSet {
    recordings: Vec<RecordingReview>,
}

pub fn global_id(recording_id: &str, detection_id: &str) -> String {
    format!("{recording_id}:{detection_id}")
}

impl ReviewSet {
    pub fn new(mut recordings: Vec<RecordingReview>) -> Result<Self, ReviewError> {
        recordings.sort_by(|a, b| a.recording_id.cmp(&b.recording_id));
        if let Some(w) = recordings.windows(2).find(|w| w[0].recording_id == w[1].recording_id) {
            return Err(ReviewError::Malformed(format!("recording {} listed twice", w[0].recording_id)));
        }
        if let Some(r) = recordings.iter().find(|r| !(r.hours > 0.0)) {
            return Err(ReviewError::Malformed(format!("recording {} has no duration", r.recording_id)));
        }
        Ok(Self { recordings })
    }

    pub fn recordings(&self) -> &[RecordingReview] {
        &self.recordings
    }

    pub fn total_hours(&self) -> f64 {
        self.recordings.iter().map(|r| r.hours).sum()
    }

    pub fn find(&self, id: &str) -> Option<(&RecordingReview, &Detection)> {
        self.recordings.iter().find_map(|r| {
            let local = id.strip_prefix(r.recording_id.as_str())?.strip_prefix(':')?;
            r.detections.get(local).map(|d| (r, d))
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.find(id).is_some()
    }

    pub fn detection_count(&self) -> usize {
        self.recordings.iter().map(|r| r.detections.len()).sum()
    }

    pub fn scoring_inputs(&self) -> Vec<ScoringInput> {
        self.recordings
            .iter()
            .map(|r| ScoringInput {
                detections: r.detections.prefixed(&r.recording_id),
                truth: r.truth.clone(),
                total_hours: r.hours,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewStatus {
    Pending,
    Reviewed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueItem {
    pub id: String,
    pub recording_id: String,
    pub start_s: f64,
    pub end_s: f64,
    pub modalities: BTreeSet<Modality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_margin: Option<f64>,
    pub status: ReviewStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub review_ms: Option<u64>,
}

/// Detections in recording then start order, with their review state.
pub fn queue(set: &ReviewSet, reviews: &ReviewLog) -> Vec<QueueItem> {
    let by_id: HashMap<&str, &Verdict> = reviews.verdicts().iter().map(|v| (v.detection_id.as_str(), v)).collect();
    let mut out = Vec::with_capacity(set.detection_count());
    for r in set.recordings() {
        for d in r.detections.detections() {
            let id = global_id(&r.recording_id, &d.id);
            let v = by_id.get(id.as_str());
            out.push(QueueItem {
                recording_id: r.recording_id.clone(),
                start_s: d.start_s,
                end_s: d.end_s,
                modalities: d.modalities.clone(),
                mean_margin: d.mean_margin,
                status: if v.is_some() { ReviewStatus::Reviewed } else { ReviewStatus::Pending },
                verdict: v.map(|v| v.verdict),
                review_ms: v.map(|v| v.review_ms),
                id,
            });
        }
    }
    out
}

/// Post-review score plus the seizures confirmed by a reviewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportDoc {
    pub score: EventScore,
    pub verified: Vec<QueueItem>,
    pub reviewed: usize,
    pub pending: usize,
    pub review_ms_total: u64,
    /// Review time normalized to one 24 h recording.
    pub review_min_per_24h: f64,
    pub reviewers: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub pre: EventScore,
    pub post: EventScore,
    pub reviewed: usize,
    pub pending: usize,
    pub confirmed: usize,
    pub rejected: usize,
    pub review_ms_total: u64,
    pub review_min_per_24h: f64,
}

fn review_minutes_per_24h(set: &ReviewSet, reviews: &ReviewLog) -> (u64, f64) {
    let total: u64 = reviews.verdicts().iter().map(|v| v.review_ms).sum();
    let per_day = total as f64 / 60_000.0 / (set.total_hours() / 24.0);
    (total, per_day)
}

pub fn export(set: &ReviewSet, reviews: &ReviewLog) -> Result<ExportDoc, ReviewError> {
    let score = apply_review(&set.scoring_inputs(), reviews)?;
    let items = queue(set, reviews);
    let reviewed = items.iter().filter(|i| i.status == ReviewStatus::Reviewed).count();
    let pending = items.len() - reviewed;
    let verified = items.into_iter().filter(|i| i.verdict == Some(VerdictKind::Tp)).collect();
    let (review_ms_total, review_min_per_24h) = review_minutes_per_24h(set, reviews);
    let mut reviewers = BTreeMap::new();
    for v in reviews.verdicts() {
        *reviewers.entry(v.reviewer.clone()).or_insert(0) += 1;
    }
    Ok(ExportDoc {
        score,
        verified,
        reviewed,
        pending,
        review_ms_total,
        review_min_per_24h,
        reviewers,
    })
}

pub fn metrics(set: &ReviewSet, reviews: &ReviewLog) -> Result<MetricsDoc, ReviewError> {
    let inputs = set.scoring_inputs();
    let pre = score_all(&inputs)?;
    let post = apply_review(&inputs, reviews)?;
    let count = |k: VerdictKind| reviews.verdicts().iter().filter(|v| v.verdict == k).count();
    let (review_ms_total, review_min_per_24h) = review_minutes_per_24h(set, reviews);
    Ok(MetricsDoc {
        pre,
        post,
        reviewed: reviews.len(),
        pending: set.detection_count() - reviews.len(),
        confirmed: count(VerdictKind::Tp),
        rejected: count(VerdictKind::Fp),
        review_ms_total,
        review_min_per_24h,
    })
}
