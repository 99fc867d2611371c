//! Event-level scoring of detections against annotated seizures.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{AnnotationSet, DetectionLog, ReviewLog, VerdictKind};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("total hours must be positive, got {0}")]
    Hours(f64),
    #[error("negative or empty detection span for {0}")]
    Span(String),
    #[error("detections are not sorted by start")]
    Unsorted,
    #[error("verdict for unknown detection {0}")]
    UnknownDetection(String),
    #[error("detection {0} has more than one verdict")]
    MultipleVerdicts(String),
    #[error("nothing to aggregate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub sensitivity: f64,
    pub fpr_per_24h: f64,
    pub precision: f64,
    pub f1: f64,
    pub total_hours: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall)
}

impl EventScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, total_hours: f64) -> Self {
        let sensitivity = ratio(tp as f64, (tp + fn_) as f64);
        let precision = ratio(tp as f64, (tp + fp) as f64);
        Self {
            tp,
            fp,
            fn_,
            sensitivity,
            fpr_per_24h: ratio(fp as f64 * 24.0, total_hours),
            precision,
            f1: f1_from(precision, sensitivity),
            total_hours,
        }
    }
}

/// Detections, ground truth and recorded duration of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringInput {
    pub detections: DetectionLog,
    pub truth: AnnotationSet,
    pub total_hours: f64,
}

/// A seizure is detected when some detection lies within `[onset, offset]`.
/// Every detection not inside any seizure is one false positive.
pub fn score_events(detections: &DetectionLog, truth: &AnnotationSet, total_hours: f64) -> Result<EventScore, EvalError> {
    if !(total_hours > 0.0) {
        return Err(EvalError::Hours(total_hours));
    }
    let dets = detections.detections();
    if let Some(d) = dets.iter().find(|d| !(d.end_s > d.start_s)) {
        return Err(EvalError::Span(d.id.clone()));
    }
    if dets.windows(2).any(|w| w[1].start_s < w[0].start_s) {
        return Err(EvalError::Unsorted);
    }
    let inside = |start: f64, end: f64| {
        truth
            .events()
            .iter()
            .position(|e| e.onset_s <= start && end <= e.offset_s)
    };
    let mut detected = vec![false; truth.len()];
    let mut fp = 0;
    for d in dets {
        match inside(d.start_s, d.end_s) {
            Some(k) => detected[k] = true,
            None => fp += 1,
        }
    }
    let tp = detected.iter().filter(|&&b| b).count();
    Ok(EventScore::from_counts(tp, fp, truth.len() - tp, total_hours))
}

/// Pool counts and hours, then recompute the derived fields.
pub fn aggregate_metrics(scores: &[EventScore]) -> Result<EventScore, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    let tp = scores.iter().map(|s| s.tp).sum();
    let fp = scores.iter().map(|s| s.fp).sum();
    let fn_ = scores.iter().map(|s| s.fn_).sum();
    let hours = scores.iter().map(|s| s.total_hours).sum();
    Ok(EventScore::from_counts(tp, fp, fn_, hours))
}

pub fn score_all(inputs: &[ScoringInput]) -> Result<EventScore, EvalError> {
    let scores = inputs
        .iter()
        .map(|i| score_events(&i.detections, &i.truth, i.total_hours))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate_metrics(&scores)
}

/// Ids of detections verdicted false positive, after checking that every
/// verdict names a known detection and no detection has two verdicts.
pub fn rejected_ids<'a>(inputs: &[ScoringInput], reviews: &'a ReviewLog) -> Result<HashSet<&'a str>, EvalError> {
    let known: HashSet<&str> = inputs
        .iter()
        .flat_map(|i| i.detections.detections().iter().map(|d| d.id.as_str()))
        .collect();
    let mut seen: HashMap<&str, VerdictKind> = HashMap::new();
    for v in reviews.verdicts() {
        if !known.contains(v.detection_id.as_str()) {
            return Err(EvalError::UnknownDetection(v.detection_id.clone()));
        }
        if seen.insert(v.detection_id.as_str(), v.verdict).is_some() {
            return Err(EvalError::MultipleVerdicts(v.detection_id.clone()));
        }
    }
    Ok(seen
        .into_iter()
        .filter(|(_, k)| *k == VerdictKind::Fp)
        .map(|(id, _)| id)
        .collect())
}

/// Inputs with every fp-verdicted detection removed.
pub fn reviewed_inputs(inputs: &[ScoringInput], reviews: &ReviewLog) -> Result<Vec<ScoringInput>, EvalError> {
    let rejected = rejected_ids(inputs, reviews)?;
    Ok(inputs
        .iter()
        .map(|i| ScoringInput {
            detections: i.detections.filtered(|d| !rejected.contains(d.id.as_str())),
            ..i.clone()
        })
        .collect())
}

/// Pooled score after removing detections verdicted `fp`. Unreviewed
/// detections stay in.
pub fn apply_review(inputs: &[ScoringInput], reviews: &ReviewLog) -> Result<EventScore, EvalError> {
    score_all(&reviewed_inputs(inputs, reviews)?)
}

/// One line of a modality-combination report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub combination: String,
    pub score: EventScore,
}

/// Text table with Sensitivity, FPR/24h, Precision and F1-score columns.
pub fn render_table(rows: &[MetricsRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.combination.len())
        .max()
        .unwrap_or(0)
        .max("Modality".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>11}  {:>8}  {:>9}  {:>8}",
        "Modality", "Sensitivity", "FPR/24h", "Precision", "F1-score"
    );
    for r in rows {
        let s = &r.score;
        let _ = writeln!(
            out,
            "{:<width$}  {:>10.1}%  {:>8.1}  {:>8.1}%  {:>7.1}%",
            r.combination,
            s.sensitivity * 100.0,
            s.fpr_per_24h,
            s.precision * 100.0,
            s.f1 * 100.0
        );
    }
    out
}
