//! Consecutive-window voting over per-modality window labels.
//!
//! A run of `span_windows` consecutive window slots triggers when the number
//! of positive labels across all modalities in those slots reaches
//! `required_positives`. Overlapping or adjacent triggered runs form one
//! detection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{HOP_S, WINDOW_S};
use crate::io::{Detection, DetectionLog, IoError, Modality};

/// Consecutive slots examined by the voting rule.
pub const SPAN_WINDOWS: usize = 20;
/// Positives required per modality beyond the first, out of 20 slots each.
pub const MULTIMODAL_POSITIVES_PER_MODALITY: usize = 18;
/// Default gap for merging nearby detections.
pub const MERGE_GAP_S: f64 = 30.0;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("invalid fusion rule: {0}")]
    Rule(String),
    #[error("window grid mismatch: {0}")]
    Grid(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Per-window labels of one modality on the shared 1 s grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSeries {
    pub modality: Modality,
    pub window_starts_s: Vec<f64>,
    pub labels: Vec<bool>,
    /// Optional SVM decision values (`None` for windows without a valid score).
    pub decisions: Option<Vec<Option<f64>>>,
}

impl LabelSeries {
    pub fn new(modality: Modality, window_starts_s: Vec<f64>, labels: Vec<bool>) -> Result<Self, FusionError> {
        if window_starts_s.len() != labels.len() {
            return Err(FusionError::Grid(format!(
                "{} starts for {} labels",
                window_starts_s.len(),
                labels.len()
            )));
        }
        for w in window_starts_s.windows(2) {
            if ((w[1] - w[0]) - HOP_S).abs() > 1e-9 {
                return Err(FusionError::Grid(format!("starts {} and {} are not one hop apart", w[0], w[1])));
            }
        }
        Ok(Self {
            modality,
            window_starts_s,
            labels,
            decisions: None,
        })
    }

    /// Series on the grid `0, 1, 2, …` seconds.
    pub fn from_labels(modality: Modality, labels: Vec<bool>) -> Self {
        let starts = (0..labels.len()).map(|i| i as f64 * HOP_S).collect();
        Self {
            modality,
            window_starts_s: starts,
            labels,
            decisions: None,
        }
    }

    /// Labels from decision values (`> 0` is positive, `None` negative).
    pub fn from_decisions(modality: Modality, window_starts_s: Vec<f64>, decisions: Vec<Option<f64>>) -> Result<Self, FusionError> {
        let labels = decisions.iter().map(|d| d.is_some_and(|v| v > 0.0)).collect();
        let mut s = Self::new(modality, window_starts_s, labels)?;
        s.decisions = Some(decisions);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionRule {
    pub modalities: BTreeSet<Modality>,
    pub span_windows: usize,
    pub required_positives: usize,
}

impl FusionRule {
    pub fn new(modalities: BTreeSet<Modality>, span_windows: usize, required_positives: usize) -> Result<Self, FusionError> {
        if modalities.is_empty() {
            return Err(FusionError::Rule("no modalities".into()));
        }
        if span_windows == 0 || required_positives == 0 {
            return Err(FusionError::Rule("span and required positives must be positive".into()));
        }
        if required_positives > span_windows * modalities.len() {
            return Err(FusionError::Rule(format!(
                "{required_positives} positives cannot fit in {span_windows} slots of {} modalities",
                modalities.len()
            )));
        }
        Ok(Self {
            modalities,
            span_windows,
            required_positives,
        })
    }

    /// 20 of 20 slots for one modality; 18 per modality (36 of 40, 54 of 60) otherwise.
    pub fn standard(modalities: impl IntoIterator<Item = Modality>) -> Result<Self, FusionError> {
        let modalities: BTreeSet<Modality> = modalities.into_iter().collect();
        let required = match modalities.len() {
            1 => SPAN_WINDOWS,
            k => MULTIMODAL_POSITIVES_PER_MODALITY * k,
        };
        Self::new(modalities, SPAN_WINDOWS, required)
    }
}

fn check_grid<'a>(series: &'a [LabelSeries], rule: &FusionRule) -> Result<&'a [f64], FusionError> {
    let first = series
        .first()
        .ok_or_else(|| FusionError::Grid("no label series".into()))?;
    let given: BTreeSet<Modality> = series.iter().map(|s| s.modality).collect();
    if given.len() != series.len() || given != rule.modalities {
        return Err(FusionError::Grid("series modalities differ from the rule".into()));
    }
    for s in series {
        if s.window_starts_s != first.window_starts_s || s.labels.len() != first.labels.len() {
            return Err(FusionError::Grid(format!("{} is on a different window grid", s.modality)));
        }
        if s.decisions.as_ref().is_some_and(|d| d.len() != s.labels.len()) {
            return Err(FusionError::Grid(format!("{} decision count differs", s.modality)));
        }
    }
    Ok(&first.window_starts_s)
}

/// Slot ranges `[first, last]` of merged triggered runs.
pub fn triggered_spans(counts: &[usize], span: usize, required: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    if counts.len() < span {
        return out;
    }
    let mut sum: usize = counts[..span].iter().sum();
    for start in 0..=counts.len() - span {
        if start > 0 {
            sum = sum + counts[start + span - 1] - counts[start - 1];
        }
        if sum >= required {
            let end = start + span - 1;
            match out.last_mut() {
                Some(last) if start <= last.1 + 1 => last.1 = end,
                _ => out.push((start, end)),
            }
        }
    }
    out
}

pub fn fuse(series: &[LabelSeries], rule: &FusionRule) -> Result<DetectionLog, FusionError> {
    let starts = check_grid(series, rule)?;
    let n = starts.len();
    let counts: Vec<usize> = (0..n)
        .map(|i| series.iter().filter(|s| s.labels[i]).count())
        .collect();
    let detections = triggered_spans(&counts, rule.span_windows, rule.required_positives)
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for s in series {
                if let Some(d) = &s.decisions {
                    for v in d[a..=b].iter().flatten() {
                        sum += v;
                        count += 1;
                    }
                }
            }
            Detection {
                id: format!("det-{:04}", k + 1),
                start_s: starts[a],
                end_s: starts[b] + WINDOW_S,
                modalities: rule.modalities.clone(),
                mean_margin: (count > 0).then(|| sum / count as f64),
            }
        })
        .collect();
    Ok(DetectionLog::new(detections)?)
}

/// Merge detections separated by at most `gap_s`. The merged detection keeps
/// the first id, the union of modalities and a duration-weighted margin.
pub fn merge_events(log: &DetectionLog, gap_s: f64) -> DetectionLog {
    let mut out: Vec<Detection> = Vec::new();
    for d in log.detections() {
        match out.last_mut() {
            Some(last) if d.start_s - last.end_s <= gap_s => {
                last.mean_margin = match (last.mean_margin, d.mean_margin) {
                    (Some(a), Some(b)) => {
                        let (wa, wb) = (last.end_s - last.start_s, d.end_s - d.start_s);
                        Some((a * wa + b * wb) / (wa + wb))
                    }
                    (a, b) => a.or(b),
                };
                last.end_s = last.end_s.max(d.end_s);
                last.modalities.extend(d.modalities.iter().copied());
            }
            _ => out.push(d.clone()),
        }
    }
    let merged = DetectionLog::new(out).expect("merging keeps ids unique and spans valid");
    match log.recording_id() {
        Some(id) => merged.with_recording_id(id),
        None => merged,
    }
}
