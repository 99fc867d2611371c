//! Leave-one-subject-out training per modality, then fusion and event
//! scoring for every modality combination.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classifier::{lopo_evaluate, CvPlan, FoldReport, SubjectData};
use crate::evaluation::{score_all, EventScore, MetricsRow, ScoringInput};
use crate::features::FeatureMatrix;
use crate::fusion::{fuse, merge_events, LabelSeries};
use crate::io::{AnnotationSet, DetectionLog, Modality};

use super::{PipelineConfig, PipelineError};

/// The table's row set, in its order.
pub const TABLE_COMBINATIONS: [&[Modality]; 8] = [
    &[Modality::Ecg],
    &[Modality::Acc],
    &[Modality::Emg],
    &[Modality::Eeg],
    &[Modality::Acc, Modality::Emg],
    &[Modality::Eeg, Modality::Acc],
    &[Modality::Eeg, Modality::Emg],
    &[Modality::Eeg, Modality::Emg, Modality::Acc],
];

/// Display label such as `EEG & EMG`.
pub fn combination_label(modalities: &[Modality]) -> String {
    modalities
        .iter()
        .map(|m| m.as_str().to_ascii_uppercase())
        .collect::<Vec<_>>()
        .join(" & ")
}

/// File-name friendly form such as `eeg+emg`.
pub fn combination_slug(modalities: &[Modality]) -> String {
    modalities.iter().map(|m| m.as_str()).collect::<Vec<_>>().join("+")
}

/// Labelled features of one recording.
#[derive(Debug, Clone)]
pub struct RecordingFeatures {
    pub recording_id: String,
    pub subject_id: String,
    pub hours: f64,
    pub truth: AnnotationSet,
    pub features: BTreeMap<Modality, FeatureMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingDetections {
    pub recording_id: String,
    pub hours: f64,
    pub detections: DetectionLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationOutcome {
    pub combination: String,
    pub modalities: Vec<Modality>,
    pub score: EventScore,
    pub recordings: Vec<RecordingDetections>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub config: PipelineConfig,
    pub cv: BTreeMap<Modality, Vec<FoldReport>>,
    pub rows: Vec<MetricsRow>,
    pub combinations: Vec<CombinationOutcome>,
}

impl ExperimentReport {
    pub fn row(&self, modalities: &[Modality]) -> Option<&EventScore> {
        let label = combination_label(modalities);
        self.rows.iter().find(|r| r.combination == label).map(|r| &r.score)
    }

    /// Per-recording scoring inputs of one combination, ids prefixed by recording.
    pub fn scoring_inputs(&self, modalities: &[Modality], truth: &BTreeMap<String, AnnotationSet>) -> Option<Vec<ScoringInput>> {
        let label = combination_label(modalities);
        let c = self.combinations.iter().find(|c| c.combination == label)?;
        c.recordings
            .iter()
            .map(|r| {
                Some(ScoringInput {
                    detections: r.detections.clone(),
                    truth: truth.get(&r.recording_id)?.clone(),
                    total_hours: r.hours,
                })
            })
            .collect()
    }
}

/// One labelled matrix per subject (its recordings concatenated in input
/// order) and the recording indices behind each.
pub fn subject_data(
    recordings: &[RecordingFeatures],
    subject_ids: &[String],
    m: Modality,
) -> Result<(Vec<SubjectData>, Vec<Vec<usize>>), PipelineError> {
    let mut data = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for s in subject_ids {
        let idx: Vec<usize> = (0..recordings.len()).filter(|&i| &recordings[i].subject_id == s).collect();
        let parts = idx
            .iter()
            .map(|&i| {
                recordings[i].features.get(&m).ok_or_else(|| PipelineError::MissingModality {
                    recording: recordings[i].recording_id.clone(),
                    modality: m,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        data.push(SubjectData {
            subject_id: s.clone(),
            matrix: FeatureMatrix::concat(&parts)?,
        });
        members.push(idx);
    }
    Ok((data, members))
}

/// Train every modality the combinations need, then fuse and score each combination.
pub fn run_experiment_on(
    recordings: &[RecordingFeatures],
    combinations: &[&[Modality]],
    cfg: &PipelineConfig,
) -> Result<ExperimentReport, PipelineError> {
    let subjects: BTreeSet<&str> = recordings.iter().map(|r| r.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(PipelineError::TooFewSubjects(subjects.len()));
    }
    let needed: BTreeSet<Modality> = combinations.iter().flat_map(|c| c.iter().copied()).collect();
    let subject_ids: Vec<String> = subjects.iter().map(|s| s.to_string()).collect();
    let plan = CvPlan::leave_one_out(&subject_ids, cfg.classifier.inner_k, cfg.seed)?;

    // decisions[modality][recording index]
    let mut decisions: BTreeMap<Modality, Vec<Vec<Option<f64>>>> = BTreeMap::new();
    let mut cv = BTreeMap::new();
    for &m in &needed {
        let (data, members) = subject_data(recordings, &subject_ids, m)?;
        let folds = lopo_evaluate(&data, &plan, &cfg.classifier)?;
        let mut per_rec = vec![Vec::new(); recordings.len()];
        for (fold, idx) in folds.iter().zip(&members) {
            let mut offset = 0;
            for &i in idx {
                let n = recordings[i].features[&m].rows();
                per_rec[i] = fold.decisions[offset..offset + n].to_vec();
                offset += n;
            }
        }
        decisions.insert(m, per_rec);
        cv.insert(m, folds.into_iter().map(|f| f.report).collect());
    }

    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for combo in combinations {
        let set: BTreeSet<Modality> = combo.iter().copied().collect();
        let rule = cfg.fusion.rule(&set)?;
        let mut inputs = Vec::new();
        let mut recs = Vec::new();
        for (i, r) in recordings.iter().enumerate() {
            let series = combo
                .iter()
                .map(|&m| {
                    let starts = r.features[&m].window_starts_s().to_vec();
                    LabelSeries::from_decisions(m, starts, decisions[&m][i].clone())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let fused = fuse(&series, &rule)?;
            let log = merge_events(&fused, cfg.fusion.merge_gap_s)
                .prefixed(&r.recording_id)
                .with_recording_id(&r.recording_id);
            inputs.push(ScoringInput {
                detections: log.clone(),
                truth: r.truth.clone(),
                total_hours: r.hours,
            });
            recs.push(RecordingDetections {
                recording_id: r.recording_id.clone(),
                hours: r.hours,
                detections: log,
            });
        }
        let score = score_all(&inputs)?;
        let label = combination_label(combo);
        rows.push(MetricsRow {
            combination: label.clone(),
            score,
        });
        outcomes.push(CombinationOutcome {
            combination: label,
            modalities: combo.to_vec(),
            score,
            recordings: recs,
        });
    }
    Ok(ExperimentReport {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        cv,
        rows,
        combinations: outcomes,
    })
}
