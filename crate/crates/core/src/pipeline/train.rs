//! Deployment training: the leave-one-subject-out folds for the cv report,
//! then one model per modality fitted on every subject.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{lopo_evaluate, train_all, CvPlan, FoldReport, SvmModel, TrainReport};
use crate::io::Modality;

use super::experiment::subject_data;
use super::{PipelineConfig, PipelineError, RecordingFeatures};

pub const MODEL_FILE: &str = "model.json";
pub const CV_REPORT_FILE: &str = "cv-report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config_hash: String,
    pub config: PipelineConfig,
    pub subjects: Vec<String>,
    pub folds: BTreeMap<Modality, Vec<FoldReport>>,
    #[serde(rename = "final")]
    pub final_models: BTreeMap<Modality, TrainReport>,
}

#[derive(Debug, Clone)]
pub struct TrainedModels {
    /// Per modality, the model of each fold keyed by held-out subject.
    pub folds: BTreeMap<Modality, Vec<(String, SvmModel)>>,
    pub models: BTreeMap<Modality, SvmModel>,
    pub report: CvReport,
}

pub fn train_models(recordings: &[RecordingFeatures], cfg: &PipelineConfig) -> Result<TrainedModels, PipelineError> {
    cfg.validate()?;
    let subjects: BTreeSet<&str> = recordings.iter().map(|r| r.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(PipelineError::TooFewSubjects(subjects.len()));
    }
    let subject_ids: Vec<String> = subjects.iter().map(|s| s.to_string()).collect();
    let plan = CvPlan::leave_one_out(&subject_ids, cfg.classifier.inner_k, cfg.seed)?;
    let mut folds = BTreeMap::new();
    let mut models = BTreeMap::new();
    let mut fold_reports = BTreeMap::new();
    let mut final_reports = BTreeMap::new();
    for &m in &cfg.modalities {
        let (data, _) = subject_data(recordings, &subject_ids, m)?;
        let outcomes = lopo_evaluate(&data, &plan, &cfg.classifier)?;
        fold_reports.insert(m, outcomes.iter().map(|o| o.report.clone()).collect());
        folds.insert(m, outcomes.into_iter().map(|o| (o.report.held_out, o.model)).collect());
        let (model, report) = train_all(&data, &cfg.classifier, cfg.seed)?;
        models.insert(m, model);
        final_reports.insert(m, report);
    }
    Ok(TrainedModels {
        folds,
        models,
        report: CvReport {
            config_hash: cfg.hash(),
            config: cfg.clone(),
            subjects: subject_ids,
            folds: fold_reports,
            final_models: final_reports,
        },
    })
}

/// Writes `<out>/<modality>/model.json`, `<out>/<modality>/fold-<subject>.json`
/// and `<out>/cv-report.json`.
pub fn write_models(trained: &TrainedModels, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    for (m, model) in &trained.models {
        let dir = out.join(m.as_str());
        fs::create_dir_all(&dir).map_err(|e| PipelineError::fs(&dir, e))?;
        let path = dir.join(MODEL_FILE);
        model.write(&path)?;
        written.push(path);
        for (held_out, fold) in &trained.folds[m] {
            let path = dir.join(format!("fold-{held_out}.json"));
            fold.write(&path)?;
            written.push(path);
        }
    }
    let path = out.join(CV_REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&trained.report).expect("report serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| PipelineError::fs(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Deployment models of `modalities` from a directory written by [`write_models`].
pub fn read_models(dir: &Path, modalities: &[Modality]) -> Result<BTreeMap<Modality, SvmModel>, PipelineError> {
    let mut out = BTreeMap::new();
    for &m in modalities {
        let path = dir.join(m.as_str()).join(MODEL_FILE);
        if !path.is_file() {
            return Err(PipelineError::MissingModel(m));
        }
        out.insert(m, SvmModel::read(&path)?);
    }
    Ok(out)
}
