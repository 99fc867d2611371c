//! Directory-level experiment with cached feature and training stages.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evaluation::render_table;
use crate::features::{read_matrix, write_matrix};
use crate::io::{read_annotations, read_recording, write_detections, Modality};

use super::cache::{combine, digest_dir, StageCache};
use super::experiment::{combination_slug, run_experiment_on, ExperimentReport, RecordingFeatures};
use super::extract::extract_features;
use super::{PipelineConfig, PipelineError};

pub const ANNOTATIONS_FILE: &str = "annotations.json";

/// Recording directories (those holding `recording.json`) under `dataset`, sorted.
pub fn list_recordings(dataset: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(dataset)
        .map_err(|e| PipelineError::fs(dataset, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("recording.json").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FeatureMeta {
    recording_id: String,
    subject_id: String,
    hours: f64,
}

fn read_meta(path: &Path) -> Option<FeatureMeta> {
    serde_json::from_str(&fs::read_to_string(path).ok()?).ok()
}

/// Labelled features of the recording in `dir`, reusing cached matrices whose
/// key (recording content plus extraction settings) is unchanged.
pub fn load_features(
    dir: &Path,
    modalities: &BTreeSet<Modality>,
    cfg: &PipelineConfig,
    cache: &mut StageCache,
) -> Result<(RecordingFeatures, String), PipelineError> {
    let key = combine(&[&digest_dir(dir)?, &cfg.extraction_hash()]);
    let entry = cache.entry("features", &key)?;
    let meta_path = entry.join("meta.json");
    let truth = read_annotations(&dir.join(ANNOTATIONS_FILE))?;

    let cached = read_meta(&meta_path).and_then(|meta| {
        let mut features = BTreeMap::new();
        for &m in modalities {
            features.insert(m, read_matrix(&entry.join(format!("{m}.tcsf"))).ok()?);
        }
        Some((meta, features))
    });
    let (meta, features) = match cached {
        Some(hit) => {
            cache.record("features", &key, true);
            hit
        }
        None => {
            let rec = read_recording(dir)?;
            let list: Vec<Modality> = modalities.iter().copied().collect();
            let features = extract_features(&rec, &list, Some(&truth), cfg)?;
            fs::create_dir_all(&entry).map_err(|e| PipelineError::fs(&entry, e))?;
            for (m, matrix) in &features {
                write_matrix(matrix, &entry.join(format!("{m}.tcsf")))?;
            }
            let meta = FeatureMeta {
                recording_id: rec.id().to_string(),
                subject_id: rec.subject_id().to_string(),
                hours: rec.duration_s() / 3600.0,
            };
            fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("serializes"))
                .map_err(|e| PipelineError::fs(&meta_path, e))?;
            cache.record("features", &key, false);
            (meta, features)
        }
    };
    Ok((
        RecordingFeatures {
            recording_id: meta.recording_id,
            subject_id: meta.subject_id,
            hours: meta.hours,
            truth,
            features,
        },
        key,
    ))
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub outputs: Vec<PathBuf>,
}

/// Full experiment over every recording in `dataset`, writing `report.json`,
/// `table.txt` and per-combination detection logs under `out`.
pub fn run_experiment(
    dataset: &Path,
    out: &Path,
    cfg: &PipelineConfig,
    combinations: &[&[Modality]],
    cache: &mut StageCache,
) -> Result<ExperimentRun, PipelineError> {
    cfg.validate()?;
    let dirs = list_recordings(dataset)?;
    let needed: BTreeSet<Modality> = combinations.iter().flat_map(|c| c.iter().copied()).collect();
    let mut recordings = Vec::with_capacity(dirs.len());
    let mut keys = Vec::with_capacity(dirs.len() + 2);
    for d in &dirs {
        let (r, key) = load_features(d, &needed, cfg, cache)?;
        recordings.push(r);
        keys.push(key);
    }
    let combos: Vec<String> = combinations.iter().map(|c| combination_slug(c)).collect();
    keys.push(cfg.hash());
    keys.push(combos.join(","));
    let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
    let key = combine(&refs);
    let entry = cache.entry("experiment", &format!("{key}.json"))?;

    let cached: Option<ExperimentReport> = fs::read_to_string(&entry)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    let report = match cached {
        Some(r) => {
            cache.record("experiment", &key, true);
            r
        }
        None => {
            let r = run_experiment_on(&recordings, combinations, cfg)?;
            let text = serde_json::to_string(&r).expect("report serializes");
            fs::write(&entry, text).map_err(|e| PipelineError::fs(&entry, e))?;
            cache.record("experiment", &key, false);
            r
        }
    };

    fs::create_dir_all(out).map_err(|e| PipelineError::fs(out, e))?;
    let mut outputs = Vec::new();
    let report_path = out.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text).map_err(|e| PipelineError::fs(&report_path, e))?;
    outputs.push(report_path);
    let table_path = out.join("table.txt");
    fs::write(&table_path, render_table(&report.rows)).map_err(|e| PipelineError::fs(&table_path, e))?;
    outputs.push(table_path);
    for c in &report.combinations {
        let dir = out.join("detections").join(combination_slug(&c.modalities));
        fs::create_dir_all(&dir).map_err(|e| PipelineError::fs(&dir, e))?;
        for r in &c.recordings {
            let p = dir.join(format!("{}.json", r.recording_id));
            write_detections(&r.detections, &p)?;
            outputs.push(p);
        }
    }
    Ok(ExperimentRun { report, outputs })
}
