use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Serialize;

use tcsdet_core::evaluation::{apply_review, render_table, score_events, score_all, EventScore, MetricsRow, ScoringInput};
use tcsdet_core::io::{
    read_annotations, read_detections, read_recording, read_reviews, write_annotations, write_detections, write_recording,
    Detection, DetectionLog, Modality,
};
use tcsdet_core::pipeline::{
    list_recordings, load_features, read_models, run_detect, run_experiment, train_models, write_models, FileDigest,
    LatencyReport, Manifest, PipelineConfig, RecordingFeatures, StageCache, ANNOTATIONS_FILE, TABLE_COMBINATIONS,
};
use tcsdet_core::synth::{generate_recording, SynthConfig};
use tcsdet_review::{load_review_set, AppState, ReviewStore};

use crate::error::CliError;
use crate::{Cli, Command};

pub const CONFOUNDERS_FILE: &str = "confounders.json";

pub fn run(cli: &Cli, cfg: &PipelineConfig, manifest: &mut Manifest) -> Result<(), CliError> {
    let out = &cli.global.out;
    fs::create_dir_all(out).map_err(|e| CliError::fs(out, e))?;
    let cache_dir = cli.global.cache.clone().unwrap_or_else(|| out.join("cache"));
    let mut cache = StageCache::new(cache_dir);
    let result = match &cli.command {
        Command::Synth {
            subjects,
            hours,
            seizures,
            artifact_rate,
        } => synth(out, cfg, *subjects, *hours, *seizures, *artifact_rate, manifest),
        Command::Extract { data } => extract(data, out, cfg, &mut cache, manifest),
        Command::Train { data } => train(data, out, cfg, &mut cache, manifest),
        Command::Detect { data, models } => detect(data, models, out, cfg, manifest),
        Command::Evaluate {
            data,
            detections,
            reviews,
        } => evaluate(data, detections, reviews.as_deref(), out, manifest),
        Command::Report { data } => report(data, out, cfg, &mut cache, manifest),
        Command::ReviewServe {
            data,
            detections,
            reviews,
            host,
            port,
        } => {
            let store = reviews.clone().unwrap_or_else(|| out.join("reviews"));
            review_serve(data, detections, &store, host, *port, out, manifest)
        }
    };
    manifest.cache = cache.events().to_vec();
    result
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>, CliError> {
    paths.iter().map(|p| FileDigest::of(p).map_err(CliError::from)).collect()
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::fs(path, e))?;
    Ok(path.to_path_buf())
}

/// A single recording directory, or every recording under a dataset.
fn recording_dirs(data: &Path) -> Result<Vec<PathBuf>, CliError> {
    if data.join("recording.json").is_file() {
        return Ok(vec![data.to_path_buf()]);
    }
    if !data.is_dir() {
        return Err(CliError::Input(format!("{} is not a directory", data.display())));
    }
    let dirs = list_recordings(data)?;
    if dirs.is_empty() {
        return Err(CliError::Input(format!("no recordings under {}", data.display())));
    }
    Ok(dirs)
}

fn synth(
    out: &Path,
    cfg: &PipelineConfig,
    subjects: usize,
    hours: f64,
    seizures: usize,
    artifact_rate: f64,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let mut written = Vec::new();
    for k in 0..subjects {
        let id = format!("sub-{:02}", k + 1);
        let sc = SynthConfig {
            seed: cfg.seed.wrapping_add(k as u64),
            subject_id: id.clone(),
            recording_id: id.clone(),
            duration_h: hours,
            n_seizures: seizures,
            artifact_rate_per_h: artifact_rate,
            ..SynthConfig::default()
        };
        let s = generate_recording(&sc)?;
        let dir = out.join(&id);
        write_recording(&s.recording, &dir).map_err(|e| CliError::Filesystem(e.to_string()))?;
        write_annotations(&s.annotations, &dir.join(ANNOTATIONS_FILE)).map_err(|e| CliError::Filesystem(e.to_string()))?;
        write_json(&s.confounders, &dir.join(CONFOUNDERS_FILE))?;
        println!("{id}: {} seizures, {} confounders", s.annotations.len(), s.confounders.len());
        written.push(dir);
    }
    manifest.outputs = digests(&written)?;
    Ok(())
}

fn load_all(
    data: &Path,
    cfg: &PipelineConfig,
    cache: &mut StageCache,
    manifest: &mut Manifest,
) -> Result<Vec<(RecordingFeatures, String)>, CliError> {
    let dirs = recording_dirs(data)?;
    manifest.inputs = digests(&dirs)?;
    dirs.iter()
        .map(|d| load_features(d, &cfg.modality_set(), cfg, cache).map_err(CliError::from))
        .collect()
}

#[derive(Serialize)]
struct FeatureSummary {
    recording_id: String,
    subject_id: String,
    hours: f64,
    cache_key: String,
    rows: BTreeMap<Modality, usize>,
    positives: BTreeMap<Modality, usize>,
}

fn extract(data: &Path, out: &Path, cfg: &PipelineConfig, cache: &mut StageCache, manifest: &mut Manifest) -> Result<(), CliError> {
    let loaded = load_all(data, cfg, cache, manifest)?;
    let summary: Vec<FeatureSummary> = loaded
        .iter()
        .map(|(r, key)| FeatureSummary {
            recording_id: r.recording_id.clone(),
            subject_id: r.subject_id.clone(),
            hours: r.hours,
            cache_key: key.clone(),
            rows: r.features.iter().map(|(m, f)| (*m, f.rows())).collect(),
            positives: r
                .features
                .iter()
                .map(|(m, f)| (*m, f.labels().map_or(0, |l| l.iter().filter(|&&b| b).count())))
                .collect(),
        })
        .collect();
    let path = write_json(&summary, &out.join("features.json"))?;
    manifest.outputs = digests(&[path])?;
    Ok(())
}

fn train(data: &Path, out: &Path, cfg: &PipelineConfig, cache: &mut StageCache, manifest: &mut Manifest) -> Result<(), CliError> {
    let recordings: Vec<RecordingFeatures> = load_all(data, cfg, cache, manifest)?.into_iter().map(|(r, _)| r).collect();
    let trained = train_models(&recordings, cfg)?;
    let written = write_models(&trained, &out.join("models"))?;
    for (m, r) in &trained.report.final_models {
        println!("{m}: C={} gamma={:.4} support vectors {}", r.c, r.gamma, r.support_vectors);
    }
    manifest.outputs = digests(&written)?;
    Ok(())
}

fn detect(data: &Path, models: &Path, out: &Path, cfg: &PipelineConfig, manifest: &mut Manifest) -> Result<(), CliError> {
    let dirs = recording_dirs(data)?;
    let models_by_modality = read_models(models, &cfg.modalities)?;
    let mut inputs = dirs.clone();
    inputs.push(models.to_path_buf());
    manifest.inputs = digests(&inputs)?;
    let det_dir = out.join("detections");
    fs::create_dir_all(&det_dir).map_err(|e| CliError::fs(&det_dir, e))?;
    let mut written = Vec::new();
    let mut latency: Vec<LatencyReport> = Vec::new();
    for d in &dirs {
        let rec = read_recording(d)?;
        let result = run_detect(&rec, &models_by_modality, cfg)?;
        let path = det_dir.join(format!("{}.json", rec.id()));
        write_detections(&result.detections, &path).map_err(|e| CliError::Filesystem(e.to_string()))?;
        println!("{}: {} detections", rec.id(), result.detections.len());
        written.push(path);
        latency.push(result.latency);
    }
    written.push(write_json(&latency, &out.join("latency.json"))?);
    manifest.outputs = digests(&written)?;
    Ok(())
}

/// Ids as `{recording}:{id}`, whether or not the log already carries the prefix.
fn global_ids(log: &DetectionLog, recording_id: &str) -> Result<DetectionLog, CliError> {
    let prefix = format!("{recording_id}:");
    let detections = log
        .detections()
        .iter()
        .map(|d| Detection {
            id: if d.id.starts_with(&prefix) { d.id.clone() } else { format!("{prefix}{}", d.id) },
            ..d.clone()
        })
        .collect();
    Ok(DetectionLog::new(detections)?.with_recording_id(recording_id))
}

#[derive(Serialize)]
struct RecordingScore {
    recording_id: String,
    score: EventScore,
}

#[derive(Serialize)]
struct Evaluation {
    score: EventScore,
    #[serde(skip_serializing_if = "Option::is_none")]
    post_review: Option<EventScore>,
    recordings: Vec<RecordingScore>,
}

fn evaluate(data: &Path, detections: &Path, reviews: Option<&Path>, out: &Path, manifest: &mut Manifest) -> Result<(), CliError> {
    let dirs = recording_dirs(data)?;
    let mut inputs_paths = dirs.clone();
    inputs_paths.push(detections.to_path_buf());
    inputs_paths.extend(reviews.map(Path::to_path_buf));
    manifest.inputs = digests(&inputs_paths)?;
    let mut inputs = Vec::new();
    let mut per_recording = Vec::new();
    for d in &dirs {
        let rec = read_recording(d)?;
        let truth = read_annotations(&d.join(ANNOTATIONS_FILE))?;
        let path = detections.join(format!("{}.json", rec.id()));
        if !path.is_file() {
            return Err(CliError::Input(format!("no detection log {}", path.display())));
        }
        let log = global_ids(&read_detections(&path)?, rec.id())?;
        let hours = rec.duration_s() / 3600.0;
        let score = score_events(&log, &truth, hours).map_err(|e| CliError::Processing(e.to_string()))?;
        per_recording.push(RecordingScore {
            recording_id: rec.id().to_string(),
            score,
        });
        inputs.push(ScoringInput {
            detections: log,
            truth,
            total_hours: hours,
        });
    }
    let score = score_all(&inputs).map_err(|e| CliError::Processing(e.to_string()))?;
    let post_review = match reviews {
        Some(p) => Some(apply_review(&inputs, &read_reviews(p)?).map_err(|e| CliError::Input(e.to_string()))?),
        None => None,
    };
    let mut rows = vec![MetricsRow {
        combination: "detections".into(),
        score,
    }];
    if let Some(post) = post_review {
        rows.push(MetricsRow {
            combination: "after review".into(),
            score: post,
        });
    }
    let table = render_table(&rows);
    print!("{table}");
    let table_path = out.join("evaluation.txt");
    fs::write(&table_path, table).map_err(|e| CliError::fs(&table_path, e))?;
    let doc = Evaluation {
        score,
        post_review,
        recordings: per_recording,
    };
    let path = write_json(&doc, &out.join("evaluation.json"))?;
    manifest.outputs = digests(&[path, table_path])?;
    Ok(())
}

fn report(data: &Path, out: &Path, cfg: &PipelineConfig, cache: &mut StageCache, manifest: &mut Manifest) -> Result<(), CliError> {
    let dirs = recording_dirs(data)?;
    manifest.inputs = digests(&dirs)?;
    let run = run_experiment(data, out, cfg, &TABLE_COMBINATIONS, cache)?;
    print!("{}", render_table(&run.report.rows));
    manifest.outputs = digests(&run.outputs)?;
    Ok(())
}

fn review_serve(
    data: &Path,
    detections: &Path,
    store_dir: &Path,
    host: &str,
    port: u16,
    out: &Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| CliError::Config(format!("address {host}:{port}: {e}")))?;
    manifest.inputs = digests(&[data.to_path_buf(), detections.to_path_buf()])?;
    let (set, recordings) = load_review_set(data, detections)?;
    let store = ReviewStore::open(set, store_dir)?;
    manifest.write(&out.join(crate::MANIFEST_FILE))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Service(e.to_string()))?;
    runtime.block_on(async {
        let state = AppState::new(store, recordings);
        println!("review service on http://{addr}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        tcsdet_review::serve(state, addr, shutdown)
            .await
            .map_err(|e| CliError::Service(format!("{addr}: {e}")))
    })?;
    manifest.outputs = digests(&[store_dir.to_path_buf()])?;
    Ok(())
}
