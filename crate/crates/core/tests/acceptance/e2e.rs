//! Synthetic corpus run: 10 subjects × 8 h, full leave-one-subject-out
//! training, fusion of every EEG/EMG/ACC combination, then the review and
//! latency checks on the same data.

use std::collections::BTreeMap;
use std::time::Instant;

use chrono::Utc;
use tcsdet_core::classifier::train_all;
use tcsdet_core::evaluation::{apply_review, score_all, ScoringInput};
use tcsdet_core::io::{AnnotationSet, Modality, ReviewLog, Verdict, VerdictKind};
use tcsdet_core::pipeline::{
    combination_label, extract_features, run_detect, run_experiment_on, subject_data, ExperimentReport,
    PipelineConfig, RecordingFeatures, TABLE_COMBINATIONS,
};
use tcsdet_core::synth::{generate_recording, SynthConfig};

use crate::Check;

const SUBJECTS: u64 = 10;
const HOURS: f64 = 8.0;
const SEIZURES: usize = 3;
const CONFOUNDERS_PER_H: f64 = 4.0;
const SEED: u64 = 2024;
const MODALITIES: [Modality; 3] = [Modality::Eeg, Modality::Emg, Modality::Acc];

pub struct Corpus {
    pub cfg: PipelineConfig,
    pub recordings: Vec<RecordingFeatures>,
    pub report: ExperimentReport,
}

fn config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.seed = SEED;
    // Grid search on a stratified subsample keeps ten folds × three
    // modalities inside the time budget; final fold models see every row.
    cfg.classifier.grid_max_rows = Some(2000);
    cfg
}

fn synth_config(k: u64) -> SynthConfig {
    SynthConfig {
        seed: SEED + k,
        subject_id: format!("sub-{:02}", k + 1),
        recording_id: format!("sub-{:02}_night", k + 1),
        duration_h: HOURS,
        n_seizures: SEIZURES,
        artifact_rate_per_h: CONFOUNDERS_PER_H,
        ..SynthConfig::default()
    }
}

/// Combinations without ECG, in table order.
fn combinations() -> Vec<&'static [Modality]> {
    TABLE_COMBINATIONS.iter().copied().filter(|c| !c.contains(&Modality::Ecg)).collect()
}

pub fn run_corpus() -> Result<(Corpus, String), String> {
    let cfg = config();
    let t0 = Instant::now();
    let mut recordings = Vec::new();
    for k in 0..SUBJECTS {
        let out = generate_recording(&synth_config(k)).map_err(|e| e.to_string())?;
        let rec = out.recording;
        let features = extract_features(&rec, &MODALITIES, Some(&out.annotations), &cfg).map_err(|e| e.to_string())?;
        recordings.push(RecordingFeatures {
            recording_id: rec.id().to_string(),
            subject_id: rec.subject_id().to_string(),
            hours: rec.duration_s() / 3600.0,
            truth: out.annotations,
            features,
        });
    }
    let extracted = t0.elapsed().as_secs_f64();
    let report = run_experiment_on(&recordings, &combinations(), &cfg).map_err(|e| e.to_string())?;
    let trained = t0.elapsed().as_secs_f64() - extracted;
    let summary = format!("synth+extract {extracted:.0} s, LOPO+fusion {trained:.0} s");
    Ok((Corpus { cfg, recordings, report }, summary))
}

pub fn check_fusion_benefit(report: &ExperimentReport) -> Check {
    let row = |ms: &[Modality]| {
        report.row(ms).copied().ok_or_else(|| format!("no row for {}", combination_label(ms)))
    };
    let mut lines = Vec::new();
    for ms in combinations() {
        let s = row(ms)?;
        lines.push(format!(
            "{} {}/{} fp {} ({:.2}/24h)",
            combination_label(ms),
            s.tp,
            s.tp + s.fn_,
            s.fp,
            s.fpr_per_24h
        ));
    }
    let table = lines.join("; ");
    let mut problems = Vec::new();
    for m in MODALITIES {
        let s = row(&[m])?;
        if s.sensitivity < 0.9 {
            problems.push(format!("{m} sensitivity {:.3} < 0.90", s.sensitivity));
        }
        if s.fpr_per_24h <= 0.0 {
            problems.push(format!("{m} has no false positives"));
        }
    }
    let pairs: Vec<&[Modality]> = combinations().into_iter().filter(|c| c.len() == 2).collect();
    let triple = [Modality::Eeg, Modality::Emg, Modality::Acc];
    for p in &pairs {
        let s = row(p)?;
        let floor = p.iter().map(|&m| row(&[m]).map(|u| u.fpr_per_24h)).collect::<Result<Vec<_>, _>>()?;
        let limit = 0.5 * floor.iter().cloned().fold(f64::INFINITY, f64::min);
        if s.fpr_per_24h > limit {
            problems.push(format!("{} FPR {:.3} > {limit:.3}", combination_label(p), s.fpr_per_24h));
        }
    }
    let t = row(&triple)?;
    for p in &pairs {
        let s = row(p)?;
        if t.fpr_per_24h > s.fpr_per_24h {
            problems.push(format!("triple FPR {:.3} > {} FPR {:.3}", t.fpr_per_24h, combination_label(p), s.fpr_per_24h));
        }
    }
    for ms in combinations().into_iter().filter(|c| c.len() > 1) {
        let s = row(ms)?;
        if s.sensitivity < 0.85 {
            problems.push(format!("{} sensitivity {:.3} < 0.85", combination_label(ms), s.sensitivity));
        }
    }
    if problems.is_empty() {
        Ok(table)
    } else {
        Err(format!("{}; [{table}]", problems.join("; ")))
    }
}

/// Reject every detection lying outside all seizures, then re-score.
pub fn check_post_review(c: &Corpus) -> Check {
    let truth: BTreeMap<String, AnnotationSet> =
        c.recordings.iter().map(|r| (r.recording_id.clone(), r.truth.clone())).collect();
    let mut rejected = 0;
    for outcome in &c.report.combinations {
        let inputs: Vec<ScoringInput> = c
            .report
            .scoring_inputs(&outcome.modalities, &truth)
            .ok_or_else(|| format!("{}: missing truth", outcome.combination))?;
        let before = score_all(&inputs).map_err(|e| e.to_string())?;
        let mut verdicts = Vec::new();
        for input in &inputs {
            for d in input.detections.detections() {
                let true_positive = input.truth.events().iter().any(|e| e.onset_s <= d.start_s && d.end_s <= e.offset_s);
                if !true_positive {
                    verdicts.push(Verdict {
                        detection_id: d.id.clone(),
                        verdict: VerdictKind::Fp,
                        reviewer: "acceptance".into(),
                        decided_at: Utc::now(),
                        review_ms: 1_000,
                    });
                }
            }
        }
        rejected += verdicts.len();
        let log = ReviewLog::new(verdicts).map_err(|e| e.to_string())?;
        let after = apply_review(&inputs, &log).map_err(|e| e.to_string())?;
        ensure!(after.fp == 0, "{}: {} false positives after review", outcome.combination, after.fp);
        ensure!(
            after.sensitivity == before.sensitivity && after.tp == before.tp,
            "{}: sensitivity {} -> {}",
            outcome.combination,
            before.sensitivity,
            after.sensitivity
        );
    }
    Ok(format!("{rejected} false positives rejected over {} combinations; fp 0, sensitivity unchanged", c.report.combinations.len()))
}

/// Deployment models trained on the whole corpus score a fresh 1 h recording.
pub fn check_latency(c: &Corpus) -> Check {
    let ids: Vec<String> = {
        let mut s: Vec<String> = c.recordings.iter().map(|r| r.subject_id.clone()).collect();
        s.dedup();
        s
    };
    let mut models = BTreeMap::new();
    for m in MODALITIES {
        let (data, _) = subject_data(&c.recordings, &ids, m).map_err(|e| e.to_string())?;
        let (model, _) = train_all(&data, &c.cfg.classifier, c.cfg.seed).map_err(|e| e.to_string())?;
        models.insert(m, model);
    }
    let fresh = SynthConfig {
        seed: SEED + 100,
        subject_id: "sub-bench".into(),
        recording_id: "sub-bench_night".into(),
        duration_h: 1.0,
        n_seizures: 1,
        ..SynthConfig::default()
    };
    let rec = generate_recording(&fresh).map_err(|e| e.to_string())?.recording;
    let mut cfg = c.cfg.clone();
    cfg.modalities = MODALITIES.to_vec();
    let out = run_detect(&rec, &models, &cfg).map_err(|e| e.to_string())?;

    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-latency.json");
    let text = serde_json::to_string_pretty(&out.latency).map_err(|e| e.to_string())?;
    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;

    let budgets = [(Modality::Eeg, 100.0), (Modality::Emg, 120.0), (Modality::Acc, 1000.0)];
    let mut parts = Vec::new();
    for (m, budget) in budgets {
        let l = out.latency.get(m).ok_or_else(|| format!("no latency for {m}"))?;
        ensure!(l.mean_ms < budget, "{m} mean {:.3} ms >= {budget} ms", l.mean_ms);
        ensure!(l.mean_with_filter_ms < 1000.0, "{m} mean with filtering {:.3} ms >= 1 s hop", l.mean_with_filter_ms);
        parts.push(format!("{m} {:.3} ms (max {:.2})", l.mean_ms, l.max_ms));
    }
    Ok(format!("{}; report {}", parts.join(", "), path.display()))
}
