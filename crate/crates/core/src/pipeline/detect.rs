use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifier::SvmModel;
use crate::fusion::{fuse, merge_events, LabelSeries};
use crate::io::{DetectionLog, Modality, Recording};

use super::extract::{common_window_count, ModalityExtractor};
use super::{PipelineConfig, PipelineError};

/// Single-threaded wall time per window for one modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityLatency {
    pub modality: Modality,
    pub windows: usize,
    /// Mean of feature extraction plus prediction, per window.
    pub mean_ms: f64,
    pub max_ms: f64,
    /// Whole-channel filtering time, once per recording.
    pub filter_ms: f64,
    /// `mean_ms` plus the filtering time spread over every window.
    pub mean_with_filter_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub recording_id: String,
    pub modalities: Vec<ModalityLatency>,
}

impl LatencyReport {
    pub fn get(&self, modality: Modality) -> Option<&ModalityLatency> {
        self.modalities.iter().find(|m| m.modality == modality)
    }
}

#[derive(Debug, Clone)]
pub struct DetectOutput {
    pub detections: DetectionLog,
    pub latency: LatencyReport,
}

/// Extract, classify and fuse every configured modality of `rec`.
pub fn run_detect(
    rec: &Recording,
    models: &BTreeMap<Modality, SvmModel>,
    cfg: &PipelineConfig,
) -> Result<DetectOutput, PipelineError> {
    cfg.validate()?;
    let rule = cfg.fusion.rule(&cfg.modality_set())?;
    let n = common_window_count(rec, cfg);
    let mut series = Vec::new();
    let mut latency = Vec::new();
    for &m in &cfg.modalities {
        let model = models.get(&m).ok_or(PipelineError::MissingModel(m))?;
        let ex = ModalityExtractor::prepare(rec, m, cfg)?;
        model.check_schema(ex.schema())?;
        let mut decisions = Vec::with_capacity(n);
        let mut starts = Vec::with_capacity(n);
        let (mut total, mut worst) = (0.0f64, 0.0f64);
        for k in 0..n {
            let t0 = Instant::now();
            let d = match ex.window(k)? {
                Some(row) => Some(model.decision(&row)?),
                None => None,
            };
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            total += ms;
            worst = worst.max(ms);
            decisions.push(d);
            starts.push(ex.window_start_s(k));
        }
        let filter_ms = ex.prepare_time.as_secs_f64() * 1e3;
        let mean = if n > 0 { total / n as f64 } else { 0.0 };
        latency.push(ModalityLatency {
            modality: m,
            windows: n,
            mean_ms: mean,
            max_ms: worst,
            filter_ms,
            mean_with_filter_ms: if n > 0 { (total + filter_ms) / n as f64 } else { 0.0 },
        });
        series.push(LabelSeries::from_decisions(m, starts, decisions)?);
    }
    let fused = fuse(&series, &rule)?.with_recording_id(rec.id());
    Ok(DetectOutput {
        detections: merge_events(&fused, cfg.fusion.merge_gap_s),
        latency: LatencyReport {
            recording_id: rec.id().to_string(),
            modalities: latency,
        },
    })
}
