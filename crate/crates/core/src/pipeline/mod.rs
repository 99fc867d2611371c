//! Configuration and orchestration of the detection stages.

mod cache;
mod config;
mod dataset;
mod detect;
mod experiment;
mod extract;
mod train;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::dsp::DspError;
use crate::evaluation::EvalError;
use crate::features::FeatureError;
use crate::fusion::FusionError;
use crate::io::{IoError, Modality};

pub use cache::{combine, digest_dir, digest_file, CacheEvent, FileDigest, Manifest, StageCache};
pub use config::{BandConfig, FilterConfig, FusionConfig, PipelineConfig};
pub use dataset::{list_recordings, load_features, run_experiment, ExperimentRun, ANNOTATIONS_FILE};
pub use detect::{run_detect, DetectOutput, LatencyReport, ModalityLatency};
pub use experiment::{
    combination_label, combination_slug, run_experiment_on, subject_data, CombinationOutcome, ExperimentReport,
    RecordingDetections, RecordingFeatures, TABLE_COMBINATIONS,
};
pub use train::{read_models, train_models, write_models, CvReport, TrainedModels, CV_REPORT_FILE, MODEL_FILE};
pub use extract::{common_window_count, extract_features, window_labels, ModalityExtractor, LABEL_OVERLAP};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error("recording {recording} has no {modality} channel")]
    MissingModality { recording: String, modality: Modality },
    #[error("no model for {0}")]
    MissingModel(Modality),
    #[error("cross-validation needs at least 2 subjects, found {0}")]
    TooFewSubjects(usize),
    #[error("{path}: {source}")]
    Fs {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    pub(crate) fn fs(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Fs {
            path: path.to_path_buf(),
            source,
        }
    }
}
