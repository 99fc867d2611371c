//! RBF-SVM training, standardization, undersampling and cross-validation.

mod cv;
mod model;
mod sampling;
mod smo;
mod standardize;

use thiserror::Error;

use crate::features::FeatureError;
use crate::io::IoError;

pub use cv::{
    f1_score, grid_search, lopo_evaluate, CvPlan, Fold, FoldOutcome, FoldReport, GridResult,
    GridScore, SubjectData, TrainReport, TrainerConfig, train_all,
};
pub use model::{FittedModel, SvmModel};
pub use sampling::{stratified_folds, undersample_balanced, UNDERSAMPLE_RATIO};
pub use smo::{train_rbf_svm, SmoSolution, SvmParams};
pub use standardize::Standardizer;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("no seizure rows to undersample around")]
    NoPositives,
    #[error("empty training matrix")]
    Empty,
    #[error("every feature column is constant")]
    NoVariance,
    #[error("feature matrix has no labels")]
    Unlabelled,
    #[error("SMO did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("schema mismatch: model expects {expected}, features have {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("no grid candidate trained on every inner fold")]
    GridExhausted,
    #[error("subject {0} has no windows")]
    EmptySubject(String),
    #[error("cross-validation plan: {0}")]
    Plan(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Io(#[from] IoError),
}
