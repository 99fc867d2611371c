//! Review service: conditioned waveform segments, the detection queue,
//! verdict storage and post-review scoring.

pub mod conditioning;
pub mod load;
pub mod render;
pub mod report;
pub mod server;
pub mod store;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;

use tcsdet_core::dsp::DspError;
use tcsdet_core::evaluation::EvalError;
use tcsdet_core::io::IoError;

pub use conditioning::{condition_segment, review_filter, Conditioning, HIGHPASS_HZ, LOWPASS_HZ, NOTCH_BAND_HZ};
pub use load::load_review_set;
pub use render::{bucket_ranges, display_gain, envelope, render_segment, render_view, ChannelRender, DisplayGain, SegmentView};
pub use report::{export, global_id, metrics, queue, ExportDoc, MetricsDoc, QueueItem, RecordingReview, ReviewSet, ReviewStatus};
pub use server::{router, serve, AppState, QueueDoc, RecordingSource};
pub use store::{Receipt, ReviewStore, VerdictRequest};

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("unknown detection {0}")]
    UnknownDetection(String),
    #[error("unknown recording {0}")]
    UnknownRecording(String),
    #[error("detection {0} already has a verdict")]
    Duplicate(String),
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error("span [{start_s}, {end_s}] s is outside the {duration_s} s recording")]
    Span { start_s: f64, end_s: f64, duration_s: f64 },
    #[error("review log {path}: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("review store is closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Fs {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ReviewError {
    pub(crate) fn fs(path: &std::path::Path, source: std::io::Error) -> Self {
        ReviewError::Fs {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ReviewError::UnknownDetection(_) | ReviewError::UnknownRecording(_) => StatusCode::NOT_FOUND,
            ReviewError::Duplicate(_) => StatusCode::CONFLICT,
            ReviewError::Malformed(_) | ReviewError::Span { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ReviewError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}
