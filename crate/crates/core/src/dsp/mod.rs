//! Preprocessing: Butterworth filtering, window segmentation, the
//! accelerometer magnitude channel and ECG R-peak detection.

mod butterworth;
mod rpeak;
mod sos;
mod window;

pub use butterworth::{design_butterworth, FilterKind, FilterSpec, MAX_ORDER};
pub use rpeak::{detect_r_peaks, REFRACTORY_S};
pub use sos::{Biquad, SosFilter};
pub use window::{
    acc_magnitude_channel, segment_windows, window_count, window_ranges, Window, HOP_S, WINDOW_S,
};

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("empty input")]
    EmptyInput,
    #[error("signal of {duration_s:.3} s is shorter than the required {required_s} s")]
    TooShort { duration_s: f64, required_s: f64 },
    #[error("channels differ: {0}")]
    Mismatch(String),
    #[error("sampling rate {fs} Hz is below the required {required} Hz")]
    RateTooLow { fs: f64, required: f64 },
}
