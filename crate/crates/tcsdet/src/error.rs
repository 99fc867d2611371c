use std::process::ExitCode;

use thiserror::Error;

use tcsdet_core::io::IoError;
use tcsdet_core::pipeline::PipelineError;
use tcsdet_core::synth::SynthError;
use tcsdet_review::ReviewError;

/// Exit status per error class. Clap reports usage errors with 2.
pub mod code {
    pub const CONFIG: u8 = 3;
    pub const INPUT: u8 = 4;
    pub const PROCESSING: u8 = 5;
    pub const FILESYSTEM: u8 = 6;
    pub const SERVICE: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("processing: {0}")]
    Processing(String),
    #[error("filesystem: {0}")]
    Filesystem(String),
    #[error("review service: {0}")]
    Service(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => code::CONFIG,
            CliError::Input(_) => code::INPUT,
            CliError::Processing(_) => code::PROCESSING,
            CliError::Filesystem(_) => code::FILESYSTEM,
            CliError::Service(_) => code::SERVICE,
        })
    }

    pub fn fs(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Filesystem(format!("{}: {e}", path.display()))
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let msg = e.to_string();
        match e {
            PipelineError::Config(_) => CliError::Config(msg),
            PipelineError::Io(_)
            | PipelineError::MissingModality { .. }
            | PipelineError::MissingModel(_)
            | PipelineError::TooFewSubjects(_) => CliError::Input(msg),
            PipelineError::Fs { .. } => CliError::Filesystem(msg),
            PipelineError::Dsp(_)
            | PipelineError::Feature(_)
            | PipelineError::Classifier(_)
            | PipelineError::Fusion(_)
            | PipelineError::Eval(_) => CliError::Processing(msg),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        let msg = e.to_string();
        match e {
            SynthError::Config(_) | SynthError::DoesNotFit(_) => CliError::Config(msg),
            SynthError::Io(_) => CliError::Filesystem(msg),
            _ => CliError::Processing(msg),
        }
    }
}

impl From<ReviewError> for CliError {
    fn from(e: ReviewError) -> Self {
        let msg = e.to_string();
        match e {
            ReviewError::Io(_) | ReviewError::UnknownRecording(_) | ReviewError::Corrupt { .. } => CliError::Input(msg),
            ReviewError::Fs { .. } => CliError::Filesystem(msg),
            _ => CliError::Service(msg),
        }
    }
}
