//! `tcsdet`: synthetic data, feature extraction, training, detection,
//! evaluation, reporting and the review service.

mod commands;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tcsdet_core::io::Modality;
use tcsdet_core::pipeline::{Manifest, PipelineConfig};

use error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "tcsdet", version, about = "Multimodal tonic-clonic seizure detection")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured modalities, e.g. `eeg,emg`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub modalities: Option<Vec<Modality>>,
    /// Output directory; the run manifest is written here.
    #[arg(long, global = true, default_value = "tcsdet-out")]
    pub out: PathBuf,
    /// Stage cache directory (default: `<out>/cache`).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multimodal dataset.
    Synth {
        #[arg(long, default_value_t = 10)]
        subjects: usize,
        #[arg(long, default_value_t = 8.0)]
        hours: f64,
        #[arg(long, default_value_t = 3)]
        seizures: usize,
        /// Confounding artifacts per hour.
        #[arg(long, default_value_t = 4.0)]
        artifact_rate: f64,
    },
    /// Compute labelled feature matrices for every recording.
    Extract {
        #[arg(long)]
        data: PathBuf,
    },
    /// Leave-one-subject-out training plus one deployment model per modality.
    Train {
        #[arg(long)]
        data: PathBuf,
    },
    /// Run trained models over recordings.
    Detect {
        /// A dataset directory or a single recording directory.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
    /// Score detection logs against annotations.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        /// Review log; adds a post-review score.
        #[arg(long)]
        reviews: Option<PathBuf>,
    },
    /// Cross-validated metrics for every modality combination of the table.
    Report {
        #[arg(long)]
        data: PathBuf,
    },
    /// Serve detections for human review.
    ReviewServe {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        /// Verdict store (default: `<out>/reviews`).
        #[arg(long)]
        reviews: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Extract { .. } => "extract",
            Command::Train { .. } => "train",
            Command::Detect { .. } => "detect",
            Command::Evaluate { .. } => "evaluate",
            Command::Report { .. } => "report",
            Command::ReviewServe { .. } => "review-serve",
        }
    }
}

/// Effective configuration: file (or defaults) plus command-line overrides.
pub fn effective_config(g: &GlobalArgs) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            PipelineConfig::from_toml(&text)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(m) = &g.modalities {
        cfg.modalities = m.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_manifest(manifest: &Manifest, out: &Path) {
    if let Err(e) = manifest.write(&out.join(MANIFEST_FILE)) {
        eprintln!("warning: could not write manifest: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut manifest = Manifest::start(cli.command.name());
    let result = match effective_config(&cli.global) {
        Ok(cfg) => {
            manifest = manifest.with_config(&cfg, cfg.hash());
            manifest.seed = Some(cfg.seed);
            commands::run(&cli, &cfg, &mut manifest)
        }
        Err(e) => Err(e),
    };
    manifest.finish(result.as_ref().map(|_| ()).map_err(|e| e.to_string()));
    write_manifest(&manifest, &cli.global.out);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
