//! Command-line front end.
//!
//! Set `BIQA_THREADS` to bound the worker pool.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_build_model, cmd_distort, cmd_evaluate, cmd_score, cmd_train, timing_path, ScoreOutput,
    Timing,
};
pub use config::{RunConfig, KEYS};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "BIQA_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "biqa",
    version,
    about = "Blind image quality assessment from autoencoder feature statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for pair in &self.set {
            config.set_pair(pair)?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the autoencoder on a folder of pristine images.
    Train {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fit the natural model to a folder of pristine images.
    BuildModel {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score one image, or fill the score column of a manifest (.csv).
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Where to write a scored manifest; defaults to the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the distortion benchmark and its manifest.
    Distort {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Noise seed; overrides `distort_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Correlate scores with distortion levels.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Report CSV; defaults to report.csv beside the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: &Cli, log: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Train {
            images,
            out,
            config,
        } => cmd_train(images, &config.resolve()?, out, log).map(drop),
        Command::BuildModel {
            images,
            ckpt,
            out,
            config,
        } => cmd_build_model(images, ckpt, &config.resolve()?, out, log).map(drop),
        Command::Score {
            model,
            ckpt,
            input,
            out,
        } => cmd_score(model, ckpt, input, out.as_deref(), log).map(drop),
        Command::Distort {
            images,
            out,
            seed,
            config,
        } => {
            let mut config = config.resolve()?;
            if let Some(seed) = seed {
                config.distort_seed = *seed;
            }
            cmd_distort(images, out, &config, log).map(drop)
        }
        Command::Evaluate { manifest, out } => cmd_evaluate(manifest, out.as_deref(), log).map(drop),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = configure_threads().and_then(|()| run(&cli, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
