//! `mvsync` command-line front end.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input (including bad
//! arguments), 2 input that parsed but failed validation. Errors are written
//! to stderr as one JSON object per line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{HalfWindowSetting, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "mvsync", version, about = "Music/video structure synchronization metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with run settings; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Shot-boundary likelihood threshold.
    #[arg(long, global = true)]
    tau: Option<f64>,

    /// Gaussian window standard deviation, in frames.
    #[arg(long, global = true)]
    sigma_frames: Option<f64>,

    /// Genres with fewer clips are left out of tables.
    #[arg(long, global = true)]
    min_genre_count: Option<usize>,

    /// Offset search half-window: `half-bar` or seconds.
    #[arg(long, global = true, value_name = "half-bar|SECONDS")]
    half_window: Option<HalfWindowSetting>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output path: report file (analyze), directory (batch), SVG (figure),
    /// bundle file (synth). Defaults to stdout where that makes sense.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze one clip bundle and print its report as JSON.
    Analyze { bundle: PathBuf },
    /// Analyze every clip of a manifest and write reports and genre tables.
    Batch { manifest: PathBuf },
    /// Draw cuts, downbeats and segment boundaries over a time window as SVG.
    Figure {
        bundle: PathBuf,
        /// Window start, seconds or mm:ss.
        #[arg(long, value_parser = commands::parse_timestamp)]
        from: f64,
        /// Window end, seconds or mm:ss.
        #[arg(long, value_parser = commands::parse_timestamp)]
        to: f64,
    },
    /// Generate a synthetic clip bundle with a planted editing policy.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 120.0)]
    pub bpm: f64,
    #[arg(long, default_value_t = 4)]
    pub meter: u8,
    /// Clip duration in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    /// on-bar, on-beat, anticipate:SECONDS or random:HZ.
    #[arg(long, default_value = "on-bar", value_parser = commands::parse_policy)]
    pub policy: mvsync::synth::CutPolicy,
    /// Standard deviation of cut timing noise, seconds.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// impulse or triangular:HALF_WIDTH_FRAMES.
    #[arg(long, default_value = "impulse", value_parser = commands::parse_peak)]
    pub peak: mvsync::synth::PeakShape,
    #[arg(long, default_value_t = 1.0)]
    pub impulse_value: f64,
    #[arg(long, default_value = "synth")]
    pub clip_id: String,
    #[arg(long)]
    pub music_genre: Option<String>,
    #[arg(long)]
    pub video_genre: Option<mvsync::VideoGenre>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let flags = Overrides {
        tau: cli.tau,
        sigma_frames: cli.sigma_frames,
        min_genre_count: cli.min_genre_count,
        half_window: cli.half_window,
        out: cli.out,
        jobs: cli.jobs,
    };
    let config = RunConfig::resolve(cli.config.as_deref(), flags)
        .map_err(|e| CliError::input("bad-config", format!("{e:#}")))?;
    match cli.command {
        Command::Analyze { bundle } => commands::analyze(&bundle, &config),
        Command::Batch { manifest } => commands::batch(&manifest, &config),
        Command::Figure { bundle, from, to } => commands::figure(&bundle, from, to, &config),
        Command::Synth(args) => commands::synth(&args, &config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code)
        }
    }
}
