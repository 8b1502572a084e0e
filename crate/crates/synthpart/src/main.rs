//! Thin command-line wrapper over the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use synthpart::cli;
use synthpart::experiments::RadarValues;
use synthpart::mcda::Convention;

#[derive(Parser)]
#[command(
    name = "synthpart",
    about = "Synthetic participatory planning: avatar Delphi simulation, scoring, experiments, calibration",
    version
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one full scenario and write the run record
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        seed: i64,
        #[arg(long, default_value = "run.json")]
        out: PathBuf,
    },
    /// Run one scenario replayed from a recorded cassette
    Replay {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        cassette: PathBuf,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        seed: i64,
        #[arg(long, default_value = "run.json")]
        out: PathBuf,
    },
    /// Run N scenarios with consecutive seeds into a directory
    Batch {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        seed_base: i64,
        #[arg(long, default_value_t = 4)]
        parallel: usize,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite an existing batch directory
        #[arg(long, default_value_t = false)]
        force: bool,
    },
    /// Aggregate a batch directory into summary.json and CSV exports
    Analyze {
        #[arg(long = "in")]
        in_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run id supplying the radar rows (default: first non-dropped run)
        #[arg(long)]
        radar_run: Option<String>,
        #[arg(long, default_value = "raw")]
        radar_values: RadarValues,
        /// Classify texts with the configured backend instead of keywords
        #[arg(long, default_value_t = false)]
        llm_classify: bool,
    },
    /// Score a standalone evaluation matrix file
    Score {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "split")]
        convention: Convention,
        /// Audit tolerance for reported totals
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference sensitivity of a feature to one parameter
    Sensitivity {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        step: f64,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        #[arg(long, default_value = "winning_total")]
        feature: String,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        seed_base: i64,
        #[arg(long, default_value_t = 4)]
        parallel: usize,
        #[arg(long, default_value = "sensitivity.json")]
        out: PathBuf,
    },
    /// Search candidate avatar profiles against a recorded dataset
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, default_value = "exhaustive")]
        strategy: String,
        /// Completions per question; the centroid-nearest sample is kept
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match args.command {
        Command::Run { config, seed, out } => cli::cmd_run(config.as_deref(), seed, &out),
        Command::Replay {
            config,
            cassette,
            seed,
            out,
        } => cli::cmd_replay(config.as_deref(), &cassette, seed, &out),
        Command::Batch {
            config,
            runs,
            seed_base,
            parallel,
            out,
            force,
        } => cli::cmd_batch(config.as_deref(), runs, seed_base, parallel, &out, force),
        Command::Analyze {
            in_dir,
            out,
            config,
            radar_run,
            radar_values,
            llm_classify,
        } => cli::cmd_analyze(
            &in_dir,
            &out,
            config.as_deref(),
            radar_run.as_deref(),
            radar_values,
            llm_classify,
        ),
        Command::Score {
            matrix,
            convention,
            tolerance,
            out,
        } => cli::cmd_score(&matrix, convention, tolerance, out.as_deref()),
        Command::Sensitivity {
            config,
            param,
            step,
            replicates,
            feature,
            seed_base,
            parallel,
            out,
        } => cli::cmd_sensitivity(
            config.as_deref(),
            &param,
            step,
            replicates,
            &feature,
            seed_base,
            parallel,
            &out,
        ),
        Command::Calibrate {
            config,
            dataset,
            candidates,
            strategy,
            samples,
            out,
        } => cli::cmd_calibrate(
            config.as_deref(),
            &dataset,
            &candidates,
            &strategy,
            samples,
            out.as_deref(),
        ),
    };
    ExitCode::from(code as u8)
}
