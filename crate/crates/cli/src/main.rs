//! `binaural-doa`: HRTF preparation, room simulation, localisation, sweeps
//! and the search benchmark.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 no estimate,
//! 3 I/O error (including missing or corrupted artifacts).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use binaural_doa::localization::{Method, SearchMode};
use binaural_doa::timefreq::FrontendKind;

#[derive(Parser, Debug)]
#[command(
    name = "binaural-doa",
    version,
    about = "Binaural direction-of-arrival estimation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Pipeline configuration (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_parser = parse_frontend)]
    pub frontend: Option<FrontendKind>,
    #[arg(long, global = true, value_parser = parse_search)]
    pub search: Option<SearchMode>,
    #[arg(long, global = true, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn parse_frontend(s: &str) -> Result<FrontendKind, String> {
    s.parse().map_err(|e: binaural_doa::Error| e.to_string())
}

fn parse_search(s: &str) -> Result<SearchMode, String> {
    s.parse().map_err(|e: binaural_doa::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: binaural_doa::Error| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build or import an HRTF set and cache its localisation artifacts.
    HrtfPrep {
        /// Directory of AZxxx_ELyyy.wav files or an HRTF container.
        #[arg(long, conflicts_with = "sphere")]
        input: Option<PathBuf>,
        /// Use the rigid-sphere generator from the configuration.
        #[arg(long)]
        sphere: bool,
    },
    /// Render scenarios to binaural WAV files with JSON ground truth.
    Simulate {
        /// Number of scenarios (default: from the configuration).
        #[arg(long)]
        scenarios: Option<usize>,
    },
    /// Estimate the lateral angle of a stereo recording.
    Localize {
        /// Binaural WAV (left, right).
        audio: PathBuf,
    },
    /// Run the method x front-end x search sweep.
    Sweep {
        /// Print the run matrix without executing it.
        #[arg(long)]
        dry_run: bool,
        /// Also write per-run stage timings.
        #[arg(long)]
        timings: bool,
    },
    /// Time the 1-D and 2-D searches on a speech fixture.
    Bench,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
