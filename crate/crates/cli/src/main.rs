//! `compsynth` command-line tool.
//!
//! Exit codes: 0 realizable or verified, 1 unrealizable or refuted, 2 input
//! error, 3 an `--oracle` cross-check disagreed with the main result.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "compsynth",
    version,
    about = "Synthesis of composers over libraries of probabilistic components"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a library file and print its diagnostics.
    Validate { file: PathBuf },
    /// Print the labels of every component and the size bound.
    Labels {
        file: PathBuf,
        /// Compare the fast membership test with support enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Report odd sinks; with --out, write the library without them.
    Preprocess {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a composer for the library's index function.
    SynthEmbedded {
        file: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Synthesize a composer whose output satisfies a parity monitor.
    SynthDpw {
        file: PathBuf,
        #[arg(long)]
        monitor: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Check a composer against the index function or a monitor.
    Verify {
        composer: PathBuf,
        file: PathBuf,
        #[arg(long)]
        monitor: Option<PathBuf>,
    },
    /// Print the ranks of a composer under a choice function.
    Rank {
        composer: PathBuf,
        choices: PathBuf,
        file: PathBuf,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// Write the composer here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write Graphviz files for the composer and the components.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Cross-check the result by verification and bounded search.
    #[arg(long)]
    oracle: bool,
    /// Instance bound of the search run by --oracle.
    #[arg(long, default_value_t = 2)]
    oracle_bound: usize,
    /// Bound on explored game vertices.
    #[arg(long, default_value_t = compsynth::emptiness::DEFAULT_LIMIT)]
    limit: usize,
    /// Decide by the emptiness check alone, without first trying a fixed
    /// label per component.
    #[arg(long)]
    no_refute: bool,
}

/// Failures other than a negative verdict.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Disagreement(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Labels { file, oracle } => commands::labels(&file, oracle),
        Command::Preprocess { file, out } => commands::preprocess(&file, out.as_deref()),
        Command::SynthEmbedded { file, synth } => commands::synth(&file, None, &synth),
        Command::SynthDpw { file, monitor, synth } => commands::synth(&file, Some(&monitor), &synth),
        Command::Verify {
            composer,
            file,
            monitor,
        } => commands::verify(&composer, &file, monitor.as_deref()),
        Command::Rank {
            composer,
            choices,
            file,
        } => commands::rank(&composer, &choices, &file),
    };
    match result {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Disagreement(msg)) => {
            eprintln!("oracle disagreement: {msg}");
            ExitCode::from(3)
        }
    }
}
