//! Pipeline CLI: parse transcripts, ingest annotations, link speakers to the
//! voter file, validate against human labels, and run the statistics and
//! difference-in-differences stages.

mod commands;
mod config;
mod store;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Run;

#[derive(Parser)]
#[command(name = "gavel", version, about = "Council-meeting transcript analytics pipeline")]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, default_value = "gavel.toml")]
    config: PathBuf,

    /// Seed for stochastic steps; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for file-level parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Output root; overrides the config value (not part of the run hash).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Allow overwriting reports whose content changed.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and filter the transcript directory into the meeting store.
    Parse,
    /// Ingest machine-annotation JSON into normalized tables.
    AnnotateIngest,
    /// Link extracted speaker names to the voter file.
    Link,
    /// Compare machine annotations against human labels.
    Validate,
    /// Descriptive statistics and regression tables.
    Stats,
    /// Staggered difference-in-differences estimates.
    Did,
    /// Collect headline numbers from every completed stage.
    Report,
    /// Run every stage in pipeline order.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match Run::load(&cli.config, cli.out.as_deref(), cli.seed, cli.jobs) {
        Ok(run) => run,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::FAILURE;
        }
    };

    let result = match cli.command {
        Command::Parse => commands::parse::run(&run, cli.force),
        Command::AnnotateIngest => commands::annotate::run(&run, cli.force),
        Command::Link => commands::link::run(&run, cli.force),
        Command::Validate => commands::validate::run(&run, cli.force),
        Command::Stats => commands::stats::run(&run, cli.force),
        Command::Did => commands::did::run(&run, cli.force),
        Command::Report => commands::report::run(&run, cli.force),
        Command::All => commands::parse::run(&run, cli.force)
            .and_then(|_| commands::annotate::run(&run, cli.force))
            .and_then(|_| commands::link::run(&run, cli.force))
            .and_then(|_| commands::validate::run(&run, cli.force))
            .and_then(|_| commands::stats::run(&run, cli.force))
            .and_then(|_| commands::did::run(&run, cli.force))
            .and_then(|_| commands::report::run(&run, cli.force)),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
