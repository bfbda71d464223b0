use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scinovelty::error::Error;
use scinovelty::pipeline::{run_pipeline, PipelineConfig, RunOptions, Stage};

/// Novelty metrics for scholarly corpora.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true, default_value = "scinovelty.toml")]
    config: PathBuf,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Rerun stages and overwrite artifacts written under another config.
    #[arg(long, global = true)]
    force: bool,
    /// Fail on the first malformed input line.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load, clean and sort the corpus.
    Ingest,
    /// Build the baseline dictionary.
    Baseline,
    /// Expand filter lists and extract terms.
    Preprocess,
    /// Count occurrences and credit first users.
    Novelty,
    /// Semantic distance from embeddings.
    Semdist,
    /// Citation-based baselines.
    Cite,
    /// Merge metrics and run the analyses.
    Stats,
    /// Tidy series for plots.
    Plotdata,
    /// Every stage in order.
    All,
}

impl Command {
    fn stages(self) -> Vec<Stage> {
        match self {
            Command::Ingest => vec![Stage::Ingest],
            Command::Baseline => vec![Stage::Baseline],
            Command::Preprocess => vec![Stage::Preprocess],
            Command::Novelty => vec![Stage::Novelty],
            Command::Semdist => vec![Stage::Semdist],
            Command::Cite => vec![Stage::Cite],
            Command::Stats => vec![Stage::Stats],
            Command::Plotdata => vec![Stage::Plotdata],
            Command::All => Stage::ALL.to_vec(),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut cfg = PipelineConfig::load(&cli.config)?;
    cfg.strict |= cli.strict;
    let opts = RunOptions {
        force: cli.force,
        threads: cli.threads,
    };
    let report = run_pipeline(&cfg, &cli.command.stages(), opts)?;
    for s in &report.executed {
        eprintln!("ran     {s}");
    }
    for s in &report.cached {
        eprintln!("cached  {s}");
    }
    Ok(())
}

fn main() -> ExitCode {
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
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
