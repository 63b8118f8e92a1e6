use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wkit::{run, ExperimentConfig, ExperimentKind};

/// Whitney extension experiments.
#[derive(Debug, Parser)]
#[command(name = "wkit", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentKind,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else `wkit-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = ExperimentConfig::load(&cli.config).and_then(|cfg| run(cli.experiment, &cfg, cli.out.as_deref(), cli.seed));
    match outcome {
        Ok(o) => {
            println!("{}: {:?} ({})", cli.experiment.name(), o.report.verdict, o.report_path.display());
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("wkit: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
