use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dseg_core::harness::{
    run_acceptance_with, run_experiment, run_figure, ExperimentConfig, Figure, FigureConfig,
};

#[derive(Parser)]
#[command(name = "dseg", version, about = "Double-stepsize extragradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its CSV tables and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Base seed; overrides the config's `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the acceptance criteria.
    Accept {
        /// all, recursion, rates, descent, og, fields, determinism, region,
        /// a criterion number, or a comma separated list.
        #[arg(long)]
        suite: Option<String>,
        /// Directory for acceptance.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the experiments of a figure config and write its tables.
    Figure {
        #[arg(long, value_parser = parse_figure)]
        which: Figure,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: dseg_core::Error| e.to_string())
}

fn run(command: Command) -> dseg_core::Result<bool> {
    match command {
        Command::Run {
            config,
            out,
            workers,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.base_seed = seed;
            }
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let result = run_experiment(&cfg, workers)?;
            for path in result.write_outputs(&dir)? {
                println!("{}", path.display());
            }
            for note in &result.notes {
                eprintln!("note: {note}");
            }
            if let Some(fit) = result.fit {
                eprintln!("slope {:.4} (r² {:.4}, {} points)", fit.slope, fit.r_squared, fit.points);
            }
            Ok(true)
        }
        Command::Accept { suite, out, workers } => {
            let report = run_acceptance_with(suite.as_deref(), out.as_deref(), workers, |c| println!("{}", c.line()))?;
            let passed = report.criteria.iter().filter(|c| c.passed).count();
            println!("{passed}/{} criteria passed", report.criteria.len());
            Ok(report.all_passed())
        }
        Command::Figure {
            which,
            config,
            out,
            workers,
        } => {
            let cfg = FigureConfig::load(&config)?;
            let dir = out
                .or_else(|| cfg.output())
                .unwrap_or_else(|| PathBuf::from("out").join(which.as_str()));
            for path in run_figure(&cfg, which, &dir, workers)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
