//! Command-line entry point: one subcommand per pipeline stage plus
//! `run-all`. Exits 0 on success, 1 with the failing stage named on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tfpanel::pipeline::{run_pipeline, Overrides, RunConfig, Stage};

#[derive(Parser)]
#[command(
    name = "tfpanel",
    about = "Productivity-frontier analysis: super-efficiency SBM DEA, TFP decomposition, and panel regressions",
    version
)]
struct Cli {
    /// Path to the run configuration file.
    #[arg(long, global = true, default_value = "run.conf")]
    config: PathBuf,

    /// Master seed override (all bootstrap draws derive from it).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Quantiles override, e.g. 0.1,0.25,0.5,0.75,0.9.
    #[arg(long, global = true, value_delimiter = ',')]
    taus: Option<Vec<f64>>,

    /// Stage selection for run-all, e.g. describe,tfp.
    #[arg(long, global = true, value_delimiter = ',')]
    stages: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics tables.
    Describe,
    /// Dynamic TFP records with the EC/TC/PEC/SEC decomposition.
    Tfp,
    /// Per-period static scores (score = PES x SES).
    StaticTfp,
    /// Fixed-effects regressions of the dependent on each index.
    Regress,
    /// MM-QR quantile regressions of the dependent on each index.
    Mmqr,
    /// Moderation regressions with the centered interaction.
    Moderate,
    /// Group-split heterogeneity regressions.
    Hetero,
    /// Per-period trend series of the indices and the dependent.
    Trend,
    /// Every configured stage in dependency order.
    RunAll,
}

fn stage_selection(cli: &Cli) -> Result<Option<Vec<Stage>>, tfpanel::Error> {
    let from_flag = match &cli.stages {
        Some(names) => {
            let mut stages = Vec::new();
            for name in names {
                stages.push(Stage::parse(name)?);
            }
            Some(stages)
        }
        None => None,
    };
    Ok(match &cli.command {
        Command::Describe => Some(vec![Stage::Describe]),
        Command::Tfp => Some(vec![Stage::Tfp]),
        Command::StaticTfp => Some(vec![Stage::StaticTfp]),
        Command::Regress => Some(vec![Stage::Regress]),
        Command::Mmqr => Some(vec![Stage::Mmqr]),
        Command::Moderate => Some(vec![Stage::Moderate]),
        Command::Hetero => Some(vec![Stage::Hetero]),
        Command::Trend => Some(vec![Stage::Trend]),
        Command::RunAll => from_flag,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let stages = match stage_selection(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        out_dir: cli.out.clone(),
        taus: cli.taus.clone(),
        stages,
    };

    let config = match RunConfig::from_file(&cli.config, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    match run_pipeline(&config) {
        Ok(report) => {
            print!("{}", report.summary);
            for artifact in &report.artifacts {
                println!("wrote {}", artifact.display());
            }
            match report.failure {
                None => ExitCode::SUCCESS,
                Some((stage, error)) => {
                    eprintln!("stage `{stage}` failed: {error}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
