use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qgf_cli::checks::run_checks;
use qgf_cli::oracle_report::oracle_report;
use qgf_cli::{
    run_and_emit, run_preset, CliError, EmittedFiles, ExperimentConfig, ExperimentOutcome, Preset,
    Result, OUTPUT_DIR_ENV,
};

#[derive(Parser)]
#[command(
    name = "qgf",
    version,
    about = "Filtered-evolution VQE experiments on Ising chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one batch from a TOML config or an emitted manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Run a published experiment family.
    Preset {
        preset: Preset,
        #[arg(long, env = OUTPUT_DIR_ENV, default_value = "results")]
        out: PathBuf,
        /// Seeds per batch.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
    },
    /// Print the exact spectrum of the config's Hamiltonian as JSON.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the invariant suite.
    Check,
}

fn summarize(outcome: &ExperimentOutcome, files: &EmittedFiles) {
    for r in &outcome.outliers.rejected {
        eprintln!(
            "{}: rejected seed {}: {}",
            outcome.config.name, r.seed, r.reason
        );
    }
    let last = outcome.final_point();
    println!(
        "{}: retained {}/{} seeds, final energy {:.6} (ground {:.6}), final fidelity {:.6} -> {}",
        outcome.config.name,
        last.retained_n,
        outcome.records.len(),
        last.energy_mean,
        outcome.ground_energy,
        last.fidelity_mean,
        files.dir.display()
    );
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let (outcome, files) = run_and_emit(&cfg)?;
            summarize(&outcome, &files);
        }
        Command::Preset {
            preset,
            out,
            seeds,
            base_seed,
        } => {
            for (outcome, files) in run_preset(preset, &out, seeds, base_seed)? {
                summarize(&outcome, &files);
            }
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = oracle_report(&cfg.model)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Aggregation(e.to_string()))?;
            println!("{json}");
        }
        Command::Check => {
            let outcomes = run_checks();
            for c in &outcomes {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", c.name, c.detail);
            }
            let failed = outcomes.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Check(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            let report = serde_json::json!({ "error": "usage", "message": e.kind().to_string() });
            eprintln!("{report}");
            return ExitCode::from(64);
        }
        Err(e) => e.exit(),
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({
                "error": e.category(),
                "message": e.to_string(),
            });
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
