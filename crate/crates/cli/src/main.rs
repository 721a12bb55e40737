use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use localcd::scenario::{preset, preset_description, preset_names, run_checks, run_scenario_with, RunOptions, ScenarioConfig};
use localcd::Error;

/// Counter-diabatic driving scenarios: run presets or JSON configs and emit
/// CSV tables with matching plot scripts.
#[derive(Parser)]
#[command(name = "localcd", version)]
struct Cli {
    /// Worker threads for independent grid points (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config file or a preset name.
    Run {
        /// Path to a config JSON or a name from `list-scenarios`.
        scenario: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also run brute-force cross-checks (step doubling, dense ground states).
        #[arg(long)]
        oracle: bool,
        /// Plot log10 F² on a linear axis.
        #[arg(long)]
        log_fidelity: bool,
    },
    /// List the shipped presets.
    ListScenarios,
    /// Run the fast oracle and property checks.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(scenario: &str) -> Result<(ScenarioConfig, String), Error> {
    let path = Path::new(scenario);
    if path.extension().is_some_and(|e| e == "json") || path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
        Ok((ScenarioConfig::from_json(&text)?, stem))
    } else {
        Ok((preset(scenario)?, scenario.replace('@', "_")))
    }
}

fn fail(e: &Error) -> ExitCode {
    let msg = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::Config(format!("thread pool: {e}")));
        }
    }
    match cli.command {
        Command::ListScenarios => {
            for name in preset_names() {
                println!("{name:<32} {}", preset_description(name));
            }
            ExitCode::SUCCESS
        }
        Command::Check { seed } => {
            let outcomes = run_checks(seed);
            for o in &outcomes {
                println!("{} {:<28} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run {
            scenario,
            out,
            oracle,
            log_fidelity,
        } => {
            let result = load(&scenario).and_then(|(mut cfg, stem)| {
                cfg.log_fidelity |= log_fidelity;
                let res = run_scenario_with(&cfg, RunOptions { oracle })?;
                let files = res.write(&out, &stem, cfg.log_fidelity)?;
                Ok((res.warnings, files))
            });
            match result {
                Ok((warnings, files)) => {
                    for w in warnings {
                        eprintln!("warning: {w}");
                    }
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
