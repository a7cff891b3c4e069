use std::path::PathBuf;
use std::process::ExitCode;

use biharmonic_nf::{execute, validate, CliError, Scenario, ScenarioConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biharmonic-nf", version, about = "Scenario runner for the biharmonic NLS normal-form toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV and JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config and BIHARMONIC_NF_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the scenario names.
    List,
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for s in Scenario::ALL {
                println!("{:<18} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let diag = validate(&cfg);
            if let Some(cost) = diag.cost_estimate {
                println!("cost estimate: {cost:e} terms (budget {:e})", diag.budget);
            }
            match diag.into_result() {
                Ok(sc) => {
                    println!("ok: {sc}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Run { config, out } => {
            let cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match execute(&cfg, out.as_deref()) {
                Ok(w) => {
                    println!("wrote {}", w.csv.display());
                    for a in &w.attachments {
                        println!("wrote {}", a.display());
                    }
                    println!("wrote {}", w.json.display());
                    if w.partial {
                        eprintln!("warning: time limit reached, results are partial");
                        return ExitCode::from(2);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
