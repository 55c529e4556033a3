use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use integrable_lab::{exit_code, list_experiments, logger, run_config, Overrides};

#[derive(Parser)]
#[command(version, about = "Run integrable-systems experiments from TOML configs", long_about = None)]
struct Cli {
    /// Directory for CSV artifacts and report.json (overrides the config)
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// RNG seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Treat warnings as check failures
    #[arg(long, global = true)]
    strict: bool,

    /// Also log informational messages to stderr
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run { config: PathBuf },
    /// List experiments with their topics, default checks and parameter defaults
    ListExperiments,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    logger::install(cli.verbose);
    match cli.command {
        Command::ListExperiments => {
            print!("{}", list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run { config } => {
            let overrides = Overrides { output_dir: cli.output_dir, seed: cli.seed, strict: cli.strict };
            let outcome = run_config(&config, &overrides);
            match &outcome {
                Ok(report) => {
                    print!("{}", report.summary());
                    println!("report: {}", PathBuf::from(&report.config.output_dir).join("report.json").display());
                }
                Err(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&outcome) as u8)
        }
    }
}
