use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dumbbell_lab::{run, Command, ExperimentConfig, LabError};

/// Dumbbell domain eigenvalue experiments.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum, required_unless_present = "print_defaults")]
    command: Option<Command>,
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, value_name = "N", default_value_t = 0)]
    jobs: usize,
    /// Overrides `solver.seed`.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Print the full default config and exit.
    #[arg(long)]
    print_defaults: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_defaults {
        println!("{}", ExperimentConfig::default().to_pretty_json());
        return ExitCode::SUCCESS;
    }
    let command = cli.command.expect("clap enforces a command");
    let result = load(&cli).and_then(|cfg| {
        let out = cli.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build()
            .map_err(|e| LabError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| run(command, &cfg, &out))
    });
    match result {
        Ok(m) => {
            eprintln!("{}: wrote {} files", command.name(), m.files.len() + 1);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
