use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coupled_cli::{reproduce_table, run, CliError, ExperimentConfig, RunOptions, Scope, TableName};

#[derive(Parser)]
#[command(name = "coupled", version, about = "Coupled fixed-point experiments for duopoly markets")]
struct Cli {
    /// Output directory (overrides the config's `output`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random pair sampling (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every command listed in the config.
    Run { config: PathBuf },
    /// Solve from every start in the config.
    Solve { config: PathBuf },
    /// Run the config's certificate blocks.
    Certify { config: PathBuf },
    /// Print (or with --out, write) table1, table2 or table3.
    Table { name: String },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let opts = RunOptions { out: cli.out, seed: cli.seed };
    let (config, scope) = match cli.command {
        Cmd::Table { name } => {
            let name: TableName = name.parse()?;
            let csv = reproduce_table(name)?;
            match &opts.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
                    let path = dir.join(format!("{}.csv", name.as_str()));
                    std::fs::write(&path, csv).map_err(|source| CliError::Io { path: path.clone(), source })?;
                    println!("{}", path.display());
                }
                None => print!("{csv}"),
            }
            return Ok(());
        }
        Cmd::Run { config } => (config, Scope::All),
        Cmd::Solve { config } => (config, Scope::Solve),
        Cmd::Certify { config } => (config, Scope::Certify),
    };
    let cfg = ExperimentConfig::load(&config)?;
    let outcome = run(&cfg, &opts, scope)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    outcome.into_result().map(|_| ())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
