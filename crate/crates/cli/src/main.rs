//! Command-line entry points: train a sampler, draw ranked samples, evaluate
//! a sample directory, ingest bond statistics, and convert structure files.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "crysflow", version, about = "Reward-proportional crystal structure sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the hierarchical sampler from a run configuration
    Train {
        #[arg(long)]
        config: PathBuf,
        /// output directory (default: runs/<timestamp>)
        #[arg(long)]
        out: Option<PathBuf>,
        /// override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample structures from a checkpoint, ranked by composite reward
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, short)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a directory of sampled CIFs
    Evaluate {
        /// directory with .cif files (and index.json from `sample`)
        #[arg(long)]
        dir: PathBuf,
        /// optional directory of relaxed counterparts (same file names)
        #[arg(long)]
        relaxed: Option<PathBuf>,
        /// where to write the JSON report (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// bond-statistics CSV for the surrogate energy (embedded default
        /// when omitted)
        #[arg(long)]
        bond_stats: Option<PathBuf>,
    },
    /// Validate a bond-statistics CSV and write the normalized table
    BondStats {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a structure between .cif and .json
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the default run configuration
    DefaultConfig,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train { config, out, seed } => {
            commands::cmd_train(&config, out, seed).map(|_| ())
        }
        Command::Sample { config, checkpoint, n, out, seed } => {
            commands::cmd_sample(&config, &checkpoint, n, &out, seed)
        }
        Command::Evaluate { dir, relaxed, out, bond_stats } => (|| {
            let stats = match bond_stats {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    crysflow_reward::BondStatsTable::parse_csv(&text)
                        .map_err(|e| anyhow::anyhow!("{e}"))?
                }
                None => crysflow_reward::BondStatsTable::default_table(),
            };
            let report = commands::cmd_evaluate(&dir, relaxed.as_deref(), &stats)?;
            let rendered = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => std::fs::write(path, rendered)?,
                None => println!("{rendered}"),
            }
            Ok(())
        })(),
        Command::BondStats { csv, out } => commands::cmd_bond_stats(&csv, &out).map(|n| {
            eprintln!("installed {n} bond-pair entries to {}", out.display());
        }),
        Command::Export { input, output } => commands::cmd_export(&input, &output),
        Command::DefaultConfig => {
            print!("{}", RunConfig::default().to_toml());
            Ok(())
        }
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
