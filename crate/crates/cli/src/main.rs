//! Command line front end: run configs and presets, or check their regimes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pdflow::experiment::{self, ExperimentConfig};

/// Overrides the output directory of configs (but not `--out`).
const OUT_DIR_ENV: &str = "PDFLOW_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "out";

#[derive(Parser)]
#[command(name = "pdflow", version, about = "Integrate primal-dual flows and measure their decay rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep member of a TOML config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append sampled x, v and lambda columns to every CSV.
        #[arg(long)]
        dump_state: bool,
    },
    /// Run a built-in preset (example51, example52, example52_hessian).
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        dump_state: bool,
        /// Print the preset as TOML instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// Print the regime and assumption report without integrating.
    Check { config: PathBuf },
}

fn out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| match (&cfg.out_dir, &cfg.base_dir) {
            (Some(d), Some(base)) if d.is_relative() => Some(base.join(d)),
            (Some(d), _) => Some(d.clone()),
            _ => None,
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<bool> {
    let report = experiment::run(cfg, dir)?;
    for s in &report.summaries {
        println!("{}", s.to_line());
    }
    for f in &report.csv_files {
        eprintln!("wrote {}", f.display());
    }
    eprintln!("wrote {}", report.summary_file.display());
    Ok(report.all_ok())
}

fn main_inner() -> Result<bool> {
    match Cli::parse().command {
        Command::Run { config, out, dump_state } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            cfg.dump_state |= dump_state;
            let dir = out_dir(out, &cfg);
            execute(&cfg, &dir)
        }
        Command::Preset { name, out, horizon, dump_state, print } => {
            let mut cfg = experiment::preset(&name)?;
            if let Some(t) = horizon {
                cfg.horizon = t;
            }
            cfg.dump_state |= dump_state;
            cfg.validate()?;
            if print {
                print!("{}", cfg.to_toml());
                return Ok(true);
            }
            let dir = out_dir(out, &cfg);
            execute(&cfg, &dir)
        }
        Command::Check { config } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            print!("{}", experiment::check(&cfg)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one run did not finish");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
