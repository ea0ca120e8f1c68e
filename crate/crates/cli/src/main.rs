//! Batch experiment runner: spin-glass coupling sweeps and CNF bound
//! tables, plus a self-check battery.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure.

use radbound_cli::{satrun, sweep, verify};

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Bound tables for grid spin glasses over a coupling sweep.
    SpinglassSweep,
    /// Bound tables for DIMACS CNF model counts.
    SatBounds,
    /// Run the self-check battery against exact oracles.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxC, got `{s}`"))?;
    let rows = r.parse().map_err(|_| format!("bad row count `{r}`"))?;
    let cols = c.parse().map_err(|_| format!("bad column count `{c}`"))?;
    if rows == 0 || cols == 0 {
        return Err("grid must be non-empty".into());
    }
    Ok((rows, cols))
}

#[derive(Parser, Debug)]
#[command(name = "radbound", version, about)]
struct Cli {
    #[arg(long, value_enum)]
    mode: Mode,

    /// Root seed; every model, draw, and trial derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Oracle samples per bound computation.
    #[arg(long, default_value_t = 5)]
    k: usize,

    /// Independent trials per sweep point or CNF instance.
    #[arg(long, default_value_t = 20)]
    trials: u64,

    /// Grid shape for spinglass-sweep, e.g. 7x7.
    #[arg(long, value_parser = parse_grid, default_value = "7x7")]
    grid: (usize, usize),

    /// Coupling upper limits to sweep.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5"
    )]
    couplings: Vec<f64>,

    /// DIMACS CNF inputs for sat-bounds.
    #[arg(long, num_args = 1..)]
    cnf: Vec<PathBuf>,

    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// External MaxSAT command template; `{}` is replaced by the WCNF
    /// path. The solver must print `o`/`s` lines and a `v` model line.
    #[arg(long)]
    maxsat_cmd: Option<String>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.mode {
        Mode::SpinglassSweep => {
            if cli.k == 0 || cli.trials == 0 {
                bail!("k and trials must be positive");
            }
            if cli.couplings.iter().any(|&c| c.is_nan() || c < 0.0) {
                bail!("couplings must be non-negative");
            }
            let params = sweep::SweepParams {
                seed: cli.seed,
                k: cli.k,
                trials: cli.trials,
                rows: cli.grid.0,
                cols: cli.grid.1,
                couplings: cli.couplings.clone(),
            };
            let text = match cli.format {
                Format::Csv => sweep::run_csv(&params)?,
                Format::Json => sweep::run_json(&params)?,
            };
            emit(&cli.out, &text)?;
            Ok(0)
        }
        Mode::SatBounds => {
            if cli.cnf.is_empty() {
                bail!("sat-bounds requires at least one --cnf path");
            }
            if cli.k == 0 || cli.trials == 0 {
                bail!("k and trials must be positive");
            }
            let params = satrun::SatParams {
                seed: cli.seed,
                k: cli.k,
                trials: cli.trials,
                paths: cli.cnf.clone(),
                maxsat_cmd: cli.maxsat_cmd.clone(),
            };
            let text = match cli.format {
                Format::Csv => satrun::run_csv(&params)?,
                Format::Json => satrun::run_json(&params)?,
            };
            emit(&cli.out, &text)?;
            Ok(0)
        }
        Mode::Verify => {
            let failures = verify::run(cli.seed);
            if failures == 0 {
                println!("verify: all checks passed");
                Ok(0)
            } else {
                println!("verify: {failures} check(s) failed");
                Ok(2)
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
