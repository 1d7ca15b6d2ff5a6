// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! `cavityduo <scenario> --config <file> [--out <dir>] [--jobs N] [--seed S]
//! [--override key=value ...]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cavityduo::harness::{self, exit_code, HarnessError, RunOptions, Scenario};

/// Two coupled dissipative modes: analytic solution and master-equation oracle.
#[derive(Debug, Parser)]
#[command(name = "cavityduo", version)]
struct Cli {
    /// evolve-coherent, evolve-cat, sweep, verify, coefficients or algebra-check.
    /// Takes precedence over the config's `scenario` field.
    scenario: Scenario,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized checks; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Set any config field by dotted path, e.g. `params.g=0.1`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also write the final oracle density matrix as `final_state.csv`.
    #[arg(long)]
    snapshot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = vec![format!("scenario={}", cli.scenario)];
    overrides.extend(cli.overrides.iter().cloned());
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    let result = harness::parse_config_with_overrides(&cli.config, &overrides)
        .map_err(|e| match e {
            harness::ConfigError::Io { path, message } => HarnessError::Io { path, message },
            other => HarnessError::Config(other),
        })
        .and_then(|cfg| {
            let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let opts = RunOptions { jobs: cli.jobs, snapshot: cli.snapshot };
            harness::run(&cfg, &out, &opts)
        });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!((exit_code::IO..=exit_code::NUMERICAL).contains(&code));
            ExitCode::from(code as u8)
        }
    }
}
