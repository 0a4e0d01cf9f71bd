// Copyright 2026 The relucert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `relucert` command-line tool.

mod certify;
mod construct;
mod eval;
mod experiment;
mod failure;
mod output;
mod rates;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use failure::{CliResult, Failure, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "relucert",
    version,
    about = "Certified sparse ReLU network constructions and rate experiments"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "RELUCERT_OUT_DIR", default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a network and its certificate.
    #[command(subcommand)]
    Construct(construct::ConstructCmd),
    /// Re-check a certificate against its network.
    Certify(certify::CertifyArgs),
    /// Evaluate a stored network.
    Eval(eval::EvalArgs),
    /// Network regression rate experiment.
    Simulate(experiment::ExperimentArgs),
    /// Wavelet estimator rate experiment.
    Wavelet(experiment::ExperimentArgs),
    /// Rate and architecture calculators.
    Rates(rates::RatesArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match &cli.command {
        Command::Construct(c) => construct::run(c, &cli.out),
        Command::Certify(a) => certify::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Simulate(a) => experiment::run_simulate(a, &cli.out),
        Command::Wavelet(a) => experiment::run_wavelet(a, &cli.out),
        Command::Rates(a) => rates::run(a, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code() as u8)
        }
    }
}
