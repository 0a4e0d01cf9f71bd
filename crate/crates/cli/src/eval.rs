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

//! `eval`: evaluate a stored network.

use std::path::PathBuf;

use clap::Args;
use relucert::network::SparseNetwork;

use crate::failure::{CliResult, Failure};
use crate::output::read_text;

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub net: PathBuf,
    /// One input point, comma separated; may be repeated.
    #[arg(long = "x", value_name = "X1,X2,...")]
    pub points: Vec<String>,
    /// File with one comma-separated input point per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

fn parse_point(s: &str, line: usize) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Failure::Usage(format!("point {line}: cannot parse {v:?}: {e}")))
        })
        .collect()
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let net = SparseNetwork::from_json(&read_text(&args.net)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.net.display())))?;
    let mut points = Vec::new();
    for (i, p) in args.points.iter().enumerate() {
        points.push(parse_point(p, i + 1)?);
    }
    if let Some(path) = &args.input {
        for (i, line) in read_text(path)?.lines().enumerate() {
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                points.push(parse_point(line, i + 1)?);
            }
        }
    }
    if points.is_empty() {
        return Err(Failure::Usage("no input points; use --x or --input".into()));
    }
    for p in &points {
        let out = net.evaluate_flagged(p)?;
        let values: Vec<String> = out.values.iter().map(|v| v.to_string()).collect();
        let flag = if out.exceeds_bound.iter().any(|f| *f) {
            ",exceeds_F"
        } else {
            ""
        };
        println!("{}{flag}", values.join(","));
    }
    Ok(())
}
