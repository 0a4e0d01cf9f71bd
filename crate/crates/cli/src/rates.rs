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

//! `rates`: effective smoothness, `phi_n` over a grid and architecture checks.

use std::path::{Path, PathBuf};

use clap::Args;
use relucert::rates::{check_theorem1_conditions, Architecture, Bands, ConditionReport, RateProfile};
use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure};
use crate::output::{out_path, parse_config, read_text, stamped_json, write_csv, write_file, Stamp};

#[derive(Debug, Args)]
pub struct RatesArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub n: u64,
    pub arch: Architecture,
    #[serde(default)]
    pub bands: Bands,
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub beta: Vec<f64>,
    pub t: Vec<usize>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub n_grid: Vec<u64>,
    pub check: Option<CheckSection>,
}

#[derive(Debug, Serialize)]
struct PhiRow {
    n: u64,
    phi_n: f64,
    dominating_level: usize,
}

#[derive(Serialize)]
struct RatesReport<'a> {
    config: &'a RatesConfig,
    beta_star: Vec<f64>,
    /// `phi_n = n^{-exponent}` for the dominating level.
    exponent: f64,
    phi: Vec<PhiRow>,
    check: Option<ConditionReport>,
}

pub fn run(args: &RatesArgs, out_dir: &Path) -> CliResult<()> {
    let text = read_text(&args.config)?;
    let cfg: RatesConfig = parse_config(&args.config, &text)?;
    if cfg.n_grid.is_empty() || cfg.n_grid.contains(&0) {
        return Err(Failure::Usage("field `n_grid`: needs positive sample sizes".into()));
    }
    if cfg.beta.len() != cfg.t.len() {
        return Err(Failure::Usage("field `t`: must have as many entries as `beta`".into()));
    }
    let profile =
        RateProfile::new(cfg.beta.clone(), cfg.t.clone()).map_err(|e| Failure::Usage(format!("field `beta`: {e}")))?;
    let phi = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let (phi_n, dominating_level) = profile.phi(n)?;
            Ok(PhiRow {
                n,
                phi_n,
                dominating_level,
            })
        })
        .collect::<Result<Vec<_>, relucert::Error>>()?;
    let check = cfg
        .check
        .as_ref()
        .map(|c| check_theorem1_conditions(&c.arch, &profile, cfg.radius, c.n, c.bands))
        .transpose()
        .map_err(|e| Failure::Usage(format!("field `check`: {e}")))?;
    let stamp = Stamp::new(text.as_bytes(), None);
    let name = args.name.as_deref().unwrap_or("rates");
    let csv_path = out_path(out_dir, &format!("{name}.csv"))?;
    write_csv(&csv_path, &stamp, &phi)?;
    let report = RatesReport {
        config: &cfg,
        beta_star: profile.beta_star.clone(),
        exponent: profile.exponent(),
        phi,
        check,
    };
    let json_path = out_path(out_dir, &format!("{name}.json"))?;
    write_file(&json_path, &stamped_json(&report, "run", &stamp))?;
    println!("beta* = {:?}, phi_n = n^-{}", report.beta_star, report.exponent);
    if let Some(c) = &report.check {
        for cond in &c.conditions {
            println!("{:<48} {}", cond.name, if cond.holds { "ok" } else { "FAIL" });
        }
        println!(
            "{:<48} {} (informational)",
            c.depth_upper_side.name,
            if c.depth_upper_side.holds { "ok" } else { "FAIL" }
        );
    }
    println!("report: {}", json_path.display());
    Ok(())
}
