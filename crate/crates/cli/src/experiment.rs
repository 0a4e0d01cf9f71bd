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

//! `simulate` and `wavelet`: rate experiments driven by a config file.

use std::path::{Path, PathBuf};

use clap::Args;
use relucert::constructions::CompositionSpec;
use relucert::rates::RateProfile;
use relucert::regression::{rate_experiment, Design, FitRecipe, RateExperiment, RateReport};
use relucert::targets::{CompositionDoc, TargetFn, TargetSpec};
use relucert::wavelet::{build_counterexample, wavelet_rate_experiment, WaveletSpec};
use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure};
use crate::output::{out_path, parse_config, read_text, stamped_json, write_csv, write_file, Stamp};

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config (TOML, or JSON with a .json extension).
    pub config: PathBuf,
    /// Base name of the output files.
    #[arg(long)]
    pub name: Option<String>,
}

/// Regression function of an experiment.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Target {
        spec: TargetSpec,
    },
    Composition {
        spec: CompositionDoc,
    },
    /// `|x_1 + ... + x_d - center|`.
    AbsSum {
        d: usize,
        center: Option<f64>,
    },
    /// Wavelet counterexample `h_{j,alpha}(x_1 + ... + x_d)` for the Haar basis.
    Counterexample {
        j: u32,
        alpha: f64,
        radius: f64,
        d: usize,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    pub beta: Vec<f64>,
    pub t: Vec<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletSection {
    /// Smoothness used for the truncation level.
    pub alpha: Option<f64>,
    /// Only "haar" is available.
    pub basis: Option<String>,
}

fn default_replications() -> usize {
    4
}
fn default_noise() -> f64 {
    1.0
}
fn default_mc() -> usize {
    20_000
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub family: Family,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_noise")]
    pub noise_sd: f64,
    #[serde(default)]
    pub design: Design,
    #[serde(default = "default_mc")]
    pub mc_points: usize,
    /// Smoothness profile used for `phi_n`; defaults depend on the family.
    pub rate: Option<RateSpec>,
    #[serde(default)]
    pub recipe: FitRecipe,
    #[serde(default)]
    pub wavelet: WaveletSection,
}

struct Resolved {
    f0: TargetFn,
    d: usize,
    profile: Option<RateProfile>,
    alpha: Option<f64>,
}

fn usage(e: relucert::Error, field: &str) -> Failure {
    Failure::Usage(format!("field `{field}`: {e}"))
}

fn resolve(cfg: &ExperimentConfig) -> CliResult<Resolved> {
    let mut r = match &cfg.family {
        Family::Target { spec } => Resolved {
            f0: spec.to_fn().map_err(|e| usage(e, "family.spec"))?,
            d: spec.dim(),
            profile: None,
            alpha: None,
        },
        Family::Composition { spec } => {
            let comp = CompositionSpec::from_doc(spec).map_err(|e| usage(e, "family.spec"))?;
            let profile = RateProfile::from_spec(&comp).map_err(|e| usage(e, "family.spec"))?;
            let d = comp.input_dim;
            Resolved {
                f0: TargetFn::new(move |x| comp.eval(x)),
                d,
                profile: Some(profile),
                alpha: None,
            }
        }
        Family::AbsSum { d, center } => {
            if *d == 0 {
                return Err(Failure::Usage("field `family.d`: must be positive".into()));
            }
            let c = center.unwrap_or(*d as f64 / 2.0);
            let profile = RateProfile::new(vec![2.0 * *d as f64, 1.0], vec![*d, 1]).map_err(|e| usage(e, "family"))?;
            Resolved {
                f0: TargetFn::new(move |x| (x.iter().sum::<f64>() - c).abs()),
                d: *d,
                profile: Some(profile),
                alpha: Some(1.0),
            }
        }
        Family::Counterexample { j, alpha, radius, d } => {
            let ce =
                build_counterexample(*j, *alpha, *radius, *d, &WaveletSpec::haar()).map_err(|e| usage(e, "family"))?;
            let profile =
                RateProfile::new(vec![2.0 * *d as f64, alpha.min(1.0)], vec![*d, 1]).map_err(|e| usage(e, "family"))?;
            Resolved {
                f0: TargetFn::new(move |x| ce.eval(x)),
                d: *d,
                profile: Some(profile),
                alpha: Some(*alpha),
            }
        }
    };
    if let Some(rate) = &cfg.rate {
        if rate.beta.len() != rate.t.len() {
            return Err(Failure::Usage(
                "field `rate.t`: must have as many entries as `rate.beta`".into(),
            ));
        }
        r.profile = Some(RateProfile::new(rate.beta.clone(), rate.t.clone()).map_err(|e| usage(e, "rate"))?);
    }
    if let Some(a) = cfg.wavelet.alpha {
        r.alpha = Some(a);
    }
    Ok(r)
}

fn experiment(cfg: &ExperimentConfig, d: usize) -> CliResult<RateExperiment> {
    let exp = RateExperiment {
        d,
        n_grid: cfg.n_grid.clone(),
        replications: cfg.replications,
        noise_sd: cfg.noise_sd,
        design: cfg.design.clone(),
        mc_points: cfg.mc_points,
        seed: cfg.seed,
    };
    exp.validate().map_err(|e| match e {
        relucert::Error::InvalidArgument { name, detail } => Failure::Usage(format!("field `{name}`: {detail}")),
        other => Failure::Usage(other.to_string()),
    })?;
    Ok(exp)
}

#[derive(Serialize)]
struct Report<'a> {
    kind: &'a str,
    config: &'a ExperimentConfig,
    report: &'a RateReport,
}

fn write_outputs(
    out_dir: &Path,
    name: &str,
    kind: &str,
    cfg: &ExperimentConfig,
    stamp: &Stamp,
    report: &RateReport,
) -> CliResult<()> {
    let csv_path = out_path(out_dir, &format!("{name}.csv"))?;
    write_csv(&csv_path, stamp, &report.rows)?;
    let json_path = out_path(out_dir, &format!("{name}.json"))?;
    write_file(
        &json_path,
        &stamped_json(
            &Report {
                kind,
                config: cfg,
                report,
            },
            "run",
            stamp,
        ),
    )?;
    println!("rows:   {}", csv_path.display());
    println!("report: {}", json_path.display());
    match &report.slope {
        Some(s) => println!(
            "slope {:.4} (se {:.4}), predicted {:.4}, dropped {}",
            s.slope, s.slope_se, report.predicted_slope, report.dropped
        ),
        None => println!("degenerate fit: no slope (dropped {})", report.dropped),
    }
    Ok(())
}

fn load(args: &ExperimentArgs) -> CliResult<(ExperimentConfig, Stamp)> {
    let text = read_text(&args.config)?;
    let cfg: ExperimentConfig = parse_config(&args.config, &text)?;
    let stamp = Stamp::new(text.as_bytes(), Some(cfg.seed));
    Ok((cfg, stamp))
}

pub fn run_simulate(args: &ExperimentArgs, out_dir: &Path) -> CliResult<()> {
    let (cfg, stamp) = load(args)?;
    let res = resolve(&cfg)?;
    let profile = res
        .profile
        .ok_or_else(|| Failure::Usage("field `rate`: required for this family".into()))?;
    let exp = experiment(&cfg, res.d)?;
    let report = rate_experiment(&res.f0, &profile, &exp, &cfg.recipe)?;
    write_outputs(
        out_dir,
        args.name.as_deref().unwrap_or("simulate"),
        "network",
        &cfg,
        &stamp,
        &report,
    )
}

pub fn run_wavelet(args: &ExperimentArgs, out_dir: &Path) -> CliResult<()> {
    let (cfg, stamp) = load(args)?;
    if let Some(b) = &cfg.wavelet.basis {
        if b != "haar" {
            return Err(Failure::Usage(format!("field `wavelet.basis`: unknown basis {b:?}")));
        }
    }
    let res = resolve(&cfg)?;
    let alpha = res
        .alpha
        .ok_or_else(|| Failure::Usage("field `wavelet.alpha`: required for this family".into()))?;
    let exp = experiment(&cfg, res.d)?;
    let report = wavelet_rate_experiment(&res.f0, &WaveletSpec::haar(), &exp, alpha)?;
    write_outputs(
        out_dir,
        args.name.as_deref().unwrap_or("wavelet"),
        "wavelet",
        &cfg,
        &stamp,
        &report,
    )
}
