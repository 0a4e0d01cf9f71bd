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

//! Monte Carlo prediction risk and log-log rate experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{sample_dataset, Design};
use super::fit::{fit_erm, Hyper};
use crate::error::{Error, Result};
use crate::network::{capacity, Evaluator, SparseNetwork};
use crate::rates::{Architecture, RateProfile};
use crate::rng::{derive_seed, rng, stream_id};
use crate::targets::TargetFn;

/// Monte Carlo estimate of `E (pred(X) - f_0(X))^2` and its standard error.
pub fn estimate_risk_fn<P>(
    pred: P,
    f0: &TargetFn,
    d: usize,
    design: &Design,
    mc_points: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    P: FnMut(&[f64]) -> Result<f64>,
{
    let mut pred = pred;
    if mc_points < 100 {
        return Err(Error::arg("mc_points", "at least 100 points are required"));
    }
    design.validate(d)?;
    let mut rng = rng(seed);
    let mut x = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..mc_points {
        design.sample(&mut rng, &mut x);
        let e = pred(&x)? - f0.value(&x);
        let e2 = e * e;
        sum += e2;
        sum_sq += e2 * e2;
    }
    let m = mc_points as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok((mean, (var / m).sqrt()))
}

/// Prediction risk of `net` under the uniform design.
pub fn estimate_prediction_risk(net: &SparseNetwork, f0: &TargetFn, mc_points: usize, seed: u64) -> Result<(f64, f64)> {
    if net.output_dim() != 1 {
        return Err(Error::shape("net", "expected a scalar network"));
    }
    let mut ev = Evaluator::new(net);
    estimate_risk_fn(
        |x| Ok(ev.eval(x)?[0]),
        f0,
        net.input_dim(),
        &Design::Uniform,
        mc_points,
        seed,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

/// Least-squares fit of `log value` on `log n`. `None` when fewer than three
/// points are usable.
pub fn log_log_slope(ns: &[f64], values: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(values)
        .filter(|(n, v)| **n > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(n, v)| (n.ln(), v.ln()))
        .collect();
    if pts.len() < 3 || pts.len() != ns.len() {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(SlopeFit {
        slope,
        slope_se: (ssr / (k - 2.0) / sxx).sqrt(),
        intercept,
    })
}

/// Architecture as a function of `n`: width and sparsity follow
/// `n phi_n` and `n phi_n log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitRecipe {
    pub depth: usize,
    pub width_factor: f64,
    pub min_width: usize,
    pub max_width: usize,
    pub sparsity_factor: f64,
    pub sup_bound: f64,
    pub hyper: Hyper,
}

impl Default for FitRecipe {
    fn default() -> Self {
        FitRecipe {
            depth: 3,
            width_factor: 1.0,
            min_width: 8,
            max_width: 24,
            sparsity_factor: 1.0,
            sup_bound: 4.0,
            hyper: Hyper::default(),
        }
    }
}

impl FitRecipe {
    pub fn architecture(&self, n: usize, d: usize, profile: &RateProfile) -> Result<Architecture> {
        if self.depth == 0 || self.min_width == 0 || self.max_width < self.min_width {
            return Err(Error::arg("recipe", "need depth >= 1 and 1 <= min_width <= max_width"));
        }
        let (phi, _) = profile.phi(n as u64)?;
        let nphi = n as f64 * phi;
        let width = (ceil_tol(self.width_factor * nphi) as usize).clamp(self.min_width, self.max_width);
        let mut widths = vec![width; self.depth + 2];
        widths[0] = d;
        widths[self.depth + 1] = 1;
        let cap = capacity(&widths);
        let s = (ceil_tol(self.sparsity_factor * nphi * (n as f64).ln()) as usize).clamp(1, cap);
        Ok(Architecture {
            depth: self.depth,
            widths,
            sparsity: s,
            sup_bound: self.sup_bound,
        })
    }
}

/// Ceiling that ignores rounding noise from `powf`.
fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub replication: usize,
    pub empirical_risk: f64,
    pub pred_risk: f64,
    pub pred_risk_se: f64,
    pub s_final: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: usize,
    pub mean_pred_risk: f64,
    /// Standard error of the mean across replications.
    pub se: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub per_n: Vec<PerN>,
    pub slope: Option<SlopeFit>,
    /// `-2 beta* / (2 beta* + t)` of the dominating level.
    pub predicted_slope: f64,
    pub dropped: usize,
    pub failures: Vec<String>,
    /// Risks too small for a meaningful log-log fit.
    pub degenerate: bool,
}

/// Below this every per-`n` risk is treated as a perfect fit.
pub const DEGENERATE_RISK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateExperiment {
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub noise_sd: f64,
    pub design: Design,
    pub mc_points: usize,
    pub seed: u64,
}

impl Default for RateExperiment {
    fn default() -> Self {
        RateExperiment {
            d: 1,
            n_grid: vec![256, 512, 1024, 2048],
            replications: 4,
            noise_sd: 1.0,
            design: Design::Uniform,
            mc_points: 20_000,
            seed: 0,
        }
    }
}

impl RateExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 4 {
            return Err(Error::arg(
                "n_grid",
                format!("{} points given, at least 4 are required", self.n_grid.len()),
            ));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid[0] == 0 {
            return Err(Error::arg("n_grid", "must be positive and strictly increasing"));
        }
        if self.replications == 0 {
            return Err(Error::arg("replications", "must be positive"));
        }
        if self.d == 0 {
            return Err(Error::arg("d", "must be positive"));
        }
        if self.mc_points < 100 {
            return Err(Error::arg("mc_points", "at least 100 points are required"));
        }
        self.design.validate(self.d)
    }

    /// Seed of replication `rep` at grid index `idx`.
    pub fn job_seed(&self, idx: usize, rep: usize) -> u64 {
        derive_seed(self.seed, stream_id(idx as u32, rep as u32))
    }
}

/// Outcome of one `(n, replication)` job.
pub struct JobOutcome {
    pub empirical_risk: f64,
    pub pred_risk: f64,
    pub pred_risk_se: f64,
    pub size: usize,
}

/// Runs `job(n, seed)` over the grid and replications and summarizes the
/// risks. Failed jobs are dropped and counted.
pub fn run_rate_jobs<J>(exp: &RateExperiment, predicted_slope: f64, job: J) -> Result<RateReport>
where
    J: Fn(usize, u64) -> Result<JobOutcome> + Sync,
{
    exp.validate()?;
    let jobs: Vec<(usize, usize)> = (0..exp.n_grid.len())
        .flat_map(|i| (0..exp.replications).map(move |r| (i, r)))
        .collect();
    let results: Vec<(usize, usize, u64, Result<JobOutcome>)> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let seed = exp.job_seed(i, r);
            (i, r, seed, job(exp.n_grid[i], seed))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, r, seed, res) in results {
        match res {
            Ok(o) => rows.push(RateRow {
                n: exp.n_grid[i],
                replication: r,
                empirical_risk: o.empirical_risk,
                pred_risk: o.pred_risk,
                pred_risk_se: o.pred_risk_se,
                s_final: o.size,
                seed,
            }),
            Err(e) => failures.push(format!("n = {}, replication {r}: {e}", exp.n_grid[i])),
        }
    }
    let per_n: Vec<PerN> = exp
        .n_grid
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|row| row.n == n).map(|row| row.pred_risk).collect();
            let k = v.len() as f64;
            let mean = v.iter().sum::<f64>() / k;
            let se = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
            } else {
                f64::NAN
            };
            PerN {
                n,
                mean_pred_risk: mean,
                se,
                replications: v.len(),
            }
        })
        .collect();
    let ns: Vec<f64> = per_n.iter().map(|p| p.n as f64).collect();
    let means: Vec<f64> = per_n.iter().map(|p| p.mean_pred_risk).collect();
    let degenerate = means.iter().all(|m| !(*m > DEGENERATE_RISK));
    let slope = if degenerate { None } else { log_log_slope(&ns, &means) };
    Ok(RateReport {
        rows,
        per_n,
        slope,
        predicted_slope,
        dropped: failures.len(),
        failures,
        degenerate: degenerate || slope.is_none(),
    })
}

/// Fits networks by [`fit_erm`] on fresh data at each `n` and regresses the
/// averaged prediction risk on `n`.
pub fn rate_experiment(
    f0: &TargetFn,
    profile: &RateProfile,
    exp: &RateExperiment,
    recipe: &FitRecipe,
) -> Result<RateReport> {
    let predicted = -profile.exponent();
    run_rate_jobs(exp, predicted, |n, seed| {
        let data = sample_dataset(f0, n, exp.d, &exp.design, exp.noise_sd, derive_seed(seed, 0))?;
        let arch = recipe.architecture(n, exp.d, profile)?;
        let hyper = Hyper {
            seed: derive_seed(seed, 1),
            ..recipe.hyper.clone()
        };
        let fit = fit_erm(&data, &arch, &hyper)?;
        let (risk, se) = estimate_prediction_risk(&fit.net, f0, exp.mc_points, derive_seed(seed, 2))?;
        Ok(JobOutcome {
            empirical_risk: fit.empirical_risk,
            pred_risk: risk,
            pred_risk_se: se,
            size: fit.net.count_active().active,
        })
    })
}
