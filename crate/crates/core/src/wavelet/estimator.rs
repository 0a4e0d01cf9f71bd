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

//! Wavelet series estimator from regression data and its risk floor.

use serde::{Deserialize, Serialize};

use super::basis::{Lambda, WaveletSpec};
use crate::error::{Error, Result};
use crate::regression::{
    estimate_risk_fn, run_rate_jobs, sample_dataset, JobOutcome, RateExperiment, RateReport, RegressionDataset,
};
use crate::rng::derive_seed;
use crate::targets::TargetFn;

fn require_uniform(data: &RegressionDataset) -> Result<()> {
    if data.design.is_uniform() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "empirical wavelet coefficients are unbiased only under the uniform design".into(),
        ))
    }
}

/// `(1/n) sum_i Y_i prod_r psi_{lambda_r}(U_{i,r})`.
pub fn empirical_coeff(data: &RegressionDataset, spec: &WaveletSpec, lambdas: &[Lambda]) -> Result<f64> {
    require_uniform(data)?;
    if lambdas.len() != data.d {
        return Err(Error::shape(
            "lambdas",
            format!("{} indices for d = {}", lambdas.len(), data.d),
        ));
    }
    let sum: f64 = (0..data.n())
        .map(|i| data.y[i] * spec.tensor(lambdas, data.row(i)))
        .sum();
    Ok(sum / data.n() as f64)
}

/// Index set of the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexSet {
    Explicit {
        indices: Vec<Vec<Lambda>>,
    },
    /// All tensor indices with every coordinate at level `<= J`.
    Level {
        max_level: i32,
    },
}

/// Largest tensor index set built by level truncation.
pub const MAX_TERMS: usize = 1 << 22;

/// `x -> sum_{lambda in I} d_lambda prod_r psi_{lambda_r}(x_r)`.
#[derive(Debug, Clone)]
pub struct WaveletEstimate {
    pub spec: WaveletSpec,
    pub d: usize,
    pub terms: Vec<(Vec<Lambda>, f64)>,
}

impl WaveletEstimate {
    pub fn from_coefficients(spec: WaveletSpec, d: usize, terms: Vec<(Vec<Lambda>, f64)>) -> Self {
        WaveletEstimate { spec, d, terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(l, c)| if *c == 0.0 { 0.0 } else { c * self.spec.tensor(l, x) })
            .sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Builds the estimator on index set `index`.
pub fn wavelet_estimate(data: &RegressionDataset, spec: &WaveletSpec, index: &IndexSet) -> Result<WaveletEstimate> {
    require_uniform(data)?;
    let terms = match index {
        IndexSet::Explicit { indices } => indices
            .iter()
            .map(|l| Ok((l.clone(), empirical_coeff(data, spec, l)?)))
            .collect::<Result<Vec<_>>>()?,
        IndexSet::Level { max_level } => level_terms(data, spec, *max_level)?,
    };
    Ok(WaveletEstimate {
        spec: spec.clone(),
        d: data.d,
        terms,
    })
}

/// Accumulates all level-truncated coefficients in one pass over the data,
/// visiting only the basis functions that are non-zero at each sample.
fn level_terms(data: &RegressionDataset, spec: &WaveletSpec, level: i32) -> Result<Vec<(Vec<Lambda>, f64)>> {
    let axis = spec.axis_indices(level);
    let m = axis.len();
    let d = data.d;
    let total = (m as f64).powi(d as i32);
    if total > MAX_TERMS as f64 {
        return Err(Error::Precondition(format!(
            "level {level} in dimension {d} needs {total} coefficients, more than {MAX_TERMS}"
        )));
    }
    let total = total as usize;
    let mut acc = vec![0.0; total];
    let mut live: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for i in 0..data.n() {
        let x = data.row(i);
        for r in 0..d {
            live[r].clear();
            for (pos, l) in axis.iter().enumerate() {
                let v = spec.eval(*l, x[r]);
                if v != 0.0 {
                    live[r].push((pos, v));
                }
            }
        }
        if live.iter().any(|v| v.is_empty()) {
            continue;
        }
        let mut counters = vec![0usize; d];
        'tuples: loop {
            let mut flat = 0;
            let mut w = data.y[i];
            for r in 0..d {
                let (pos, v) = live[r][counters[r]];
                flat = flat * m + pos;
                w *= v;
            }
            acc[flat] += w;
            let mut r = d;
            loop {
                if r == 0 {
                    break 'tuples;
                }
                r -= 1;
                counters[r] += 1;
                if counters[r] < live[r].len() {
                    break;
                }
                counters[r] = 0;
            }
        }
    }
    let n = data.n() as f64;
    Ok((0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut l = vec![axis[0]; d];
            for r in (0..d).rev() {
                l[r] = axis[rem % m];
                rem /= m;
            }
            (l, acc[flat] / n)
        })
        .collect())
}

/// Truncation level balancing `2^{Jd}/n` against `2^{-2 J alpha}`.
pub fn balancing_level(n: usize, alpha: f64, d: usize) -> i32 {
    ((n as f64).log2() / (2.0 * alpha + d as f64)).floor().max(0.0) as i32
}

/// `sum_lambda min(1/n, d_lambda^2)`.
pub fn risk_floor(coefficients: &[f64], n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    coefficients.iter().map(|c| inv.min(c * c)).sum()
}

/// Level-truncated estimator at the balancing level for smoothness `alpha`,
/// with the same report schema as the network experiments.
pub fn wavelet_rate_experiment(
    f0: &TargetFn,
    spec: &WaveletSpec,
    exp: &RateExperiment,
    alpha: f64,
) -> Result<RateReport> {
    if !(alpha > 0.0) {
        return Err(Error::arg("alpha", "must be positive"));
    }
    if !exp.design.is_uniform() {
        return Err(Error::Precondition(
            "the wavelet estimator requires the uniform design".into(),
        ));
    }
    let predicted = -2.0 * alpha / (2.0 * alpha + exp.d as f64);
    run_rate_jobs(exp, predicted, |n, seed| {
        let data = sample_dataset(f0, n, exp.d, &exp.design, exp.noise_sd, derive_seed(seed, 0))?;
        let level = balancing_level(n, alpha, exp.d);
        let est = wavelet_estimate(&data, spec, &IndexSet::Level { max_level: level })?;
        let emp = (0..n).map(|i| (data.y[i] - est.eval(data.row(i))).powi(2)).sum::<f64>() / n as f64;
        let (risk, se) = estimate_risk_fn(
            |x| Ok(est.eval(x)),
            f0,
            exp.d,
            &exp.design,
            exp.mc_points,
            derive_seed(seed, 2),
        )?;
        Ok(JobOutcome {
            empirical_risk: emp,
            pred_risk: risk,
            pred_risk_se: se,
            size: est.len(),
        })
    })
}
