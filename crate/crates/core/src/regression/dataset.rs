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

//! Data from the regression model `Y_i = f_0(X_i) + eps_i`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Evaluator, SparseNetwork};
use crate::rng::rng;
use crate::targets::TargetFn;

/// Covariate distribution on `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Design {
    #[default]
    Uniform,
    /// Independent coordinates with density `a_j x^{a_j - 1}`.
    ProductDensity { exponents: Vec<f64> },
}

impl Design {
    pub fn is_uniform(&self) -> bool {
        match self {
            Design::Uniform => true,
            Design::ProductDensity { exponents } => exponents.iter().all(|a| *a == 1.0),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if let Design::ProductDensity { exponents } = self {
            if exponents.len() != d {
                return Err(Error::shape(
                    "design.exponents",
                    format!("expected {d} entries, got {}", exponents.len()),
                ));
            }
            if let Some(i) = exponents.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(Error::arg(format!("design.exponents[{i}]"), "must be positive"));
            }
        }
        Ok(())
    }

    /// Fills `out` with one draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Design::Uniform => out.iter_mut().for_each(|v| *v = rng.random::<f64>()),
            Design::ProductDensity { exponents } => {
                for (v, a) in out.iter_mut().zip(exponents) {
                    *v = rng.random::<f64>().powf(1.0 / a);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub d: usize,
    /// Row-major `n x d`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Realized `Y_i - f_0(X_i)`.
    pub noise: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
    pub design: Design,
    pub truth: TargetFn,
}

impl RegressionDataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// Content fingerprint used to tell datasets apart.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the raw bits
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.x.iter().chain(&self.y) {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Draws `n` pairs; deterministic in `seed`.
pub fn sample_dataset(
    f0: &TargetFn,
    n: usize,
    d: usize,
    design: &Design,
    noise_sd: f64,
    seed: u64,
) -> Result<RegressionDataset> {
    if n == 0 || d == 0 {
        return Err(Error::arg("n", "n and d must be positive"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::arg("noise_sd", "must be a nonnegative number"));
    }
    design.validate(d)?;
    let mut rng = rng(seed);
    let mut x = vec![0.0; n * d];
    let mut y = Vec::with_capacity(n);
    let mut noise = Vec::with_capacity(n);
    for i in 0..n {
        let row = &mut x[i * d..(i + 1) * d];
        design.sample(&mut rng, row);
        let z: f64 = rng.sample(StandardNormal);
        let eps = noise_sd * z;
        noise.push(eps);
        y.push(f0.value(row) + eps);
    }
    Ok(RegressionDataset {
        d,
        x,
        y,
        noise,
        noise_sd,
        seed,
        design: design.clone(),
        truth: f0.clone(),
    })
}

/// `(1/n) sum_i (Y_i - f(X_i))^2`.
pub fn empirical_risk(net: &SparseNetwork, data: &RegressionDataset) -> Result<f64> {
    if net.input_dim() != data.d || net.output_dim() != 1 {
        return Err(Error::shape(
            "net",
            format!(
                "network maps {} -> {}, data needs {} -> 1",
                net.input_dim(),
                net.output_dim(),
                data.d
            ),
        ));
    }
    let mut ev = Evaluator::new(net);
    let mut sum = 0.0;
    for i in 0..data.n() {
        let r = data.y[i] - ev.eval(data.row(i))?[0];
        sum += r * r;
    }
    Ok(sum / data.n() as f64)
}
