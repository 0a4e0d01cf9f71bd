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

//! Functions `f(x) = h(x_1 + ... + x_d)` whose wavelet coefficients on a
//! sparse lattice all equal `c K 2^{-j(2 alpha + d)/2}`.

use serde::{Deserialize, Serialize};

use super::basis::{Lambda, WaveletSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub j: u32,
    pub alpha: f64,
    pub radius: f64,
    pub d: usize,
    pub q: u32,
    pub nu: u32,
    pub r: u32,
    /// Exponent of `g`: `r` if `mu_0 != 0`, else `d r`.
    pub power: u32,
    pub mu0: f64,
    pub mu_r: f64,
}

/// `h_{j,alpha}(u) = K 2^{-j alpha - 1} g({2^{j-q-nu} u})` with
/// `g(u) = u^P / P` on `[0, 1/2]` and `(1 - u)^P / P` on `(1/2, 1]`.
pub fn build_counterexample(j: u32, alpha: f64, radius: f64, d: usize, spec: &WaveletSpec) -> Result<Counterexample> {
    if d == 0 {
        return Err(Error::arg("d", "must be positive"));
    }
    if !(alpha > 0.0 && alpha <= spec.r as f64) {
        return Err(Error::arg("alpha", format!("{alpha} outside (0, {}]", spec.r)));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::arg("K", "must be positive"));
    }
    let nu = WaveletSpec::nu(d);
    if j < spec.q + nu {
        return Err(Error::Precondition(format!(
            "level j = {j} must be at least q + nu = {}",
            spec.q + nu
        )));
    }
    let power = if spec.mu0 != 0.0 { spec.r } else { d as u32 * spec.r };
    Ok(Counterexample {
        j,
        alpha,
        radius,
        d,
        q: spec.q,
        nu,
        r: spec.r,
        power,
        mu0: spec.mu0,
        mu_r: spec.mu_r,
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Counterexample {
    fn g(&self, u: f64) -> f64 {
        let p = self.power as i32;
        let v = if u <= 0.5 { u } else { 1.0 - u };
        v.powi(p) / p as f64
    }

    pub fn h(&self, u: f64) -> f64 {
        let scaled = 2f64.powi(self.j as i32 - (self.q + self.nu) as i32) * u;
        self.radius * 2f64.powf(-(self.j as f64) * self.alpha - 1.0) * self.g(scaled - scaled.floor())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.h(x.iter().sum())
    }

    /// `p` ranges over `0 .. 2^{j-q-nu}` in every coordinate.
    pub fn lattice_side(&self) -> usize {
        1usize << (self.j - self.q - self.nu)
    }

    /// Tensor index `((j, 2^{q+nu} p_1), ..., (j, 2^{q+nu} p_d))`.
    pub fn lattice_index(&self, p: &[usize]) -> Vec<Lambda> {
        p.iter()
            .map(|pi| Lambda::new(self.j as i32, ((1usize << (self.q + self.nu)) * pi) as i64))
            .collect()
    }

    pub fn lattice_indices(&self) -> Vec<Vec<Lambda>> {
        let side = self.lattice_side();
        let total = side.pow(self.d as u32);
        (0..total)
            .map(|mut flat| {
                let mut p = vec![0; self.d];
                for r in (0..self.d).rev() {
                    p[r] = flat % side;
                    flat /= side;
                }
                self.lattice_index(&p)
            })
            .collect()
    }

    /// Common value of the lattice coefficients. For `mu_0 = 0` the
    /// multinomial factor is `(d r)! / (r!)^d`.
    pub fn predicted_coefficient(&self) -> f64 {
        let (d, r) = (self.d as f64, self.r as f64);
        let decay = 2f64.powf(-(self.j as f64) * (2.0 * self.alpha + d) / 2.0);
        let qn = (self.q + self.nu) as f64;
        if self.mu0 != 0.0 {
            d / r * 2f64.powf(-qn * r - 1.0) * self.radius * self.mu0.powi(self.d as i32 - 1) * self.mu_r * decay
        } else {
            let p = self.power;
            let multinomial = factorial(p) / factorial(self.r).powi(self.d as i32);
            multinomial / p as f64 * 2f64.powf(-qn * d * r - 1.0) * self.radius * self.mu_r.powi(self.d as i32) * decay
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng;
    use crate::wavelet::basis::quad_coeff;
    use rand::Rng;

    #[test]
    fn bounded_and_holder() {
        let spec = WaveletSpec::haar();
        for (d, alpha) in [(1, 0.5), (2, 1.0), (3, 0.7)] {
            let c = build_counterexample(6, alpha, 1.0, d, &spec).unwrap();
            let mut r = rng(d as u64);
            let window = 2f64.powi((c.q + c.nu) as i32 - 6);
            for _ in 0..10_000 {
                let u = r.random_range(0.0..d as f64);
                let v = (u + r.random_range(-window..window)).clamp(0.0, d as f64);
                assert!(c.h(u).abs() <= 0.5);
                if u != v {
                    assert!((c.h(u) - c.h(v)).abs() <= (u - v).abs().powf(alpha) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn argument_checks() {
        let spec = WaveletSpec::haar();
        assert!(build_counterexample(6, 1.5, 1.0, 1, &spec).is_err());
        assert!(build_counterexample(6, 0.0, 1.0, 1, &spec).is_err());
        assert!(build_counterexample(1, 0.5, 1.0, 2, &spec)
            .unwrap_err()
            .is_precondition());
    }

    #[test]
    fn lattice_coefficients_equal_prediction_in_one_dimension() {
        let spec = WaveletSpec::haar();
        let c = build_counterexample(5, 1.0, 1.0, 1, &spec).unwrap();
        assert_eq!(c.lattice_side(), 16);
        let want = c.predicted_coefficient();
        for l in c.lattice_indices() {
            let got = quad_coeff(|x| c.eval(x), &spec, &l, 1 << 10).unwrap().value;
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1e-300) + 1e-15,
                "{l:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn multinomial_factor_in_three_dimensions() {
        let spec = WaveletSpec::haar();
        let c = build_counterexample(4, 1.0, 1.0, 3, &spec).unwrap();
        let got = quad_coeff(|x| c.eval(x), &spec, &c.lattice_index(&[1, 0, 1]), 1 << 8)
            .unwrap()
            .value;
        let want = c.predicted_coefficient();
        assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
    }
}
