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

//! Compactly supported wavelets on `[0, 1]` and quadrature for their
//! tensor-product coefficients.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng;

/// `(j, k)`: `j = -1` is the shifted scaling function `phi(x - k)`, `j >= 0`
/// is `2^{j/2} psi(2^j x - k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lambda {
    pub j: i32,
    pub k: i64,
}

impl Lambda {
    pub fn new(j: i32, k: i64) -> Self {
        Lambda { j, k }
    }
}

pub type RealFn = fn(f64) -> f64;

#[derive(Debug, Clone)]
pub struct WaveletSpec {
    pub name: String,
    pub psi: RealFn,
    pub phi: RealFn,
    /// `psi` and `phi` vanish outside `[0, 2^q]`.
    pub q: u32,
    /// Smallest `r >= 1` with a non-zero moment `mu_r`.
    pub r: u32,
    pub mu0: f64,
    pub mu_r: f64,
}

fn haar_psi(x: f64) -> f64 {
    if (0.0..0.5).contains(&x) {
        1.0
    } else if (0.5..1.0).contains(&x) {
        -1.0
    } else {
        0.0
    }
}

fn haar_phi(x: f64) -> f64 {
    if (0.0..1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

const MOMENT_POINTS: usize = 1 << 16;
const MOMENT_TOL: f64 = 1e-8;
const MAX_MOMENT: u32 = 12;

fn moment(f: RealFn, q: u32, i: u32) -> f64 {
    let a = 2f64.powi(q as i32);
    let h = a / MOMENT_POINTS as f64;
    (0..MOMENT_POINTS)
        .map(|t| {
            let x = (t as f64 + 0.5) * h;
            x.powi(i as i32) * f(x)
        })
        .sum::<f64>()
        * h
}

impl WaveletSpec {
    /// `psi = 1_{[0,1/2)} - 1_{[1/2,1)}`, `q = 0`, `r = 1`, `mu_1 = -1/4`.
    pub fn haar() -> Self {
        WaveletSpec {
            name: "haar".into(),
            psi: haar_psi,
            phi: haar_phi,
            q: 0,
            r: 1,
            mu0: 0.0,
            mu_r: -0.25,
        }
    }

    /// Checks the support on a grid and computes the moments by quadrature.
    pub fn new(name: impl Into<String>, psi: RealFn, phi: RealFn, q: u32) -> Result<Self> {
        let a = 2f64.powi(q as i32);
        for t in 1..=1000 {
            let off = t as f64 * a / 100.0;
            for x in [-off, a + off] {
                if psi(x) != 0.0 || phi(x) != 0.0 {
                    return Err(Error::arg("psi", format!("non-zero at {x}, outside [0, {a}]")));
                }
            }
        }
        let mu0 = moment(psi, q, 0);
        let r = (1..=MAX_MOMENT)
            .find(|&i| moment(psi, q, i).abs() > MOMENT_TOL)
            .ok_or_else(|| Error::arg("psi", format!("no non-zero moment up to order {MAX_MOMENT}")))?;
        Ok(WaveletSpec {
            name: name.into(),
            psi,
            phi,
            q,
            r,
            mu0: if mu0.abs() <= MOMENT_TOL { 0.0 } else { mu0 },
            mu_r: moment(psi, q, r),
        })
    }

    /// `nu = ceil(log2 d) + 1`.
    pub fn nu(d: usize) -> u32 {
        (d.max(1) as f64).log2().ceil() as u32 + 1
    }

    pub fn eval(&self, l: Lambda, x: f64) -> f64 {
        if l.j < 0 {
            (self.phi)(x - l.k as f64)
        } else {
            let s = 2f64.powi(l.j);
            s.sqrt() * (self.psi)(s * x - l.k as f64)
        }
    }

    /// Support of `psi_lambda` intersected with `[0, 1]`; `None` if empty.
    pub fn support(&self, l: Lambda) -> Option<(f64, f64)> {
        let a = 2f64.powi(self.q as i32);
        let (lo, hi) = if l.j < 0 {
            (l.k as f64, l.k as f64 + a)
        } else {
            let s = 2f64.powi(-l.j);
            (l.k as f64 * s, (l.k as f64 + a) * s)
        };
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        (lo < hi).then_some((lo, hi))
    }

    /// Indices of one axis up to level `J` whose support meets `[0, 1]`.
    pub fn axis_indices(&self, level: i32) -> Vec<Lambda> {
        let a = 1i64 << self.q;
        let mut out: Vec<Lambda> = (1 - a..=0).map(|k| Lambda::new(-1, k)).collect();
        for j in 0..=level {
            out.extend((1 - a..(1i64 << j)).map(|k| Lambda::new(j, k)));
        }
        out.retain(|l| self.support(*l).is_some());
        out
    }

    /// `prod_r psi_{lambda_r}(x_r)`.
    pub fn tensor(&self, lambdas: &[Lambda], x: &[f64]) -> f64 {
        let mut p = 1.0;
        for (l, xi) in lambdas.iter().zip(x) {
            p *= self.eval(*l, *xi);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCoeff {
    pub value: f64,
    /// Present for the Monte Carlo fallback.
    pub std_error: Option<f64>,
}

/// Dimension from which [`quad_coeff`] switches to Monte Carlo.
pub const MC_DIM: usize = 4;
/// Default points per axis of the tensor midpoint rule.
pub fn default_quad_points(d: usize) -> usize {
    match d {
        0..=2 => 1 << 12,
        3 => 1 << 8,
        _ => 1 << 20,
    }
}

/// `d_lambda(f) = int f(x) prod_r psi_{lambda_r}(x_r) dx` by the tensor
/// midpoint rule on the support box with `quad_points` nodes per axis, or by
/// Monte Carlo with `quad_points` draws when `d >= 4`.
pub fn quad_coeff<F>(f: F, spec: &WaveletSpec, lambdas: &[Lambda], quad_points: usize) -> Result<QuadCoeff>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = lambdas.len();
    if d == 0 {
        return Err(Error::arg("lambdas", "empty index tuple"));
    }
    if d <= 2 && quad_points < 1 << 10 {
        return Err(Error::arg("quad_points", format!("{quad_points} < 2^10 per axis")));
    }
    if quad_points < 2 {
        return Err(Error::arg("quad_points", "at least 2 nodes are required"));
    }
    let Some(boxes) = lambdas.iter().map(|l| spec.support(*l)).collect::<Option<Vec<_>>>() else {
        return Ok(QuadCoeff {
            value: 0.0,
            std_error: None,
        });
    };
    if d >= MC_DIM {
        return Ok(mc_coeff(&f, spec, lambdas, &boxes, quad_points));
    }
    let m = quad_points;
    let axes: Vec<(Vec<f64>, Vec<f64>, f64)> = lambdas
        .iter()
        .zip(&boxes)
        .map(|(l, (lo, hi))| {
            let h = (hi - lo) / m as f64;
            let xs: Vec<f64> = (0..m).map(|t| lo + (t as f64 + 0.5) * h).collect();
            let ws: Vec<f64> = xs.iter().map(|x| spec.eval(*l, *x)).collect();
            (xs, ws, h)
        })
        .collect();
    let vol: f64 = axes.iter().map(|a| a.2).product();
    let total: f64 = (0..m)
        .into_par_iter()
        .map(|i0| {
            let w0 = axes[0].1[i0];
            if w0 == 0.0 {
                return 0.0;
            }
            let mut x = vec![0.0; d];
            x[0] = axes[0].0[i0];
            let mut acc = 0.0;
            let rest = m.pow(d as u32 - 1);
            for flat in 0..rest {
                let mut w = w0;
                let mut rem = flat;
                for r in (1..d).rev() {
                    let t = rem % m;
                    rem /= m;
                    x[r] = axes[r].0[t];
                    w *= axes[r].1[t];
                }
                if w != 0.0 {
                    acc += w * f(&x);
                }
            }
            acc
        })
        .sum();
    Ok(QuadCoeff {
        value: total * vol,
        std_error: None,
    })
}

fn mc_coeff<F>(f: &F, spec: &WaveletSpec, lambdas: &[Lambda], boxes: &[(f64, f64)], draws: usize) -> QuadCoeff
where
    F: Fn(&[f64]) -> f64,
{
    let vol: f64 = boxes.iter().map(|(lo, hi)| hi - lo).product();
    let mut rng = rng(0x5eed);
    let mut x = vec![0.0; lambdas.len()];
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        for (xi, (lo, hi)) in x.iter_mut().zip(boxes) {
            *xi = rng.random_range(*lo..*hi);
        }
        let v = vol * f(&x) * spec.tensor(lambdas, &x);
        s += v;
        s2 += v * v;
    }
    let n = draws as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    QuadCoeff {
        value: mean,
        std_error: Some((var / n).sqrt()),
    }
}
