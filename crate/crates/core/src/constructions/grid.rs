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

//! Evaluation grids and sup-norm error measurement on `[0, 1]^r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Evaluator, SparseNetwork};

/// Largest number of points a default tensor grid may hold.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;

/// Quasi-random points used for `r > 3`.
pub const HALTON_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `points_per_axis` equispaced values `i / (points_per_axis - 1)` on each axis.
    Tensor { dim: usize, points_per_axis: usize },
    /// The first `points` elements of the Halton sequence with prime bases.
    Halton { dim: usize, points: usize },
}

impl GridSpec {
    /// Tensor grid with step `min(2^{-m-2}, 1/256)` for `r <= 3`, coarsened
    /// by powers of two until at most `budget` points remain; Halton points
    /// otherwise. The finest step contains every breakpoint `l 2^{-m-1}`.
    pub fn standard(dim: usize, m: u32, budget: usize) -> GridSpec {
        if dim > 3 {
            return GridSpec::Halton {
                dim,
                points: HALTON_POINTS.min(budget.max(1)),
            };
        }
        let mut level = (m + 2).max(8);
        while level > 1 && ((1usize << level) + 1).saturating_pow(dim as u32) > budget {
            level -= 1;
        }
        GridSpec::Tensor {
            dim,
            points_per_axis: (1 << level) + 1,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            GridSpec::Tensor { dim, .. } | GridSpec::Halton { dim, .. } => dim,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            GridSpec::Tensor { dim, points_per_axis } => points_per_axis.pow(dim as u32),
            GridSpec::Halton { points, .. } => points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes point `index` into `out`.
    pub fn point(&self, index: usize, out: &mut [f64]) {
        match *self {
            GridSpec::Tensor { dim, points_per_axis } => {
                let denom = (points_per_axis - 1).max(1) as f64;
                let mut rest = index;
                for o in out.iter_mut().take(dim) {
                    *o = (rest % points_per_axis) as f64 / denom;
                    rest /= points_per_axis;
                }
            }
            GridSpec::Halton { dim, .. } => {
                for (j, o) in out.iter_mut().take(dim).enumerate() {
                    *o = radical_inverse(index as u64 + 1, PRIMES[j % PRIMES.len()]);
                }
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| {
            let mut p = vec![0.0; self.dim()];
            self.point(i, &mut p);
            p
        })
    }

    pub fn describe(&self) -> String {
        match *self {
            GridSpec::Tensor { dim, points_per_axis } => format!("tensor {points_per_axis}^{dim}"),
            GridSpec::Halton { dim, points } => format!("halton {points} points in dim {dim}"),
        }
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Largest coordinate-wise deviation `|net(x) - reference(x)|` over the grid.
pub fn measure_sup_error<F>(net: &SparseNetwork, grid: &GridSpec, reference: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if grid.dim() != net.input_dim() {
        return Err(Error::shape(
            "grid",
            format!(
                "grid dimension {} but network input width {}",
                grid.dim(),
                net.input_dim()
            ),
        ));
    }
    let dim = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map_init(
            || (Evaluator::new(net), vec![0.0; dim]),
            |(ev, x), i| -> Result<f64> {
                grid.point(i, x);
                let want = reference(x);
                let got = ev.eval(x)?;
                if want.len() != got.len() {
                    return Err(Error::shape(
                        "reference",
                        format!("reference returned {} values, network {}", want.len(), got.len()),
                    ));
                }
                Ok(got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            },
        )
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Evaluates `net` at every grid point, in grid order.
pub fn evaluate_grid(net: &SparseNetwork, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let dim = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map_init(
            || (Evaluator::new(net), vec![0.0; dim]),
            |(ev, x), i| {
                grid.point(i, x);
                ev.eval(x).map(<[f64]>::to_vec)
            },
        )
        .collect()
}
