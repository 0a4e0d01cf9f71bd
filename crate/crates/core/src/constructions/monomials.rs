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

//! The network `Mon_{m,gamma}^r` returning all monomials of degree below
//! `gamma` in `r` variables.

use super::certificate::{Construction, ConstructionCertificate, Domain, Provenance};
use super::mult::{ceil_log2, check_m, mult_tree};
use crate::calculus::{parallelize, sync_depth, Placement};
use crate::error::{Error, Result};
use crate::network::{LayerBuilder, SparseNetwork};

/// Largest number of monomials a single network may carry.
pub const MAX_MONOMIALS: usize = 100_000;

/// All multi-indices `alpha` in `r` variables with `|alpha| < gamma`,
/// ordered by degree and, within a degree, lexicographically from the
/// largest first exponent down. For `r = 2`, `gamma = 2.5` this is
/// `1, x1, x2, x1^2, x1 x2, x2^2`.
pub fn multi_indices(r: usize, gamma: f64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut degree = 0usize;
    while (degree as f64) < gamma {
        let mut alpha = vec![0; r];
        push_compositions(degree, 0, &mut alpha, &mut out);
        degree += 1;
    }
    out
}

fn push_compositions(rest: usize, pos: usize, alpha: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == alpha.len() {
        alpha[pos] = rest;
        out.push(alpha.clone());
        return;
    }
    for first in (0..=rest).rev() {
        alpha[pos] = first;
        push_compositions(rest - first, pos + 1, alpha, out);
    }
    alpha[pos] = 0;
}

/// Number of monomials `C_{r,gamma}` of degree below `gamma`, by the
/// stars-and-bars count summed over degrees.
pub fn monomial_count(r: usize, gamma: f64) -> usize {
    let mut total = 0usize;
    let mut degree = 0usize;
    while (degree as f64) < gamma {
        total += binomial(degree + r - 1, r - 1);
        degree += 1;
    }
    total
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `x^alpha` evaluated directly.
pub fn monomial(alpha: &[usize], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product()
}

/// Depth `1 + (m + 5) ceil(log2(max(gamma, 1)))` of the monomial network.
pub fn mon_depth(m: u32, gamma: f64) -> usize {
    1 + (m as usize + 5) * ceil_log2(gamma.max(1.0).ceil() as usize) as usize
}

/// One monomial on `[0,1]^r`: a depth-one net for degree at most one and a
/// multiplication tree over repeated inputs otherwise.
fn monomial_net(m: u32, alpha: &[usize]) -> Result<SparseNetwork> {
    let r = alpha.len();
    let degree: usize = alpha.iter().sum();
    let picks: Vec<Option<usize>> = alpha
        .iter()
        .enumerate()
        .flat_map(|(j, &a)| std::iter::repeat_n(Some(j), a))
        .collect();
    if degree >= 2 {
        return mult_tree(m, r, &picks);
    }
    let mut hidden = LayerBuilder::hidden(1, r);
    match picks.first() {
        Some(Some(j)) => {
            hidden.set(0, *j, 1.0);
        }
        _ => {
            hidden.set_shift(0, -1.0);
        }
    }
    let mut out = LayerBuilder::output(1, 1);
    out.set(0, 0, 1.0);
    SparseNetwork::new(vec![r, 1, 1], vec![hidden.build(), out.build()], None)
}

/// `Mon_{m,gamma}^r` with its certificate. Output coordinates follow
/// [`multi_indices`]; the certificate stores that layout.
pub fn build_mon(m: u32, gamma: f64, r: usize) -> Result<(SparseNetwork, ConstructionCertificate)> {
    check_m(m)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} must be positive and finite"
        )));
    }
    if r < 1 {
        return Err(Error::Precondition("r must be at least 1".into()));
    }
    let count = monomial_count(r, gamma);
    if count > MAX_MONOMIALS {
        return Err(Error::Precondition(format!(
            "{count} monomials of degree below {gamma} in {r} variables exceed the limit {MAX_MONOMIALS}"
        )));
    }
    let indices = multi_indices(r, gamma);
    let depth = mon_depth(m, gamma);
    // outputs are nonnegative, so padding after the output costs one unit per layer
    let nets = indices
        .iter()
        .map(|alpha| {
            let n = monomial_net(m, alpha)?;
            sync_depth(&n, depth - n.depth(), Placement::Output)
        })
        .collect::<Result<Vec<_>>>()?;
    let net = parallelize(&nets)?;

    let c = count as f64;
    let cert = ConstructionCertificate {
        statement_id: "monomials".into(),
        depth,
        width_bound: 6 * gamma.ceil() as usize * count,
        sparsity_bound: (6.0 * r as f64 * (gamma + 1.0) * c
            + 42.0 * (gamma + 1.0).powi(2) * c * c * (depth as f64 + 1.0))
            .floor() as usize,
        sup_error_bound: gamma * gamma * 2f64.powi(-(m as i32)),
        measured_grid_error: None,
        grid_spec: None,
        domain: Domain::unit_cube(r),
        derivative_provenance: Provenance::NotApplicable,
        construction: Construction::Monomials { m, gamma, r },
        output_layout: Some(indices),
    };
    Ok((net, cert))
}
