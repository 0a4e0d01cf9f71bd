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

//! Multiplication networks: `Mult_m` for pairs and the binary tree
//! `Mult_m^r` for products of `r` coordinates.

use super::certificate::{Construction, ConstructionCertificate, Domain, Provenance};
use crate::calculus::{compose, compose_zero, parallelize, remap_inputs, selector};
use crate::error::{Error, Result};
use crate::network::{LayerBuilder, SparseNetwork};

/// Largest accepted accuracy parameter. Beyond it the error bound is far
/// below double precision.
pub const MAX_M: u32 = 60;

pub(crate) fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::Precondition(format!(
            "m = {m} but the multiplication networks need m >= 1"
        )));
    }
    if m > MAX_M {
        return Err(Error::Precondition(format!(
            "m = {m} exceeds {MAX_M}; the error bound 2^-m is already below double precision"
        )));
    }
    Ok(())
}

/// `ceil(log2(r))` for `r >= 1`.
pub fn ceil_log2(r: usize) -> u32 {
    r.max(1).next_power_of_two().trailing_zeros()
}

/// The pairwise multiplication network with `m + 4` hidden layers.
///
/// The first layer evaluates the two arguments `(x - y + 1)/2` and
/// `(x + y)/2` of the polarization identity through `T_+`, `T_-^1` and a
/// carried term. Each of the next `m` layers advances both triangle waves by
/// one tooth and accumulates the previous wave. The final two layers clip
/// the difference of the branches to `[0, 1]`.
pub fn mult_net(m: u32) -> Result<SparseNetwork> {
    check_m(m)?;
    let mut layers = Vec::with_capacity(m as usize + 5);

    let mut first = LayerBuilder::hidden(6, 2);
    first.set(0, 0, 0.25).set(0, 1, -0.25).set_shift(0, -0.25);
    first.set(1, 0, 0.5).set(1, 1, -0.5);
    first.set(2, 0, 0.5).set(2, 1, 0.5);
    first.set(3, 0, 0.25).set(3, 1, 0.25);
    first.set(4, 0, 0.5).set(4, 1, 0.5).set_shift(4, 0.5);
    first.set_shift(5, -0.25);
    layers.push(first.build());

    for k in 1..=m {
        let knot = 2f64.powi(-2 * k as i32 - 1);
        let mut b = LayerBuilder::hidden(6, 6);
        for off in [0, 3] {
            let (a, t, c) = (off, off + 1, off + 2);
            b.set(a, a, 0.5).set(a, t, -0.5);
            b.set(t, a, 1.0).set(t, t, -1.0).set_shift(t, knot);
            b.set(c, a, 1.0).set(c, t, -1.0).set(c, c, 1.0);
        }
        layers.push(b.build());
    }

    let mut uv = LayerBuilder::hidden(2, 6);
    for (row, off) in [(0, 0), (1, 3)] {
        uv.set(row, off, 1.0).set(row, off + 1, -1.0).set(row, off + 2, 1.0);
    }
    layers.push(uv.build());

    let mut diff = LayerBuilder::output(1, 2);
    diff.set(0, 0, 1.0).set(0, 1, -1.0);
    layers.push(diff.build());

    let mut widths = vec![2];
    widths.extend(std::iter::repeat_n(6, m as usize + 1));
    widths.extend([2, 1]);
    SparseNetwork::new(widths, layers, None)?.clip_unit()
}

/// `Mult_m` with its certificate.
pub fn build_mult(m: u32) -> Result<(SparseNetwork, ConstructionCertificate)> {
    let net = mult_net(m)?;
    let depth = m as usize + 4;
    // parameter count of the full architecture (2, 6, ..., 6, 1)
    let mut arch = vec![2];
    arch.extend(std::iter::repeat_n(6, depth));
    arch.push(1);
    let cert = ConstructionCertificate {
        statement_id: "mult.pairwise".into(),
        depth,
        width_bound: 6,
        sparsity_bound: crate::network::capacity(&arch),
        sup_error_bound: 2f64.powi(-(m as i32)),
        measured_grid_error: None,
        grid_spec: None,
        domain: Domain::unit_cube(2),
        derivative_provenance: Provenance::NotApplicable,
        construction: Construction::Mult { m },
        output_layout: None,
    };
    Ok((net, cert))
}

/// Product tree over the coordinates `picks` of an input of width
/// `input_dim`. `None` stands for the constant 1. The picks are padded with
/// ones to a power of two `2^q`; the result has depth `(m + 5) q`.
pub fn mult_tree(m: u32, input_dim: usize, picks: &[Option<usize>]) -> Result<SparseNetwork> {
    check_m(m)?;
    if picks.is_empty() {
        return Err(Error::arg("picks", "at least one factor is required"));
    }
    if picks.len() == 1 {
        return match picks[0] {
            Some(_) => selector(input_dim, picks),
            None => Err(Error::arg("picks", "a single constant factor has no network")),
        };
    }
    let q = ceil_log2(picks.len());
    let mut padded = picks.to_vec();
    padded.resize(1 << q, None);

    let pair = mult_net(m)?;
    let mut tree: Option<SparseNetwork> = None;
    for level in 1..=q {
        let width = 1usize << (q - level + 1);
        let nets = (0..width / 2)
            .map(|i| remap_inputs(&pair, width, &[2 * i, 2 * i + 1]))
            .collect::<Result<Vec<_>>>()?;
        let stage = parallelize(&nets)?;
        tree = Some(match tree {
            None => stage,
            Some(prev) => compose_zero(&stage, &prev)?,
        });
    }
    let tree = tree.expect("q >= 1");
    let shifts: Vec<f64> = padded.iter().map(|p| if p.is_some() { 0.0 } else { -1.0 }).collect();
    compose(&tree, &selector(input_dim, &padded)?, &shifts)
}

/// `Mult_m^r` with its certificate. For `r = 1` this is the identity.
pub fn build_mult_r(m: u32, r: usize) -> Result<(SparseNetwork, ConstructionCertificate)> {
    check_m(m)?;
    if r < 1 {
        return Err(Error::Precondition("r must be at least 1".into()));
    }
    let picks: Vec<Option<usize>> = (0..r).map(Some).collect();
    let net = mult_tree(m, r, &picks)?;
    let depth = (m as usize + 5) * ceil_log2(r) as usize;
    let cert = ConstructionCertificate {
        statement_id: "mult.tree".into(),
        depth,
        width_bound: 6 * r,
        sparsity_bound: 42 * r * r * (1 + depth),
        sup_error_bound: (r * r) as f64 * 2f64.powi(-(m as i32)),
        measured_grid_error: None,
        grid_spec: None,
        domain: Domain::unit_cube(r),
        derivative_provenance: Provenance::NotApplicable,
        construction: Construction::MultTree { m, r },
        output_layout: None,
    };
    Ok((net, cert))
}
