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

//! The network `Hat^r` returning, for every point of the grid
//! `D(M) = {0, 1/M, ..., 1}^r`, an approximation of the product of hat
//! functions `prod_j (1/M - |x_j - l_j/M|)_+`.

use super::certificate::{Construction, ConstructionCertificate, Domain, Provenance};
use super::mult::{ceil_log2, check_m, mult_tree};
use crate::calculus::{compose, parallelize, remap_inputs};
use crate::error::{Error, Result};
use crate::network::{LayerBuilder, SparseNetwork};

/// Largest grid `(M+1)^r` a hat network may cover.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Points of `D(M)` as integer multi-indices `l`, last coordinate fastest.
pub fn grid_indices(big_m: usize, r: usize) -> Vec<Vec<usize>> {
    let side = big_m + 1;
    let total = side.pow(r as u32);
    (0..total)
        .map(|mut code| {
            let mut l = vec![0; r];
            for slot in l.iter_mut().rev() {
                *slot = code % side;
                code /= side;
            }
            l
        })
        .collect()
}

/// `prod_j (1/M - |x_j - l_j/M|)_+`.
pub fn hat_product(big_m: usize, l: &[usize], x: &[f64]) -> f64 {
    let h = 1.0 / big_m as f64;
    l.iter()
        .zip(x)
        .map(|(&lj, &xj)| (h - (xj - lj as f64 / big_m as f64).abs()).max(0.0))
        .product()
}

/// `(M+1)^r`, or `None` on overflow.
pub fn grid_size(big_m: usize, r: usize) -> Option<usize> {
    (big_m + 1).checked_pow(r as u32)
}

pub(crate) fn check_grid(big_m: usize, r: usize) -> Result<usize> {
    match grid_size(big_m, r) {
        Some(n) if n <= MAX_GRID_POINTS => Ok(n),
        _ => Err(Error::Precondition(format!(
            "the grid D(M) with M = {big_m}, r = {r} has (M+1)^r > {MAX_GRID_POINTS} points; \
             one product network per point would not fit in memory"
        ))),
    }
}

/// Two-layer part: hidden units `(x_j - l/M)_+`, `(l/M - x_j)_+`, output
/// `-(sum of the pair)` per `(j, l)`, at row `j (M+1) + l`.
fn hat_base(big_m: usize, r: usize) -> Result<SparseNetwork> {
    let side = big_m + 1;
    let mut hidden = LayerBuilder::hidden(2 * r * side, r);
    let mut out = LayerBuilder::output(r * side, 2 * r * side);
    for j in 0..r {
        for l in 0..side {
            let row = j * side + l;
            let knot = l as f64 / big_m as f64;
            hidden.set(2 * row, j, 1.0).set_shift(2 * row, knot);
            hidden.set(2 * row + 1, j, -1.0).set_shift(2 * row + 1, -knot);
            out.set(row, 2 * row, -1.0).set(row, 2 * row + 1, -1.0);
        }
    }
    SparseNetwork::new(vec![r, 2 * r * side, r * side], vec![hidden.build(), out.build()], None)
}

/// Depth `2 + (m + 5) ceil(log2 r)`.
pub fn hat_depth(m: u32, r: usize) -> usize {
    2 + (m as usize + 5) * ceil_log2(r) as usize
}

/// The hat network alone, outputs ordered as [`grid_indices`].
pub fn hat_net(big_m: usize, m: u32, r: usize) -> Result<SparseNetwork> {
    check_m(m)?;
    if big_m < 1 || r < 1 {
        return Err(Error::Precondition(format!(
            "M = {big_m} and r = {r} must both be at least 1"
        )));
    }
    check_grid(big_m, r)?;
    let side = big_m + 1;
    let base = hat_base(big_m, r)?;
    let shift = vec![-1.0 / big_m as f64; r * side];
    let products = if r == 1 {
        SparseNetwork::identity(side)
    } else {
        let picks: Vec<Option<usize>> = (0..r).map(Some).collect();
        let tree = mult_tree(m, r, &picks)?;
        let nets = grid_indices(big_m, r)
            .iter()
            .map(|l| {
                let sources: Vec<usize> = l.iter().enumerate().map(|(j, &lj)| j * side + lj).collect();
                remap_inputs(&tree, r * side, &sources)
            })
            .collect::<Result<Vec<_>>>()?;
        parallelize(&nets)?
    };
    compose(&products, &base, &shift)
}

/// `Hat^r` with its certificate.
pub fn build_hat(big_m: usize, m: u32, r: usize) -> Result<(SparseNetwork, ConstructionCertificate)> {
    let net = hat_net(big_m, m, r)?;
    let points = grid_size(big_m, r).expect("checked");
    let depth = hat_depth(m, r);
    let cert = ConstructionCertificate {
        statement_id: "hat.products".into(),
        depth,
        width_bound: 6 * r * points,
        sparsity_bound: 49 * r * r * points * (1 + (m as usize + 5) * ceil_log2(r) as usize),
        sup_error_bound: (r * r) as f64 * 2f64.powi(-(m as i32)),
        measured_grid_error: None,
        grid_spec: None,
        domain: Domain::unit_cube(r),
        derivative_provenance: Provenance::NotApplicable,
        construction: Construction::Hat { big_m, m, r },
        output_layout: Some(grid_indices(big_m, r)),
    };
    Ok((net, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::certificate::check_claims;
    use crate::constructions::grid::GridSpec;

    #[test]
    fn grid_order() {
        assert_eq!(grid_indices(1, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn one_dimensional_hat_is_exact() {
        let (net, cert) = build_hat(4, 8, 1).unwrap();
        assert_eq!(net.depth(), 2);
        assert_eq!(net.evaluate(&[0.5]).unwrap()[2], 0.25);
        assert!(check_claims(&net, &cert, None).iter().all(|c| c.holds));
        for i in 0..=64 {
            let x = i as f64 / 64.0;
            let out = net.evaluate(&[x]).unwrap();
            for (l, v) in out.iter().enumerate() {
                assert!((v - hat_product(4, &[l], &[x])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn two_dimensional_error_and_support() {
        let (net, mut cert) = build_hat(2, 8, 2).unwrap();
        assert_eq!(net.depth(), 2 + 13);
        assert!(check_claims(&net, &cert, None).iter().all(|c| c.holds));
        let layout = cert.output_layout.clone().unwrap();
        let grid = GridSpec::Tensor {
            dim: 2,
            points_per_axis: 41,
        };
        let err = cert
            .measure(&net, grid.clone(), |x| {
                layout.iter().map(|l| hat_product(2, l, x)).collect()
            })
            .unwrap();
        assert!(err <= cert.sup_error_bound);
        for x in grid.points() {
            let out = net.evaluate(&x).unwrap();
            for (l, v) in layout.iter().zip(&out) {
                if hat_product(2, l, &x) == 0.0 {
                    assert_eq!(*v, 0.0, "l={l:?} x={x:?}");
                }
            }
        }
    }

    #[test]
    fn refuses_huge_grid() {
        let err = build_hat(1000, 4, 2).unwrap_err();
        assert!(err.is_precondition());
    }
}
