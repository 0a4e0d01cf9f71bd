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

//! Network approximation of a single Hölder function by hat-weighted local
//! Taylor polynomials.
//!
//! With `M` the largest integer such that `(M+1)^r <= N` and
//! `B = ceil(2 K e^r)`:
//!
//! 1. `Q1` feeds the monomial network into one linear layer returning
//!    `P_{x_l} f(x) / B + 1/2` for every grid point `x_l`;
//! 2. `Hat^r` runs in parallel and returns the hat products;
//! 3. each pair is multiplied by `Mult_m` and the products are summed (`Q2`);
//! 4. the scaling network `a -> B M^r (a - 1/(2 M^r))` undoes the affine
//!    map, using the partition of unity.

use super::certificate::{Construction, ConstructionCertificate, Domain};
use super::hat::{check_grid, hat_net};
use super::monomials::build_mon;
use super::mult::{ceil_log2, check_m, mult_net};
use super::taylor::{HolderTarget, LocalTaylor};
use crate::calculus::{compose_zero, parallelize, remap_inputs, sync_depth, Placement};
use crate::error::{Error, Result};
use crate::network::{LayerBuilder, SparseNetwork};

/// `ceil(log2(x))` for real `x >= 1`.
fn ceil_log2_real(x: f64) -> u32 {
    ceil_log2(x.max(1.0).ceil() as usize)
}

/// `L* = (m + 5) ceil(log2(max(beta, r)))`.
pub fn inner_depth(m: u32, r: usize, beta: f64) -> usize {
    (m as usize + 5) * ceil_log2_real(beta.max(r as f64)) as usize
}

/// `8 + (m + 5)(1 + ceil(log2(max(r, beta))))`.
pub fn holder_depth(m: u32, r: usize, beta: f64) -> usize {
    8 + (m as usize + 5) + inner_depth(m, r, beta)
}

/// `6 (r + ceil(beta)) N`.
pub fn holder_width_bound(r: usize, beta: f64, n: usize) -> usize {
    6 * (r + beta.ceil() as usize) * n
}

/// `141 (r + beta + 1)^{3+r} N (m + 6)`, rounded down.
pub fn holder_sparsity_bound(m: u32, r: usize, beta: f64, n: usize) -> usize {
    let v = 141.0 * (r as f64 + beta + 1.0).powi(3 + r as i32) * n as f64 * (m as f64 + 6.0);
    v.floor() as usize
}

/// `(2K + 1)(1 + r^2 + beta^2) 6^r N 2^{-m} + K 3^beta N^{-beta/r}`.
pub fn holder_error_bound(m: u32, r: usize, beta: f64, radius: f64, n: usize) -> f64 {
    let n = n as f64;
    let r_f = r as f64;
    (2.0 * radius + 1.0) * (1.0 + r_f * r_f + beta * beta) * 6f64.powi(r as i32) * n * 2f64.powi(-(m as i32))
        + radius * 3f64.powf(beta) * n.powf(-beta / r_f)
}

/// Smallest admissible `N`: `(beta + 1)^r` and `(K + 1) e^r`, whichever is larger.
pub fn min_n(r: usize, beta: f64, radius: f64) -> f64 {
    (beta + 1.0)
        .powi(r as i32)
        .max((radius + 1.0) * std::f64::consts::E.powi(r as i32))
}

/// Largest `M` with `(M + 1)^r <= N`.
pub fn grid_resolution(n: usize, r: usize) -> usize {
    let mut big_m = 0usize;
    while (big_m + 2).checked_pow(r as u32).is_some_and(|p| p <= n) {
        big_m += 1;
    }
    big_m
}

/// `a -> B M^r (a - c)` with `c = 1/(2 M^r)`, depth 4, unit weights only.
fn scaling_net(b: usize, m_pow: usize) -> Result<SparseNetwork> {
    let c = 1.0 / (2.0 * m_pow as f64);
    let mut l0 = LayerBuilder::hidden(2, 1);
    l0.set(0, 0, 1.0).set_shift(0, c);
    l0.set(1, 0, -1.0).set_shift(1, -c);
    let mut l1 = LayerBuilder::hidden(2 * m_pow, 2);
    let mut l2 = LayerBuilder::hidden(2, 2 * m_pow);
    for branch in 0..2 {
        for i in 0..m_pow {
            l1.set(branch * m_pow + i, branch, 1.0);
            l2.set(branch, branch * m_pow + i, 1.0);
        }
    }
    let mut l3 = LayerBuilder::hidden(2 * b, 2);
    let mut out = LayerBuilder::output(1, 2 * b);
    for branch in 0..2 {
        let sign = if branch == 0 { 1.0 } else { -1.0 };
        for i in 0..b {
            l3.set(branch * b + i, branch, 1.0);
            out.set(0, branch * b + i, sign);
        }
    }
    SparseNetwork::new(
        vec![1, 2, 2 * m_pow, 2, 2 * b, 1],
        vec![l0.build(), l1.build(), l2.build(), l3.build(), out.build()],
        None,
    )
}

/// Network approximation of `target` with accuracy parameter `m` and size
/// parameter `N`.
pub fn build_holder_net(target: &HolderTarget, m: u32, n: usize) -> Result<(SparseNetwork, ConstructionCertificate)> {
    check_m(m)?;
    let (r, beta, radius) = (target.r, target.beta, target.radius);
    let need = min_n(r, beta, radius);
    if (n as f64) < need {
        return Err(Error::Precondition(format!(
            "N = {n} is too small: the construction needs N >= (beta+1)^r v (K+1)e^r = {need:.4} \
             for r = {r}, beta = {beta}, K = {radius}"
        )));
    }
    let big_m = grid_resolution(n, r);
    let points = check_grid(big_m, r)?;
    let m_pow = big_m.pow(r as u32);
    let b = (2.0 * radius * std::f64::consts::E.powi(r as i32)).ceil() as usize;
    let l_star = inner_depth(m, r, beta);

    let local = LocalTaylor::new(target, big_m)?;
    let (mon, mon_cert) = build_mon(m, beta, r)?;
    let mon = sync_depth(&mon, 1 + l_star - mon.depth(), Placement::Output)?;
    let count = mon_cert.output_layout.as_ref().map_or(0, Vec::len);

    let mut taylor = LayerBuilder::output(points, count);
    for flat in 0..points {
        let poly = local.coefficients(flat);
        let mass = poly.abs_sum() / b as f64;
        if mass > 0.5 {
            return Err(Error::Precondition(format!(
                "Taylor coefficients at grid point {flat} sum to {:.6} in absolute value, more than \
                 K e^r = {:.6}; the declared radius K = {radius} is too small for this target",
                poly.abs_sum(),
                radius * std::f64::consts::E.powi(r as i32)
            )));
        }
        for (k, c) in poly.coeffs.iter().enumerate() {
            // index 0 is the constant monomial, which carries the offset 1/2
            let w = c / b as f64 + if k == 0 { 0.5 } else { 0.0 };
            taylor.set(flat, k, w);
        }
    }
    let q1 = compose_zero(&SparseNetwork::linear(taylor.build())?, &mon)?;

    let hat = hat_net(big_m, m, r)?;
    let hat = sync_depth(&hat, 2 + l_star - hat.depth(), Placement::Input)?;
    let joint = parallelize(&[q1, hat])?;

    let pair = mult_net(m)?;
    let products = (0..points)
        .map(|l| remap_inputs(&pair, 2 * points, &[l, points + l]))
        .collect::<Result<Vec<_>>>()?;
    let products = compose_zero(&parallelize(&products)?, &joint)?;
    let mut sum = LayerBuilder::output(1, points);
    for l in 0..points {
        sum.set(0, l, 1.0);
    }
    let q2 = compose_zero(&SparseNetwork::linear(sum.build())?, &products)?;
    let q3 = compose_zero(&scaling_net(b, m_pow)?, &q2)?;

    let cert = ConstructionCertificate {
        statement_id: "holder.local_taylor".into(),
        depth: holder_depth(m, r, beta),
        width_bound: holder_width_bound(r, beta, n),
        sparsity_bound: holder_sparsity_bound(m, r, beta, n),
        sup_error_bound: holder_error_bound(m, r, beta, radius, n),
        measured_grid_error: None,
        grid_spec: None,
        domain: Domain::unit_cube(r),
        derivative_provenance: target.provenance(),
        construction: Construction::Holder {
            m,
            n,
            beta,
            radius,
            target: target.spec.clone(),
        },
        output_layout: None,
    };
    Ok((q3, cert))
}

/// Multiplies the output layer by `min(1, bound / sup)` where `sup` is the
/// largest output magnitude over `grid`, so the grid sup is at most `bound`.
pub fn rescale_to_bound(net: &SparseNetwork, bound: f64, grid: &super::grid::GridSpec) -> Result<SparseNetwork> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::arg("bound", format!("{bound} must be positive and finite")));
    }
    let sup = super::grid::evaluate_grid(net, grid)?
        .iter()
        .flatten()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let factor = if sup > bound { bound / sup } else { 1.0 };
    let (widths, mut layers, _) = net.clone().into_parts();
    let last = layers.pop().expect("at least one layer");
    let mut out = LayerBuilder::output(last.rows(), last.cols());
    for e in last.entries() {
        out.set(e.row, e.col, e.value * factor);
    }
    layers.push(out.build());
    SparseNetwork::new(widths, layers, Some(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::certificate::{check_claims, Provenance};
    use crate::constructions::grid::GridSpec;
    use crate::targets::{PolyTerm, TargetFn, TargetSpec};

    fn parabola() -> HolderTarget {
        let spec = TargetSpec::Polynomial {
            r: 1,
            terms: vec![
                PolyTerm {
                    coeff: 1.0,
                    powers: vec![1],
                },
                PolyTerm {
                    coeff: -1.0,
                    powers: vec![2],
                },
            ],
        };
        HolderTarget::from_spec(&spec, 2.0, 1.0).unwrap()
    }

    #[test]
    fn resolution_from_n() {
        assert_eq!(grid_resolution(8, 1), 7);
        assert_eq!(grid_resolution(15, 2), 2);
        assert_eq!(grid_resolution(16, 2), 3);
        assert_eq!(grid_resolution(27, 3), 2);
    }

    #[test]
    fn scaling_network_is_affine() {
        let net = scaling_net(6, 4).unwrap();
        assert_eq!(net.depth(), 4);
        for a in [0.0, 0.125, 0.3, 1.0] {
            let want = 6.0 * 4.0 * (a - 0.125);
            assert!((net.evaluate(&[a]).unwrap()[0] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn depth_closed_form() {
        for (r, beta, m, n) in [(1usize, 1.0, 6u32, 8usize), (2, 2.0, 8, 15), (1, 2.5, 8, 13)] {
            let spec = TargetSpec::Constant { r, value: 0.25 };
            let t = HolderTarget::from_spec(&spec, beta, 1.0).unwrap();
            let (net, cert) = build_holder_net(&t, m, n).unwrap();
            let want = 8 + (m as usize + 5) * (1 + ceil_log2_real((r as f64).max(beta)) as usize);
            assert_eq!(net.depth(), want, "r={r} beta={beta}");
            assert!(check_claims(&net, &cert, None).iter().all(|c| c.holds));
        }
    }

    #[test]
    fn parabola_within_certificate() {
        for n in [8, 16] {
            let t = parabola();
            let (net, mut cert) = build_holder_net(&t, 10, n).unwrap();
            let grid = GridSpec::Tensor {
                dim: 1,
                points_per_axis: 1025,
            };
            let err = cert.measure(&net, grid, |x| vec![t.value(x)]).unwrap();
            assert!(
                err <= cert.sup_error_bound,
                "N={n} err={err} bound={}",
                cert.sup_error_bound
            );
            assert!(check_claims(&net, &cert, Some(err)).iter().all(|c| c.holds));
            assert_eq!(cert.derivative_provenance, Provenance::Exact);
        }
    }

    #[test]
    fn zero_function() {
        let t = HolderTarget::from_spec(&TargetSpec::Constant { r: 1, value: 0.0 }, 2.0, 1.0).unwrap();
        let (net, cert) = build_holder_net(&t, 8, 8).unwrap();
        for i in 0..=64 {
            let v = net.evaluate(&[i as f64 / 64.0]).unwrap()[0];
            assert!(v.abs() <= cert.sup_error_bound);
        }
    }

    #[test]
    fn refuses_small_n() {
        let err = build_holder_net(&parabola(), 8, 4).unwrap_err();
        assert!(err.is_precondition());
        assert!(err.to_string().contains("N >= (beta+1)^r v (K+1)e^r"));
    }

    #[test]
    fn refuses_understated_radius() {
        let f = TargetFn::new(|x| 5.0 * x[0]);
        let t = HolderTarget::new(1, 2.0, 0.5, f).unwrap();
        let err = build_holder_net(&t, 6, 8).unwrap_err();
        assert!(err.is_precondition(), "{err}");
    }

    #[test]
    fn finite_difference_provenance_is_recorded() {
        let f = TargetFn::new(|x: &[f64]| x[0] * (1.0 - x[0]));
        let t = HolderTarget::new(1, 2.0, 1.0, f).unwrap();
        let (_, cert) = build_holder_net(&t, 8, 8).unwrap();
        assert_eq!(cert.derivative_provenance, Provenance::FiniteDifference);
    }

    #[test]
    fn rescale_caps_grid_sup() {
        let t = HolderTarget::from_spec(&TargetSpec::Constant { r: 1, value: 0.9 }, 1.0, 1.0).unwrap();
        let (net, _) = build_holder_net(&t, 8, 8).unwrap();
        let grid = GridSpec::Tensor {
            dim: 1,
            points_per_axis: 33,
        };
        let capped = rescale_to_bound(&net, 0.5, &grid).unwrap();
        for x in grid.points() {
            assert!(capped.evaluate(&x).unwrap()[0].abs() <= 0.5 + 1e-12);
        }
    }
}
