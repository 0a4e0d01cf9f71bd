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

//! Taylor data of Hölder targets: partial derivatives (exact or by central
//! differences), the monomial coefficients of a local Taylor polynomial, and
//! the reference evaluator of the hat-weighted local Taylor approximation.

use super::certificate::Provenance;
use super::hat::{check_grid, grid_indices};
use super::monomials::{monomial, multi_indices};
use crate::error::{Error, Result};
use crate::targets::{TargetFn, TargetSpec};

/// A function on `[0, 1]^r` declared to lie in the Hölder ball of
/// smoothness `beta` and radius `radius`.
#[derive(Debug, Clone)]
pub struct HolderTarget {
    pub r: usize,
    pub beta: f64,
    pub radius: f64,
    pub f: TargetFn,
    /// Serializable description, when the target came from one.
    pub spec: Option<TargetSpec>,
}

impl HolderTarget {
    pub fn new(r: usize, beta: f64, radius: f64, f: TargetFn) -> Result<Self> {
        if r < 1 {
            return Err(Error::arg("r", "dimension must be positive"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::arg("beta", format!("{beta} must be positive and finite")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::arg("radius", format!("{radius} must be positive and finite")));
        }
        Ok(HolderTarget {
            r,
            beta,
            radius,
            f,
            spec: None,
        })
    }

    pub fn from_spec(spec: &TargetSpec, beta: f64, radius: f64) -> Result<Self> {
        let mut t = Self::new(spec.dim(), beta, radius, spec.to_fn()?)?;
        t.spec = Some(spec.clone());
        Ok(t)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.f.value(x)
    }

    /// Where partial derivatives of order at least one come from.
    pub fn provenance(&self) -> Provenance {
        if self.beta <= 1.0 {
            Provenance::NotApplicable
        } else if self.f.has_partials() {
            Provenance::Exact
        } else {
            Provenance::FiniteDifference
        }
    }

    /// `d^alpha f(x)`, exact when an oracle was supplied and by central
    /// differences otherwise.
    pub fn partial(&self, alpha: &[usize], x: &[f64]) -> Result<f64> {
        if alpha.iter().all(|&a| a == 0) {
            return Ok(self.f.value(x));
        }
        let v = match self.f.exact_partial(alpha, x) {
            Some(res) => res.map_err(|e| Error::Derivative {
                multi_index: alpha.to_vec(),
                detail: e.to_string(),
            })?,
            None => finite_difference(&self.f, alpha, x),
        };
        if !v.is_finite() {
            return Err(Error::Derivative {
                multi_index: alpha.to_vec(),
                detail: format!("non-finite value at {x:?}"),
            });
        }
        Ok(v)
    }
}

/// Step used for a finite-difference partial of total order `order`.
/// First derivatives use `1e-5`; higher orders use `eps^{1/(order+2)}`,
/// which balances truncation against cancellation.
pub fn fd_step(order: usize) -> f64 {
    if order <= 1 {
        1e-5
    } else {
        f64::EPSILON.powf(1.0 / (order as f64 + 2.0))
    }
}

/// Central-difference tensor stencil for `d^alpha f(x)`. Evaluates `f`
/// within `order * h / 2` of `x`, possibly just outside the unit cube.
pub fn finite_difference(f: &TargetFn, alpha: &[usize], x: &[f64]) -> f64 {
    let h = fd_step(alpha.iter().sum());
    let mut point = x.to_vec();
    let mut rest = alpha.to_vec();
    fd_rec(f, &mut rest, &mut point, h)
}

fn fd_rec(f: &TargetFn, alpha: &mut [usize], x: &mut [f64], h: f64) -> f64 {
    let Some(j) = alpha.iter().position(|&a| a > 0) else {
        return f.value(x);
    };
    let k = alpha[j];
    alpha[j] = 0;
    let center = x[j];
    let mut total = 0.0;
    let mut binom = 1.0;
    for i in 0..=k {
        x[j] = center + (k as f64 / 2.0 - i as f64) * h;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom * fd_rec(f, alpha, x, h);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    x[j] = center;
    alpha[j] = k;
    total / h.powi(k as i32)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

/// All partials `d^alpha f(a)` for `|alpha| < beta`, ordered as
/// [`multi_indices`].
pub fn derivatives_at(target: &HolderTarget, a: &[f64]) -> Result<Vec<f64>> {
    multi_indices(target.r, target.beta)
        .iter()
        .map(|alpha| target.partial(alpha, a))
        .collect()
}

/// Coefficients `c_gamma` of the Taylor polynomial at `a` written in plain
/// monomials: `P_a f(x) = sum_gamma c_gamma x^gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPoly {
    pub indices: Vec<Vec<usize>>,
    pub coeffs: Vec<f64>,
}

impl TaylorPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(g, c)| c * monomial(g, x))
            .sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

/// `c_gamma = sum_{alpha >= gamma, |alpha| < beta} d^alpha f(a) (-a)^{alpha - gamma} / (gamma! (alpha - gamma)!)`.
pub fn taylor_poly(target: &HolderTarget, a: &[f64]) -> Result<TaylorPoly> {
    if a.len() != target.r {
        return Err(Error::shape(
            "a",
            format!("expected {} coordinates, got {}", target.r, a.len()),
        ));
    }
    let derivs = derivatives_at(target, a)?;
    Ok(expand(target.r, target.beta, &derivs, a))
}

pub(crate) fn expand(r: usize, beta: f64, derivs: &[f64], a: &[f64]) -> TaylorPoly {
    let indices = multi_indices(r, beta);
    let neg_a: Vec<f64> = a.iter().map(|v| -v).collect();
    let coeffs = indices
        .iter()
        .map(|gamma| {
            indices
                .iter()
                .zip(derivs)
                .filter(|(alpha, _)| alpha.iter().zip(gamma).all(|(x, g)| x >= g))
                .map(|(alpha, d)| {
                    let diff: Vec<usize> = alpha.iter().zip(gamma).map(|(x, g)| x - g).collect();
                    d * monomial(&diff, &neg_a) / (multi_factorial(gamma) * multi_factorial(&diff))
                })
                .sum()
        })
        .collect();
    TaylorPoly { indices, coeffs }
}

/// `P_a f(x) = sum_{|alpha| < beta} d^alpha f(a) (x - a)^alpha / alpha!`
/// from precomputed partials.
pub fn taylor_at(indices: &[Vec<usize>], derivs: &[f64], a: &[f64], x: &[f64]) -> f64 {
    let shifted: Vec<f64> = x.iter().zip(a).map(|(x, a)| x - a).collect();
    indices
        .iter()
        .zip(derivs)
        .map(|(alpha, d)| d * monomial(alpha, &shifted) / multi_factorial(alpha))
        .sum()
}

/// Hat-weighted local Taylor approximation
/// `P f(x) = sum_l P_{x_l} f(x) prod_j (1 - M |x_j - l_j/M|)_+` over
/// the grid `D(M)`, with partials cached at every grid point.
#[derive(Debug, Clone)]
pub struct LocalTaylor {
    big_m: usize,
    r: usize,
    beta: f64,
    indices: Vec<Vec<usize>>,
    /// Partials at grid point `l`, flattened with the last coordinate fastest.
    derivs: Vec<Vec<f64>>,
}

impl LocalTaylor {
    pub fn new(target: &HolderTarget, big_m: usize) -> Result<Self> {
        if big_m < 1 {
            return Err(Error::Precondition("M must be at least 1".into()));
        }
        check_grid(big_m, target.r)?;
        let derivs = grid_indices(big_m, target.r)
            .iter()
            .map(|l| {
                let a: Vec<f64> = l.iter().map(|&v| v as f64 / big_m as f64).collect();
                derivatives_at(target, &a)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalTaylor {
            big_m,
            r: target.r,
            beta: target.beta,
            indices: multi_indices(target.r, target.beta),
            derivs,
        })
    }

    /// Evaluates using only the at most `2^r` grid points with non-zero weight.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let m = self.big_m as f64;
        let side = self.big_m + 1;
        let lows: Vec<usize> = x
            .iter()
            .map(|&v| ((v * m).floor().max(0.0) as usize).min(self.big_m))
            .collect();
        let mut total = 0.0;
        for corner in 0..(1usize << self.r) {
            let mut flat = 0;
            let mut weight = 1.0;
            let mut a = vec![0.0; self.r];
            for j in 0..self.r {
                let l = lows[j] + ((corner >> j) & 1);
                if l > self.big_m {
                    weight = 0.0;
                    break;
                }
                a[j] = l as f64 / m;
                weight *= (1.0 - m * (x[j] - a[j]).abs()).max(0.0);
                flat = flat * side + l;
            }
            if weight > 0.0 {
                total += weight * taylor_at(&self.indices, &self.derivs[flat], &a, x);
            }
        }
        total
    }

    /// Monomial coefficients at grid point `flat` (ordered as [`grid_indices`]).
    pub fn coefficients(&self, flat: usize) -> TaylorPoly {
        let mut rest = flat;
        let mut a = vec![0.0; self.r];
        for slot in a.iter_mut().rev() {
            *slot = (rest % (self.big_m + 1)) as f64 / self.big_m as f64;
            rest /= self.big_m + 1;
        }
        expand(self.r, self.beta, &self.derivs[flat], &a)
    }

    pub fn grid_len(&self) -> usize {
        self.derivs.len()
    }
}

/// `P f(x)` for a single point, rebuilding the cache each call.
pub fn local_taylor_ref(target: &HolderTarget, big_m: usize, x: &[f64]) -> Result<f64> {
    Ok(LocalTaylor::new(target, big_m)?.eval(x))
}

/// `sum_{l in D(M)} prod_j (1 - M |x_j - l_j/M|)_+` over every grid point.
pub fn hat_weight_sum(big_m: usize, x: &[f64]) -> f64 {
    let m = big_m as f64;
    grid_indices(big_m, x.len())
        .iter()
        .map(|l| {
            l.iter()
                .zip(x)
                .map(|(&lj, &xj)| (1.0 - m * (xj - lj as f64 / m).abs()).max(0.0))
                .product::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{PolyTerm, SinTerm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parabola() -> HolderTarget {
        // x (1 - x)
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
    fn square_is_its_own_expansion() {
        let spec = TargetSpec::Polynomial {
            r: 1,
            terms: vec![PolyTerm {
                coeff: 1.0,
                powers: vec![2],
            }],
        };
        let t = HolderTarget::from_spec(&spec, 3.0, 3.0).unwrap();
        let p = taylor_poly(&t, &[0.5]).unwrap();
        assert_eq!(p.indices, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(p.coeffs, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_has_single_coefficient() {
        let t = HolderTarget::from_spec(&TargetSpec::Constant { r: 2, value: 0.7 }, 0.5, 1.0).unwrap();
        let p = taylor_poly(&t, &[0.3, 0.9]).unwrap();
        assert_eq!(p.coeffs, vec![0.7]);
    }

    #[test]
    fn sine_residual_within_holder_bound() {
        // sin(pi x): f' is pi^2-Lipschitz, so K = pi^2 covers |f - P_0 f| <= K |x|^2
        let spec = TargetSpec::SinSum {
            r: 1,
            terms: vec![SinTerm {
                amp: 1.0,
                freq: vec![std::f64::consts::PI],
                phase: 0.0,
            }],
        };
        let k = std::f64::consts::PI.powi(2);
        let t = HolderTarget::from_spec(&spec, 2.0, k).unwrap();
        let p = taylor_poly(&t, &[0.0]).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!((t.value(&[x]) - p.eval(&[x])).abs() <= k * x.powf(2.0) + 1e-15);
        }
    }

    #[test]
    fn coefficient_bounds() {
        let t = parabola();
        for i in 0..=10 {
            let p = taylor_poly(&t, &[i as f64 / 10.0]).unwrap();
            assert!(p.abs_sum() <= t.radius * std::f64::consts::E);
        }
    }

    #[test]
    fn finite_differences_track_exact_partials() {
        let spec = TargetSpec::SinSum {
            r: 2,
            terms: vec![SinTerm {
                amp: 0.5,
                freq: vec![1.3, -0.7],
                phase: 0.2,
            }],
        };
        let exact = HolderTarget::from_spec(&spec, 3.5, 1.0).unwrap();
        let s = spec.clone();
        let fd = HolderTarget::new(2, 3.5, 1.0, TargetFn::new(move |x| s.eval(x))).unwrap();
        assert_eq!(fd.provenance(), Provenance::FiniteDifference);
        assert_eq!(exact.provenance(), Provenance::Exact);
        for alpha in multi_indices(2, 3.5) {
            let e = exact.partial(&alpha, &[0.4, 0.6]).unwrap();
            let a = fd.partial(&alpha, &[0.4, 0.6]).unwrap();
            assert!((e - a).abs() < 1e-4, "alpha={alpha:?} exact={e} fd={a}");
        }
    }

    #[test]
    fn derivative_failure_names_multi_index() {
        let f = TargetFn::new(|x| x[0]).with_partials(|_, _| Err(Error::Unsupported("no".into())));
        let t = HolderTarget::new(1, 2.0, 1.0, f).unwrap();
        match taylor_poly(&t, &[0.5]) {
            Err(Error::Derivative { multi_index, .. }) => assert_eq!(multi_index, vec![1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in 1..=3 {
            for big_m in [1, 3, 4] {
                for _ in 0..200 {
                    let x: Vec<f64> = (0..r).map(|_| rng.random::<f64>()).collect();
                    assert!((hat_weight_sum(big_m, &x) - 1.0).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn linear_functions_reproduced() {
        let spec = TargetSpec::Polynomial {
            r: 2,
            terms: vec![
                PolyTerm {
                    coeff: 0.3,
                    powers: vec![0, 0],
                },
                PolyTerm {
                    coeff: -0.5,
                    powers: vec![1, 0],
                },
                PolyTerm {
                    coeff: 0.25,
                    powers: vec![0, 1],
                },
            ],
        };
        let t = HolderTarget::from_spec(&spec, 2.0, 1.0).unwrap();
        let lt = LocalTaylor::new(&t, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            assert!((lt.eval(&x) - spec.eval(&x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn local_error_decays_like_m_to_minus_beta() {
        let t = parabola();
        for big_m in [2, 4, 8] {
            let lt = LocalTaylor::new(&t, big_m).unwrap();
            let worst = (0..=2048)
                .map(|i| {
                    let x = i as f64 / 2048.0;
                    (lt.eval(&[x]) - t.value(&[x])).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= t.radius * (big_m as f64).powf(-2.0), "M={big_m} err={worst}");
        }
    }

    #[test]
    fn cached_coefficients_match_direct_expansion() {
        let t = parabola();
        let lt = LocalTaylor::new(&t, 4).unwrap();
        for flat in 0..5 {
            let direct = taylor_poly(&t, &[flat as f64 / 4.0]).unwrap();
            assert_eq!(lt.coefficients(flat), direct);
        }
    }
}
