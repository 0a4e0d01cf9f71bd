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

//! Networks for composite functions `g_q o ... o g_0`, built level by level
//! from Hölder-function networks on rescaled components.

use rayon::prelude::*;

use super::certificate::{Construction, ConstructionCertificate, Domain, Provenance};
use super::holder::{build_holder_net, holder_depth, holder_width_bound};
use super::taylor::HolderTarget;
use crate::calculus::{compose_zero, parallelize, remap_inputs, sync_depth, Placement};
use crate::error::{Error, Result};
use crate::network::SparseNetwork;
use crate::targets::{CompositionDoc, TargetFn};

/// One coordinate function `g_ij` reading the variables `vars` of the
/// previous level.
#[derive(Debug, Clone)]
pub struct Component {
    pub vars: Vec<usize>,
    pub f: TargetFn,
}

/// Level `i`: smoothness `beta_i`, radius `K_i`, arity bound `t_i`.
#[derive(Debug, Clone)]
pub struct Level {
    pub beta: f64,
    pub radius: f64,
    pub t: usize,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone)]
pub struct CompositionSpec {
    pub input_dim: usize,
    pub levels: Vec<Level>,
    /// Serializable form, when the spec came from one.
    pub doc: Option<CompositionDoc>,
}

impl CompositionSpec {
    pub fn new(input_dim: usize, levels: Vec<Level>) -> Result<Self> {
        let spec = CompositionSpec {
            input_dim,
            levels,
            doc: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_doc(doc: &CompositionDoc) -> Result<Self> {
        let levels = doc
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let components = l
                    .components
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        if c.target.dim() != c.vars.len() {
                            return Err(Error::arg(
                                format!("levels[{i}].components[{j}].target.r"),
                                format!(
                                    "target has {} variables but vars lists {}",
                                    c.target.dim(),
                                    c.vars.len()
                                ),
                            ));
                        }
                        Ok(Component {
                            vars: c.vars.clone(),
                            f: c.target.to_fn()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Level {
                    beta: l.beta,
                    radius: l.radius,
                    t: l.t,
                    components,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spec = Self::new(doc.input_dim, levels)?;
        spec.doc = Some(doc.clone());
        Ok(spec)
    }

    /// Number of compositions `q`.
    pub fn q(&self) -> usize {
        self.levels.len() - 1
    }

    /// `d_0, ..., d_{q+1}`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim];
        d.extend(self.levels.iter().map(|l| l.components.len()));
        d
    }

    pub fn betas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.beta).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.radius).collect()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.t).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::arg("levels", "at least one level is required"));
        }
        if self.input_dim == 0 {
            return Err(Error::arg("input_dim", "must be positive"));
        }
        let dims = self.dims();
        for (i, l) in self.levels.iter().enumerate() {
            if !(l.beta > 0.0 && l.beta.is_finite()) {
                return Err(Error::arg(
                    format!("levels[{i}].beta"),
                    format!("{} must be positive", l.beta),
                ));
            }
            if !(l.radius > 0.0 && l.radius.is_finite()) {
                return Err(Error::arg(
                    format!("levels[{i}].radius"),
                    format!("{} must be positive", l.radius),
                ));
            }
            if l.components.is_empty() {
                return Err(Error::arg(
                    format!("levels[{i}].components"),
                    "at least one component is required",
                ));
            }
            for (j, c) in l.components.iter().enumerate() {
                let field = format!("levels[{i}].components[{j}].vars");
                if c.vars.is_empty() || c.vars.len() > l.t {
                    return Err(Error::arg(field, format!("needs between 1 and t = {} variables", l.t)));
                }
                if let Some(v) = c.vars.iter().find(|&&v| v >= dims[i]) {
                    return Err(Error::arg(field, format!("variable {v} >= d_{i} = {}", dims[i])));
                }
                let mut sorted = c.vars.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != c.vars.len() {
                    return Err(Error::arg(field, "variables must be distinct"));
                }
            }
        }
        if self.levels.last().map(|l| l.components.len()) != Some(1) {
            return Err(Error::arg("levels", "the last level must have exactly one component"));
        }
        Ok(())
    }

    /// `f_0(x) = g_q o ... o g_0 (x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        for l in &self.levels {
            cur = l
                .components
                .iter()
                .map(|c| {
                    let args: Vec<f64> = c.vars.iter().map(|&v| cur[v]).collect();
                    c.f.value(&args)
                })
                .collect();
        }
        cur[0]
    }
}

/// Rescaled components `h_i` of one level with the Hölder radius they inherit.
#[derive(Debug, Clone)]
pub struct RescaledLevel {
    pub radius: f64,
    pub components: Vec<(Vec<usize>, HolderTarget)>,
}

/// Rescales the hierarchy so every inner level maps into `[0, 1]`:
/// `h_0 = g_0 / (2K_0) + 1/2`,
/// `h_i(z) = g_i(2K_{i-1} z - K_{i-1}) / (2K_i) + 1/2` for `0 < i < q` and
/// `h_q(z) = g_q(2K_{q-1} z - K_{q-1})`. For `q = 0` the single level is
/// left as `g_0`.
pub fn rescale_components(spec: &CompositionSpec) -> Result<Vec<RescaledLevel>> {
    spec.validate()?;
    let q = spec.q();
    if q > 0 {
        if let Some(i) = spec.levels.iter().position(|l| l.radius < 1.0) {
            return Err(Error::Precondition(format!(
                "level {i} has radius K = {} but the rescaling needs K_i >= 1",
                spec.levels[i].radius
            )));
        }
    }
    spec.levels
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let (s_in, off_in) = if i == 0 {
                (1.0, 0.0)
            } else {
                let k = spec.levels[i - 1].radius;
                (2.0 * k, k)
            };
            let (s_out, off_out) = if i < q {
                (1.0 / (2.0 * level.radius), 0.5)
            } else {
                (1.0, 0.0)
            };
            let radius = if q == 0 {
                level.radius
            } else if i == 0 {
                1.0
            } else if i < q {
                s_in.powf(level.beta)
            } else {
                level.radius * s_in.powf(level.beta)
            };
            let components = level
                .components
                .iter()
                .map(|c| {
                    let h = affine_wrap(&c.f, s_in, off_in, s_out, off_out);
                    Ok((c.vars.clone(), HolderTarget::new(c.vars.len(), level.beta, radius, h)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RescaledLevel { radius, components })
        })
        .collect()
}

/// `z -> s_out g(s_in z - off_in) + off_out`, with partials by the chain rule.
fn affine_wrap(g: &TargetFn, s_in: f64, off_in: f64, s_out: f64, off_out: f64) -> TargetFn {
    let inner = move |z: &[f64]| -> Vec<f64> { z.iter().map(|v| s_in * v - off_in).collect() };
    let gv = g.clone();
    let h = TargetFn::new(move |z| s_out * gv.value(&inner(z)) + off_out);
    if !g.has_partials() {
        return h;
    }
    let gp = g.clone();
    h.with_partials(move |alpha, z| {
        let order: usize = alpha.iter().sum();
        let d = gp.exact_partial(alpha, &inner(z)).expect("oracle present")?;
        let shift = if order == 0 { off_out } else { 0.0 };
        Ok(s_out * s_in.powi(order as i32) * d + shift)
    })
}

/// `K_q prod_{l<q} (2K_l)^{beta_{l+1}} sum_i err_i^{prod_{l>i} min(beta_l, 1)}`.
pub fn composition_error_bound(per_level_errors: &[f64], betas: &[f64], radii: &[f64]) -> Result<f64> {
    let n = betas.len();
    if n == 0 || per_level_errors.len() != n || radii.len() != n {
        return Err(Error::shape(
            "per_level_errors",
            format!(
                "{} errors, {} smoothness indices, {} radii",
                per_level_errors.len(),
                n,
                radii.len()
            ),
        ));
    }
    if let Some(i) = per_level_errors.iter().position(|e| !(*e >= 0.0)) {
        return Err(Error::arg(format!("per_level_errors[{i}]"), "must be nonnegative"));
    }
    let q = n - 1;
    let lead = radii[q] * (0..q).map(|l| (2.0 * radii[l]).powf(betas[l + 1])).product::<f64>();
    let sum: f64 = (0..=q)
        .map(|i| {
            let expo: f64 = betas[i + 1..].iter().map(|b| b.min(1.0)).product();
            per_level_errors[i].powf(expo)
        })
        .sum();
    Ok(lead * sum)
}

/// Network for the composite function with per-level size parameters `N_i`.
pub fn build_composite_net(
    spec: &CompositionSpec,
    m: u32,
    n_per_level: &[usize],
) -> Result<(SparseNetwork, ConstructionCertificate)> {
    if n_per_level.len() != spec.levels.len() {
        return Err(Error::arg(
            "n_per_level",
            format!("expected {} values, got {}", spec.levels.len(), n_per_level.len()),
        ));
    }
    let rescaled = rescale_components(spec)?;
    let q = spec.q();
    let dims = spec.dims();

    let mut net: Option<SparseNetwork> = None;
    let mut errors = Vec::with_capacity(q + 1);
    let mut depth = 0usize;
    let mut width_bound = 0usize;
    let mut sparsity_bound = 0usize;
    let mut provenance = Provenance::NotApplicable;

    for (i, level) in rescaled.iter().enumerate() {
        let n = n_per_level[i];
        let beta = spec.levels[i].beta;
        let built = level
            .components
            .par_iter()
            .map(|(vars, target)| {
                let (mut h, cert) = build_holder_net(target, m, n)?;
                if i < q {
                    h = h.clip_unit()?;
                }
                Ok((vars, h, cert))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Level {
                level: i,
                source: Box::new(e),
            })?;

        let level_depth = built.iter().map(|(_, h, _)| h.depth()).max().expect("non-empty level");
        let mut parts = Vec::with_capacity(built.len());
        for (vars, h, cert) in built {
            let extra = level_depth - h.depth();
            let clip = if i < q { 4 } else { 0 };
            sparsity_bound += cert.sparsity_bound + clip + extra * vars.len();
            width_bound += holder_width_bound(vars.len(), beta, n);
            provenance = provenance.combine(cert.derivative_provenance);
            errors.push((i, cert.sup_error_bound));
            let h = sync_depth(&h, extra, Placement::Input)?;
            parts.push(remap_inputs(&h, dims[i], vars)?);
        }
        let level_net = parallelize(&parts)?;
        let arity_max = spec.levels[i]
            .components
            .iter()
            .map(|c| c.vars.len())
            .max()
            .unwrap_or(1);
        depth += holder_depth(m, arity_max, beta) + if i < q { 2 } else { 0 };
        net = Some(match net {
            None => level_net,
            Some(prev) => {
                depth += 1;
                compose_zero(&level_net, &prev)?
            }
        });
    }
    let per_level: Vec<f64> = (0..=q)
        .map(|i| {
            errors
                .iter()
                .filter(|(l, _)| *l == i)
                .map(|(_, e)| *e)
                .fold(0.0, f64::max)
        })
        .collect();
    let bound = composition_error_bound(&per_level, &spec.betas(), &spec.radii())?;
    let net = net.expect("at least one level");
    let cert = ConstructionCertificate {
        statement_id: "composite.hierarchy".into(),
        depth,
        width_bound,
        sparsity_bound,
        sup_error_bound: bound,
        measured_grid_error: None,
        grid_spec: None,
        domain: Domain::unit_cube(spec.input_dim),
        derivative_provenance: provenance,
        construction: Construction::Composite {
            m,
            n_per_level: n_per_level.to_vec(),
            spec: spec.doc.clone(),
        },
        output_layout: None,
    };
    Ok((net, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::certificate::check_claims;
    use crate::constructions::grid::GridSpec;
    use crate::constructions::holder::build_holder_net;
    use crate::targets::{ComponentDoc, LevelDoc, PolyTerm, TargetSpec};

    fn poly(r: usize, terms: &[(f64, &[usize])]) -> TargetSpec {
        TargetSpec::Polynomial {
            r,
            terms: terms
                .iter()
                .map(|(c, p)| PolyTerm {
                    coeff: *c,
                    powers: p.to_vec(),
                })
                .collect(),
        }
    }

    fn identity_level(radius: f64) -> Level {
        Level {
            beta: 1.0,
            radius,
            t: 1,
            components: vec![Component {
                vars: vec![0],
                f: TargetFn::new(|x| x[0]),
            }],
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(
            composition_error_bound(&[0.0, 0.0], &[1.0, 0.5], &[1.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(composition_error_bound(&[0.3], &[2.0], &[1.5]).unwrap(), 1.5 * 0.3);
        let b = composition_error_bound(&[0.01, 0.01], &[1.0, 0.5], &[1.0, 1.0]).unwrap();
        assert!((b - 2f64.sqrt() * (0.1 + 0.01)).abs() < 1e-15);
    }

    #[test]
    fn bound_dominates_perturbed_pair() {
        // g0(x) = x, g1(y) = sqrt(|y|) on [-1, 1]: beta = (1, 1/2), K = (1, 1)
        let betas = [1.0, 0.5];
        let radii = [1.0, 1.0];
        let h0 = |x: f64| x / 2.0 + 0.5;
        let h1 = |z: f64| (2.0 * z - 1.0).abs().sqrt();
        let (e0, e1) = (0.01, 0.01);
        let h0p = |x: f64| (h0(x) + e0 * (37.0 * x).sin()).clamp(0.0, 1.0);
        let h1p = |z: f64| h1(z) - e1 * (z - 0.5).signum();
        let measured = (0..=10_000)
            .map(|i| {
                let x = i as f64 / 10_000.0;
                (h1(h0(x)) - h1p(h0p(x))).abs()
            })
            .fold(0.0, f64::max);
        let bound = composition_error_bound(&[e0, e1], &betas, &radii).unwrap();
        assert!(measured <= bound, "measured {measured} bound {bound}");
    }

    #[test]
    fn rescaled_composition_equals_original() {
        let spec =
            CompositionSpec::new(1, vec![identity_level(1.0), identity_level(1.0), identity_level(1.0)]).unwrap();
        let levels = rescale_components(&spec).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let mut v = vec![x];
            for l in &levels {
                v = vec![l.components[0].1.value(&v)];
            }
            assert!((v[0] - spec.eval(&[x])).abs() <= 1e-12);
            assert!((levels[0].components[0].1.value(&[x]) - (x / 2.0 + 0.5)).abs() <= 1e-15);
        }
        assert_eq!(levels[0].radius, 1.0);
        assert_eq!(levels[1].radius, 2.0);
        assert_eq!(levels[2].radius, 2.0);
    }

    #[test]
    fn rescaled_partials_follow_chain_rule() {
        let g = poly(1, &[(1.0, &[2])]).to_fn().unwrap();
        let spec = CompositionSpec::new(
            1,
            vec![
                identity_level(2.0),
                Level {
                    beta: 3.0,
                    radius: 3.0,
                    t: 1,
                    components: vec![Component { vars: vec![0], f: g }],
                },
            ],
        )
        .unwrap();
        let levels = rescale_components(&spec).unwrap();
        let h = &levels[1].components[0].1;
        // h(z) = (4z - 2)^2
        assert_eq!(h.partial(&[1], &[0.75]).unwrap(), 8.0 * (4.0 * 0.75 - 2.0));
        assert_eq!(h.partial(&[2], &[0.75]).unwrap(), 32.0);
        assert_eq!(levels[1].radius, 3.0 * 4f64.powi(3));
    }

    #[test]
    fn rejects_small_radius() {
        let spec = CompositionSpec::new(1, vec![identity_level(0.5), identity_level(1.0)]).unwrap();
        assert!(rescale_components(&spec).unwrap_err().is_precondition());
    }

    #[test]
    fn single_level_matches_holder_net() {
        let target = poly(1, &[(1.0, &[1]), (-1.0, &[2])]);
        let spec = CompositionSpec::new(
            1,
            vec![Level {
                beta: 2.0,
                radius: 1.0,
                t: 1,
                components: vec![Component {
                    vars: vec![0],
                    f: target.to_fn().unwrap(),
                }],
            }],
        )
        .unwrap();
        let (net, cert) = build_composite_net(&spec, 8, &[8]).unwrap();
        let (direct, dcert) = build_holder_net(&HolderTarget::from_spec(&target, 2.0, 1.0).unwrap(), 8, 8).unwrap();
        assert_eq!(net.depth(), direct.depth());
        assert_eq!(net.count_active().active, direct.count_active().active);
        assert_eq!(cert.depth, dcert.depth);
        assert_eq!(cert.sup_error_bound, dcert.sup_error_bound);
    }

    fn additive_doc() -> CompositionDoc {
        CompositionDoc {
            input_dim: 2,
            levels: vec![
                LevelDoc {
                    beta: 2.0,
                    radius: 1.0,
                    t: 1,
                    components: vec![
                        ComponentDoc {
                            vars: vec![0],
                            target: poly(1, &[(1.0, &[1]), (-1.0, &[2])]),
                        },
                        ComponentDoc {
                            vars: vec![1],
                            target: poly(1, &[(0.5, &[2])]),
                        },
                    ],
                },
                LevelDoc {
                    beta: 1.0,
                    radius: 4.0,
                    t: 2,
                    components: vec![ComponentDoc {
                        vars: vec![0, 1],
                        target: poly(2, &[(1.0, &[1, 0]), (1.0, &[0, 1])]),
                    }],
                },
            ],
        }
    }

    #[test]
    fn additive_model_within_certificate() {
        let spec = CompositionSpec::from_doc(&additive_doc()).unwrap();
        let (net, mut cert) = build_composite_net(&spec, 12, &[8, 67]).unwrap();
        assert!(check_claims(&net, &cert, None).iter().all(|c| c.holds));
        let grid = GridSpec::Tensor {
            dim: 2,
            points_per_axis: 26,
        };
        let err = cert.measure(&net, grid, |x| vec![spec.eval(x)]).unwrap();
        assert!(err <= cert.sup_error_bound, "err {err} bound {}", cert.sup_error_bound);
        assert_eq!(net.depth(), cert.depth);
    }

    #[test]
    fn level_failure_reports_index() {
        let spec = CompositionSpec::from_doc(&additive_doc()).unwrap();
        match build_composite_net(&spec, 8, &[8, 10]) {
            Err(Error::Level { level, source }) => {
                assert_eq!(level, 1);
                assert!(source.is_precondition());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unused_variable_has_no_influence() {
        // f(x1, x2, x3) = g11(g01(x3), g02(x2))
        let spec = CompositionSpec::new(
            3,
            vec![
                Level {
                    beta: 1.0,
                    radius: 1.0,
                    t: 1,
                    components: vec![
                        Component {
                            vars: vec![2],
                            f: TargetFn::new(|x| x[0] * x[0]),
                        },
                        Component {
                            vars: vec![1],
                            f: TargetFn::new(|x| 1.0 - x[0]),
                        },
                    ],
                },
                Level {
                    beta: 1.0,
                    radius: 4.0,
                    t: 2,
                    components: vec![Component {
                        vars: vec![0, 1],
                        f: TargetFn::new(|y| y[0] * y[1]),
                    }],
                },
            ],
        )
        .unwrap();
        let (net, _) = build_composite_net(&spec, 6, &[8, 67]).unwrap();
        for (a, b) in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            let base = net.evaluate(&[0.0, a, b]).unwrap()[0];
            for x1 in [0.1, 0.33, 1.0] {
                assert_eq!(net.evaluate(&[x1, a, b]).unwrap()[0], base);
            }
        }
    }
}
