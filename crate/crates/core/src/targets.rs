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

//! Target functions: closures with optional closed-form partial
//! derivatives, and a serializable description for the command line.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type PartialFn = Arc<dyn Fn(&[usize], &[f64]) -> Result<f64> + Send + Sync>;

/// A real function on `[0, 1]^r`, optionally with its partial derivatives
/// `(alpha, x) -> d^alpha f(x)`.
#[derive(Clone)]
pub struct TargetFn {
    value: ValueFn,
    partials: Option<PartialFn>,
}

impl fmt::Debug for TargetFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFn")
            .field("partials", &self.partials.is_some())
            .finish_non_exhaustive()
    }
}

impl TargetFn {
    pub fn new(value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TargetFn {
            value: Arc::new(value),
            partials: None,
        }
    }

    pub fn with_partials(mut self, partials: impl Fn(&[usize], &[f64]) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// Closed-form partial, `None` when no oracle was supplied.
    pub fn exact_partial(&self, alpha: &[usize], x: &[f64]) -> Option<Result<f64>> {
        self.partials.as_ref().map(|p| p(alpha, x))
    }
}

/// Serializable targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `sum_k coeff_k x^{powers_k}`.
    Polynomial {
        r: usize,
        terms: Vec<PolyTerm>,
    },
    /// `sum_k amp_k sin(<freq_k, x> + phase_k)`.
    SinSum {
        r: usize,
        terms: Vec<SinTerm>,
    },
    Constant {
        r: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinTerm {
    pub amp: f64,
    pub freq: Vec<f64>,
    #[serde(default)]
    pub phase: f64,
}

impl TargetSpec {
    pub fn dim(&self) -> usize {
        match *self {
            TargetSpec::Polynomial { r, .. } | TargetSpec::SinSum { r, .. } | TargetSpec::Constant { r, .. } => r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.dim();
        if r == 0 {
            return Err(Error::arg("target.r", "dimension must be positive"));
        }
        match self {
            TargetSpec::Polynomial { terms, .. } => {
                for (k, t) in terms.iter().enumerate() {
                    if t.powers.len() != r {
                        return Err(Error::arg(
                            format!("target.terms[{k}].powers"),
                            format!("expected {r} exponents"),
                        ));
                    }
                    if !t.coeff.is_finite() {
                        return Err(Error::arg(format!("target.terms[{k}].coeff"), "must be finite"));
                    }
                }
            }
            TargetSpec::SinSum { terms, .. } => {
                for (k, t) in terms.iter().enumerate() {
                    if t.freq.len() != r {
                        return Err(Error::arg(
                            format!("target.terms[{k}].freq"),
                            format!("expected {r} frequencies"),
                        ));
                    }
                    if !(t.amp.is_finite() && t.phase.is_finite() && t.freq.iter().all(|f| f.is_finite())) {
                        return Err(Error::arg(format!("target.terms[{k}]"), "must be finite"));
                    }
                }
            }
            TargetSpec::Constant { value, .. } => {
                if !value.is_finite() {
                    return Err(Error::arg("target.value", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// The function with exact partial derivatives.
    pub fn to_fn(&self) -> Result<TargetFn> {
        self.validate()?;
        let spec = Arc::new(self.clone());
        let s2 = Arc::clone(&spec);
        Ok(TargetFn::new(move |x| spec.eval(x)).with_partials(move |alpha, x| Ok(s2.partial(alpha, x))))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.partial(&vec![0; self.dim()], x)
    }

    pub fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
        match self {
            TargetSpec::Polynomial { terms, .. } => terms
                .iter()
                .map(|t| {
                    let mut v = t.coeff;
                    for ((&p, &a), &xj) in t.powers.iter().zip(alpha).zip(x) {
                        if a > p {
                            return 0.0;
                        }
                        // falling factorial p (p-1) ... (p-a+1)
                        let ff: f64 = (0..a).map(|i| (p - i) as f64).product();
                        v *= ff * xj.powi((p - a) as i32);
                    }
                    v
                })
                .sum(),
            TargetSpec::SinSum { terms, .. } => {
                let order: usize = alpha.iter().sum();
                terms
                    .iter()
                    .map(|t| {
                        let arg: f64 = t.freq.iter().zip(x).map(|(f, v)| f * v).sum::<f64>() + t.phase;
                        let scale: f64 = t.freq.iter().zip(alpha).map(|(f, &a)| f.powi(a as i32)).product();
                        // d/dt sin(t) = sin(t + pi/2)
                        let s = match order % 4 {
                            0 => arg.sin(),
                            1 => arg.cos(),
                            2 => -arg.sin(),
                            _ => -arg.cos(),
                        };
                        t.amp * scale * s
                    })
                    .sum()
            }
            TargetSpec::Constant { value, .. } => {
                if alpha.iter().all(|&a| a == 0) {
                    *value
                } else {
                    0.0
                }
            }
        }
    }
}

/// Serializable composite hierarchy `g_q o ... o g_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDoc {
    pub input_dim: usize,
    pub levels: Vec<LevelDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    pub beta: f64,
    pub radius: f64,
    pub t: usize,
    pub components: Vec<ComponentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub vars: Vec<usize>,
    pub target: TargetSpec,
}
