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

//! Certificates recording what a construction claims about its network,
//! and the checks that compare those claims with a concrete network.

use serde::{Deserialize, Serialize};

use super::grid::{measure_sup_error, GridSpec};
use crate::error::Result;
use crate::network::SparseNetwork;
use crate::targets::{CompositionDoc, TargetSpec};

/// Where the Taylor data of a target came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// No derivatives were needed.
    NotApplicable,
    /// Partial derivatives supplied in closed form.
    Exact,
    /// Some partials were approximated by central differences.
    FiniteDifference,
}

impl Provenance {
    /// The weaker of two provenances.
    pub fn combine(self, other: Provenance) -> Provenance {
        use Provenance::*;
        match (self, other) {
            (FiniteDifference, _) | (_, FiniteDifference) => FiniteDifference,
            (Exact, _) | (_, Exact) => Exact,
            _ => NotApplicable,
        }
    }
}

/// Axis-aligned box on which the error bound is claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn unit_cube(dim: usize) -> Self {
        Domain {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }
}

/// Parameters sufficient to rebuild the network and its reference function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    Mult {
        m: u32,
    },
    MultTree {
        m: u32,
        r: usize,
    },
    Monomials {
        m: u32,
        gamma: f64,
        r: usize,
    },
    Hat {
        big_m: usize,
        m: u32,
        r: usize,
    },
    Holder {
        m: u32,
        n: usize,
        beta: f64,
        radius: f64,
        /// `None` when the target was supplied as a closure.
        target: Option<TargetSpec>,
    },
    Composite {
        m: u32,
        n_per_level: Vec<usize>,
        spec: Option<CompositionDoc>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionCertificate {
    pub statement_id: String,
    pub depth: usize,
    pub width_bound: usize,
    pub sparsity_bound: usize,
    pub sup_error_bound: f64,
    pub measured_grid_error: Option<f64>,
    pub grid_spec: Option<GridSpec>,
    pub domain: Domain,
    pub derivative_provenance: Provenance,
    pub construction: Construction,
    /// Multi-index of each output coordinate, for vector-valued constructions
    /// indexed by monomials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_layout: Option<Vec<Vec<usize>>>,
}

impl ConstructionCertificate {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }

    /// Measures the grid error against `reference` and records it.
    pub fn measure<F>(&mut self, net: &SparseNetwork, grid: GridSpec, reference: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        let err = measure_sup_error(net, &grid, reference)?;
        self.measured_grid_error = Some(err);
        self.grid_spec = Some(grid);
        Ok(err)
    }
}

/// One row of a claims-versus-measured comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub claimed: f64,
    pub measured: f64,
    pub holds: bool,
}

/// Structural claims plus, when `measured_error` is given, the error claim.
pub fn check_claims(
    net: &SparseNetwork,
    cert: &ConstructionCertificate,
    measured_error: Option<f64>,
) -> Vec<ClaimCheck> {
    let stats = net.count_active();
    let mut out = vec![
        ClaimCheck {
            claim: "depth".into(),
            claimed: cert.depth as f64,
            measured: net.depth() as f64,
            holds: net.depth() == cert.depth,
        },
        ClaimCheck {
            claim: "width".into(),
            claimed: cert.width_bound as f64,
            measured: net.max_hidden_width() as f64,
            holds: net.max_hidden_width() <= cert.width_bound,
        },
        ClaimCheck {
            claim: "sparsity".into(),
            claimed: cert.sparsity_bound as f64,
            measured: stats.active as f64,
            holds: stats.active <= cert.sparsity_bound,
        },
    ];
    if let Some(err) = measured_error {
        out.push(ClaimCheck {
            claim: "sup_error".into(),
            claimed: cert.sup_error_bound,
            measured: err,
            holds: err <= cert.sup_error_bound,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert() -> ConstructionCertificate {
        ConstructionCertificate {
            statement_id: "test".into(),
            depth: 0,
            width_bound: 0,
            sparsity_bound: 2,
            sup_error_bound: 0.0,
            measured_grid_error: None,
            grid_spec: None,
            domain: Domain::unit_cube(2),
            derivative_provenance: Provenance::NotApplicable,
            construction: Construction::Mult { m: 1 },
            output_layout: None,
        }
    }

    #[test]
    fn claims_hold_and_fail() {
        let net = SparseNetwork::identity(2);
        assert!(check_claims(&net, &cert(), Some(0.0)).iter().all(|c| c.holds));
        let mut tampered = cert();
        tampered.sparsity_bound = 1;
        let checks = check_claims(&net, &tampered, Some(0.1));
        let failed: Vec<_> = checks.iter().filter(|c| !c.holds).map(|c| c.claim.as_str()).collect();
        assert_eq!(failed, ["sparsity", "sup_error"]);
    }

    #[test]
    fn json_round_trip() {
        let c = cert();
        let back: ConstructionCertificate = serde_json::from_str(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn provenance_takes_weakest() {
        use Provenance::*;
        assert_eq!(Exact.combine(FiniteDifference), FiniteDifference);
        assert_eq!(NotApplicable.combine(Exact), Exact);
        assert_eq!(NotApplicable.combine(NotApplicable), NotApplicable);
    }
}
