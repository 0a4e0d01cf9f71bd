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

//! `certify`: re-check a certificate against its network.

use std::path::{Path, PathBuf};

use clap::Args;
use relucert::constructions::grid::DEFAULT_POINT_BUDGET;
use relucert::constructions::{
    check_claims, measure_sup_error, reference_for, Construction, ConstructionCertificate, GridSpec,
};
use relucert::network::SparseNetwork;

use crate::failure::{CliResult, Failure};
use crate::output::read_text;

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub net: PathBuf,
    pub cert: PathBuf,
    /// Tensor grid with this many points per axis instead of the standard grid.
    #[arg(long)]
    pub points_per_axis: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
    pub budget: usize,
}

fn construction_m(c: &Construction) -> u32 {
    match c {
        Construction::Mult { m }
        | Construction::MultTree { m, .. }
        | Construction::Monomials { m, .. }
        | Construction::Hat { m, .. }
        | Construction::Holder { m, .. }
        | Construction::Composite { m, .. } => *m,
    }
}

pub fn load_pair(net: &Path, cert: &Path) -> CliResult<(SparseNetwork, ConstructionCertificate)> {
    let net =
        SparseNetwork::from_json(&read_text(net)?).map_err(|e| Failure::Usage(format!("{}: {e}", net.display())))?;
    let cert: ConstructionCertificate =
        serde_json::from_str(&read_text(cert)?).map_err(|e| Failure::Usage(format!("{}: {e}", cert.display())))?;
    Ok((net, cert))
}

pub fn run(args: &CertifyArgs) -> CliResult<()> {
    let (net, cert) = load_pair(&args.net, &args.cert)?;
    let dim = net.input_dim();
    let grid = match args.points_per_axis {
        Some(k) if k >= 2 => GridSpec::Tensor {
            dim,
            points_per_axis: k,
        },
        Some(k) => return Err(Failure::Usage(format!("--points-per-axis {k} must be at least 2"))),
        None => GridSpec::standard(dim, construction_m(&cert.construction), args.budget),
    };
    let measured = match reference_for(&cert.construction) {
        Ok(reference) => {
            if net.output_dim() != reference(&vec![0.0; dim]).len() {
                return Err(Failure::Claims(
                    "output dimension differs from the certified construction".into(),
                ));
            }
            Some(measure_sup_error(&net, &grid, reference)?)
        }
        Err(relucert::Error::Unsupported(msg)) => {
            println!("note: sup error not re-measured ({msg})");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let checks = check_claims(&net, &cert, measured);
    println!("statement {}  grid {}", cert.statement_id, grid.describe());
    println!("{:<12} {:>16} {:>16}  result", "claim", "claimed", "measured");
    for c in &checks {
        println!(
            "{:<12} {:>16} {:>16}  {}",
            c.claim,
            c.claimed,
            c.measured,
            if c.holds { "ok" } else { "FAIL" }
        );
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.holds).map(|c| c.claim.as_str()).collect();
    if failed.is_empty() {
        println!("all claims hold");
        Ok(())
    } else {
        Err(Failure::Claims(failed.join(", ")))
    }
}
