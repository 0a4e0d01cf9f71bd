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

//! `construct`: build a network and its certificate.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use relucert::constructions::grid::DEFAULT_POINT_BUDGET;
use relucert::constructions::{
    build_composite_net, build_hat, build_holder_net, build_mon, build_mult, build_mult_r, reference_for,
    CompositionSpec, ConstructionCertificate, GridSpec, HolderTarget,
};
use relucert::network::SparseNetwork;
use relucert::targets::{CompositionDoc, TargetSpec};
use serde::Serialize;

use crate::failure::{CliResult, Failure};
use crate::output::{out_path, parse_config, read_text, stamped_json, write_file, Stamp};

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Also measure the sup-norm error on the standard grid.
    #[arg(long)]
    pub measure: bool,
    /// Point budget of the measurement grid.
    #[arg(long, default_value_t = DEFAULT_POINT_BUDGET)]
    pub budget: usize,
    /// Base name of the output files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum ConstructCmd {
    /// Approximate product of two inputs.
    Mult {
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Approximate product of r inputs.
    MultTree {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        common: Common,
    },
    /// All monomials of degree below gamma in r variables.
    Mon {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Hat functions on the grid with spacing 1/M.
    Hat {
        #[arg(long = "M")]
        big_m: usize,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Approximation of a Hölder-smooth target given in a spec file.
    Holder {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        r: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        m: u32,
        /// Hölder radius K of the target.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Approximation of a composite function given in a spec file.
    Composite {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        m: u32,
        /// One value of N per level, comma separated.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

impl ConstructCmd {
    fn common(&self) -> &Common {
        match self {
            ConstructCmd::Mult { common, .. }
            | ConstructCmd::MultTree { common, .. }
            | ConstructCmd::Mon { common, .. }
            | ConstructCmd::Hat { common, .. }
            | ConstructCmd::Holder { common, .. }
            | ConstructCmd::Composite { common, .. } => common,
        }
    }

    fn default_name(&self) -> String {
        match self {
            ConstructCmd::Mult { m, .. } => format!("mult_m{m}"),
            ConstructCmd::MultTree { m, r, .. } => format!("mult_tree_m{m}_r{r}"),
            ConstructCmd::Mon { m, gamma, r, .. } => format!("mon_m{m}_g{gamma}_r{r}"),
            ConstructCmd::Hat { big_m, m, r, .. } => format!("hat_M{big_m}_m{m}_r{r}"),
            ConstructCmd::Holder { n, m, r, .. } => format!("holder_N{n}_m{m}_r{r}"),
            ConstructCmd::Composite { m, .. } => format!("composite_m{m}"),
        }
    }
}

fn build(cmd: &ConstructCmd, config: &mut Vec<u8>) -> CliResult<(SparseNetwork, ConstructionCertificate)> {
    Ok(match cmd {
        ConstructCmd::Mult { m, .. } => build_mult(*m)?,
        ConstructCmd::MultTree { m, r, .. } => build_mult_r(*m, *r)?,
        ConstructCmd::Mon { m, gamma, r, .. } => build_mon(*m, *gamma, *r)?,
        ConstructCmd::Hat { big_m, m, r, .. } => build_hat(*big_m, *m, *r)?,
        ConstructCmd::Holder {
            beta,
            r,
            n,
            m,
            radius,
            target,
            ..
        } => {
            let text = read_text(target)?;
            config.extend_from_slice(text.as_bytes());
            let spec: TargetSpec = parse_config(target, &text)?;
            if spec.dim() != *r {
                return Err(Failure::Usage(format!(
                    "{}: target has {} variables but --r is {r}",
                    target.display(),
                    spec.dim()
                )));
            }
            let target = HolderTarget::from_spec(&spec, *beta, *radius)?;
            build_holder_net(&target, *m, *n)?
        }
        ConstructCmd::Composite { spec, m, n, .. } => {
            let text = read_text(spec)?;
            config.extend_from_slice(text.as_bytes());
            let doc: CompositionDoc = parse_config(spec, &text)?;
            let spec = CompositionSpec::from_doc(&doc)?;
            build_composite_net(&spec, *m, n)?
        }
    })
}

pub fn run(cmd: &ConstructCmd, out_dir: &Path) -> CliResult<()> {
    let mut config = serde_json::to_vec(cmd).expect("arguments serialize");
    let (net, mut cert) = build(cmd, &mut config)?;
    let common = cmd.common();
    if common.measure {
        let reference = reference_for(&cert.construction)?;
        let m = match &cert.construction {
            relucert::constructions::Construction::Mult { m }
            | relucert::constructions::Construction::MultTree { m, .. }
            | relucert::constructions::Construction::Monomials { m, .. }
            | relucert::constructions::Construction::Hat { m, .. }
            | relucert::constructions::Construction::Holder { m, .. }
            | relucert::constructions::Construction::Composite { m, .. } => *m,
        };
        let grid = GridSpec::standard(net.input_dim(), m, common.budget);
        cert.measure(&net, grid, reference)?;
    }
    let stamp = Stamp::new(&config, None);
    let name = common.name.clone().unwrap_or_else(|| cmd.default_name());
    let mut net_doc: serde_json::Value = serde_json::from_str(&net.to_json()).expect("valid json");
    net_doc["metadata"] = serde_json::to_value(&stamp).expect("serializable");
    let net_path = out_path(out_dir, &format!("{name}.net.json"))?;
    let mut text = serde_json::to_string_pretty(&net_doc).expect("serializable");
    text.push('\n');
    write_file(&net_path, &text)?;
    let cert_path = out_path(out_dir, &format!("{name}.cert.json"))?;
    write_file(&cert_path, &stamped_json(&cert, "run", &stamp))?;
    println!("network:     {}", net_path.display());
    println!("certificate: {}", cert_path.display());
    println!(
        "depth {}  width <= {}  sparsity <= {}  sup error <= {:e}",
        cert.depth, cert.width_bound, cert.sparsity_bound, cert.sup_error_bound
    );
    if let Some(e) = cert.measured_grid_error {
        println!("measured grid error {e:e}");
    }
    Ok(())
}
