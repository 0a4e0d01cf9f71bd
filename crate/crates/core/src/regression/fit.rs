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

//! Empirical risk minimization over sparse networks: projected full-batch
//! gradient descent with a backtracking step and scheduled magnitude pruning.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{empirical_risk, RegressionDataset};
use crate::error::{Error, Result};
use crate::network::{capacity, LayerBuilder, SparseNetwork};
use crate::rates::Architecture;
use crate::rng::{derive_seed, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyper {
    pub restarts: usize,
    pub epochs: usize,
    /// Initial step size; the line search adapts it.
    pub step: f64,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            restarts: 2,
            epochs: 400,
            step: 0.5,
            seed: 0,
        }
    }
}

const MAX_STEP: f64 = 64.0;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone)]
pub struct FitResult {
    pub net: SparseNetwork,
    pub empirical_risk: f64,
    pub restarts: usize,
    pub diverged_restarts: usize,
    /// Final risk of every restart, `NaN` for diverged ones.
    pub restart_risks: Vec<f64>,
    /// Mean over finished restarts of `risk_k - min_k risk_k`.
    pub best_restart_risk_gap: f64,
    /// Risk after every epoch of the kept restart.
    pub trajectory: Vec<f64>,
    /// Epochs at whose start the kept restart was pruned.
    pub prune_epochs: Vec<usize>,
    /// `max_i |f(X_i)|` on the training inputs.
    pub max_train_output: f64,
    /// Whether `max_train_output` exceeds the class bound `F`.
    pub exceeds_sup_bound: bool,
    pub dataset_id: u64,
}

impl FitResult {
    /// Wraps an externally built network so it can join a comparison pool.
    pub fn from_net(net: SparseNetwork, data: &RegressionDataset) -> Result<Self> {
        let risk = empirical_risk(&net, data)?;
        let max_out = max_abs_output(&net, data)?;
        let exceeds = net.sup_bound().is_some_and(|f| max_out > f);
        Ok(FitResult {
            net,
            empirical_risk: risk,
            restarts: 0,
            diverged_restarts: 0,
            restart_risks: vec![risk],
            best_restart_risk_gap: 0.0,
            trajectory: Vec::new(),
            prune_epochs: Vec::new(),
            max_train_output: max_out,
            exceeds_sup_bound: exceeds,
            dataset_id: data.fingerprint(),
        })
    }
}

fn max_abs_output(net: &SparseNetwork, data: &RegressionDataset) -> Result<f64> {
    let mut ev = crate::network::Evaluator::new(net);
    let mut m: f64 = 0.0;
    for i in 0..data.n() {
        m = m.max(ev.eval(data.row(i))?[0].abs());
    }
    Ok(m)
}

/// Flat parameter layout: for each layer `l`, `W_l` row-major, then the
/// shift of the hidden layer it feeds.
struct Model {
    widths: Vec<usize>,
    w_off: Vec<usize>,
    v_off: Vec<usize>,
    len: usize,
    act_off: Vec<usize>,
    act_len: usize,
}

impl Model {
    fn new(widths: &[usize]) -> Self {
        let depth = widths.len() - 2;
        let (mut w_off, mut v_off, mut off) = (Vec::new(), Vec::new(), 0);
        for l in 0..=depth {
            w_off.push(off);
            off += widths[l] * widths[l + 1];
            if l < depth {
                v_off.push(off);
                off += widths[l + 1];
            }
        }
        let mut act_off = Vec::new();
        let mut a = 0;
        for &p in &widths[..=depth] {
            act_off.push(a);
            a += p;
        }
        Model {
            widths: widths.to_vec(),
            w_off,
            v_off,
            len: off,
            act_off,
            act_len: a,
        }
    }

    fn depth(&self) -> usize {
        self.widths.len() - 2
    }

    fn init<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut theta = vec![0.0; self.len];
        for l in 0..=self.depth() {
            let fan_in = self.widths[l] as f64;
            let a = (6.0 / fan_in).sqrt().min(1.0);
            let n = self.widths[l] * self.widths[l + 1];
            for t in &mut theta[self.w_off[l]..self.w_off[l] + n] {
                *t = rng.random_range(-a..a);
            }
            if l < self.depth() {
                let span = if l == 0 { 0.5 } else { 0.1 };
                for t in &mut theta[self.v_off[l]..self.v_off[l] + self.widths[l + 1]] {
                    *t = rng.random_range(-span..span);
                }
            }
        }
        theta
    }

    /// Forward pass storing the input and hidden activations in `acts`.
    fn forward(&self, theta: &[f64], x: &[f64], acts: &mut [f64]) -> f64 {
        let depth = self.depth();
        acts[..x.len()].copy_from_slice(x);
        for l in 0..depth {
            let (pin, pout) = (self.widths[l], self.widths[l + 1]);
            let (src, dst) = acts.split_at_mut(self.act_off[l + 1]);
            let a = &src[self.act_off[l]..self.act_off[l] + pin];
            let w = &theta[self.w_off[l]..self.w_off[l] + pin * pout];
            let v = &theta[self.v_off[l]..self.v_off[l] + pout];
            for j in 0..pout {
                let row = &w[j * pin..(j + 1) * pin];
                let z: f64 = row.iter().zip(a).map(|(wi, ai)| wi * ai).sum::<f64>() - v[j];
                dst[j] = z.max(0.0);
            }
        }
        let pin = self.widths[depth];
        let a = &acts[self.act_off[depth]..self.act_off[depth] + pin];
        let w = &theta[self.w_off[depth]..self.w_off[depth] + pin];
        w.iter().zip(a).map(|(wi, ai)| wi * ai).sum()
    }

    fn risk(&self, theta: &[f64], data: &RegressionDataset, acts: &mut [f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..data.n() {
            let r = data.y[i] - self.forward(theta, data.row(i), acts);
            sum += r * r;
        }
        sum / data.n() as f64
    }

    fn risk_and_grad(&self, theta: &[f64], data: &RegressionDataset, grad: &mut [f64], acts: &mut [f64]) -> f64 {
        let depth = self.depth();
        let n = data.n() as f64;
        let maxw = *self.widths.iter().max().unwrap();
        let mut delta = vec![0.0; maxw];
        let mut next = vec![0.0; maxw];
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut sum = 0.0;
        for i in 0..data.n() {
            let out = self.forward(theta, data.row(i), acts);
            let r = out - data.y[i];
            sum += r * r;
            let g_out = 2.0 * r / n;
            let pl = self.widths[depth];
            let a = &acts[self.act_off[depth]..self.act_off[depth] + pl];
            let w = &theta[self.w_off[depth]..self.w_off[depth] + pl];
            for j in 0..pl {
                grad[self.w_off[depth] + j] += g_out * a[j];
                delta[j] = g_out * w[j];
            }
            for l in (0..depth).rev() {
                let (pin, pout) = (self.widths[l], self.widths[l + 1]);
                let h = &acts[self.act_off[l + 1]..self.act_off[l + 1] + pout];
                let a = &acts[self.act_off[l]..self.act_off[l] + pin];
                let w = &theta[self.w_off[l]..self.w_off[l] + pin * pout];
                if l > 0 {
                    next[..pin].iter_mut().for_each(|v| *v = 0.0);
                }
                for j in 0..pout {
                    if h[j] <= 0.0 {
                        continue;
                    }
                    let d = delta[j];
                    if d == 0.0 {
                        continue;
                    }
                    grad[self.v_off[l] + j] -= d;
                    let gw = &mut grad[self.w_off[l] + j * pin..self.w_off[l] + (j + 1) * pin];
                    for k in 0..pin {
                        gw[k] += d * a[k];
                    }
                    if l > 0 {
                        let row = &w[j * pin..(j + 1) * pin];
                        for k in 0..pin {
                            next[k] += row[k] * d;
                        }
                    }
                }
                if l > 0 {
                    delta[..pin].copy_from_slice(&next[..pin]);
                }
            }
        }
        sum / n
    }

    fn to_network(&self, theta: &[f64], sup_bound: f64) -> Result<SparseNetwork> {
        let depth = self.depth();
        let layers = (0..=depth)
            .map(|l| {
                let (pin, pout) = (self.widths[l], self.widths[l + 1]);
                let mut b = if l < depth {
                    LayerBuilder::hidden(pout, pin)
                } else {
                    LayerBuilder::output(pout, pin)
                };
                for j in 0..pout {
                    for k in 0..pin {
                        b.set(j, k, theta[self.w_off[l] + j * pin + k]);
                    }
                    if l < depth {
                        b.set_shift(j, theta[self.v_off[l] + j]);
                    }
                }
                b.build()
            })
            .collect();
        SparseNetwork::new(self.widths.clone(), layers, Some(sup_bound))
    }
}

/// Keeps the `keep` largest magnitudes, ties going to the earliest
/// coordinate, and freezes the rest at zero.
fn prune(theta: &mut [f64], frozen: &mut [bool], keep: usize) {
    let mut order: Vec<usize> = (0..theta.len()).collect();
    order.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()).then(a.cmp(&b)));
    for &i in &order[keep.min(order.len())..] {
        theta[i] = 0.0;
        frozen[i] = true;
    }
}

/// Pruning epochs and targets for a budget of `epochs`.
fn schedule(epochs: usize, s: usize, cap: usize) -> Vec<(usize, usize)> {
    let gap = cap - s;
    vec![
        (epochs / 2, s + gap / 4),
        (epochs * 3 / 4, s + gap / 16),
        (epochs * 9 / 10, s),
    ]
}

struct Run {
    theta: Vec<f64>,
    risk: f64,
    trajectory: Vec<f64>,
    prune_epochs: Vec<usize>,
    diverged: bool,
}

fn run_restart(model: &Model, data: &RegressionDataset, s: usize, hyper: &Hyper, seed: u64) -> Run {
    let mut rng = rng(seed);
    let mut theta = model.init(&mut rng);
    let mut frozen = vec![false; model.len];
    let mut acts = vec![0.0; model.act_len];
    let mut grad = vec![0.0; model.len];
    let mut cand = vec![0.0; model.len];
    let plan = schedule(hyper.epochs, s, model.len);
    let mut step = hyper.step;
    let mut trajectory = Vec::with_capacity(hyper.epochs);
    let mut prune_epochs = Vec::new();

    for epoch in 0..hyper.epochs {
        for &(at, keep) in &plan {
            if at == epoch {
                prune(&mut theta, &mut frozen, keep);
                if !prune_epochs.contains(&epoch) {
                    prune_epochs.push(epoch);
                }
            }
        }
        let mut risk = model.risk_and_grad(&theta, data, &mut grad, &mut acts);
        if !risk.is_finite() {
            return Run {
                theta,
                risk,
                trajectory,
                prune_epochs,
                diverged: true,
            };
        }
        for _ in 0..MAX_HALVINGS {
            for i in 0..model.len {
                cand[i] = if frozen[i] {
                    0.0
                } else {
                    (theta[i] - step * grad[i]).clamp(-1.0, 1.0)
                };
            }
            let rc = model.risk(&cand, data, &mut acts);
            if rc <= risk {
                std::mem::swap(&mut theta, &mut cand);
                risk = rc;
                step = (step * 2.0).min(MAX_STEP);
                break;
            }
            step *= 0.5;
        }
        trajectory.push(risk);
    }
    if theta.iter().filter(|t| **t != 0.0).count() > s {
        prune(&mut theta, &mut frozen, s);
        prune_epochs.push(hyper.epochs);
    }
    let risk = model.risk(&theta, data, &mut acts);
    Run {
        diverged: !risk.is_finite(),
        theta,
        risk,
        trajectory,
        prune_epochs,
    }
}

/// Fits a network of architecture `arch` with at most `arch.sparsity`
/// non-zero parameters, keeping the best of `hyper.restarts` runs.
pub fn fit_erm(data: &RegressionDataset, arch: &Architecture, hyper: &Hyper) -> Result<FitResult> {
    if arch.widths.len() != arch.depth + 2 {
        return Err(Error::shape(
            "arch.widths",
            format!("expected {} entries, got {}", arch.depth + 2, arch.widths.len()),
        ));
    }
    if arch.widths.contains(&0) {
        return Err(Error::arg("arch.widths", "widths must be positive"));
    }
    if arch.widths[0] != data.d || arch.widths[arch.depth + 1] != 1 {
        return Err(Error::shape(
            "arch.widths",
            format!("network must map {} -> 1, got {:?}", data.d, arch.widths),
        ));
    }
    let cap = capacity(&arch.widths);
    if arch.sparsity > cap {
        return Err(Error::arg(
            "s_target",
            format!("{} exceeds the capacity {cap}", arch.sparsity),
        ));
    }
    if hyper.restarts == 0 {
        return Err(Error::arg("restarts", "at least one restart is required"));
    }
    if !(hyper.step > 0.0 && hyper.step.is_finite()) {
        return Err(Error::arg("step", "must be positive"));
    }
    if !(arch.sup_bound > 0.0) {
        return Err(Error::arg("F", "must be positive"));
    }
    let model = Model::new(&arch.widths);
    let runs: Vec<Run> = (0..hyper.restarts)
        .into_par_iter()
        .map(|k| run_restart(&model, data, arch.sparsity, hyper, derive_seed(hyper.seed, k as u64)))
        .collect();

    let restart_risks: Vec<f64> = runs
        .iter()
        .map(|r| if r.diverged { f64::NAN } else { r.risk })
        .collect();
    let diverged = runs.iter().filter(|r| r.diverged).count();
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.diverged)
        .min_by(|a, b| a.1.risk.total_cmp(&b.1.risk).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Diverged(format!("all {} restarts produced a non-finite risk", hyper.restarts)))?;
    let finished: Vec<f64> = restart_risks.iter().copied().filter(|r| r.is_finite()).collect();
    let best_risk = runs[best].risk;
    let gap = finished.iter().map(|r| r - best_risk).sum::<f64>() / finished.len() as f64;

    let run = runs.into_iter().nth(best).expect("index in range");
    let net = model.to_network(&run.theta, arch.sup_bound)?;
    let max_out = max_abs_output(&net, data)?;
    Ok(FitResult {
        empirical_risk: empirical_risk(&net, data)?,
        net,
        restarts: hyper.restarts,
        diverged_restarts: diverged,
        restart_risks,
        best_restart_risk_gap: gap,
        trajectory: run.trajectory,
        prune_epochs: run.prune_epochs,
        max_train_output: max_out,
        exceeds_sup_bound: max_out > arch.sup_bound,
        dataset_id: data.fingerprint(),
    })
}

/// `R(fit) - min` over `fit` and the pool. The minimum over a finite pool
/// stands in for the unavailable global minimum, so this over-estimates the
/// optimization gap.
pub fn delta_proxy(fit: &FitResult, reference_fits: &[FitResult]) -> Result<f64> {
    if let Some(i) = reference_fits.iter().position(|r| r.dataset_id != fit.dataset_id) {
        return Err(Error::arg(
            format!("reference_fits[{i}]"),
            "fitted on a different dataset",
        ));
    }
    let min = reference_fits
        .iter()
        .map(|r| r.empirical_risk)
        .fold(fit.empirical_risk, f64::min);
    Ok(fit.empirical_risk - min)
}
