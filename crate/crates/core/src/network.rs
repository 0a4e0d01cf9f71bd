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

//! Sparse ReLU networks.
//!
//! A network with `L` hidden layers and widths `p = (p_0, ..., p_{L+1})`
//! computes
//!
//! ```text
//! x -> W_L s_{v_L} W_{L-1} ... s_{v_1} W_0 x,    s_v(y)_i = max(y_i - v_i, 0)
//! ```
//!
//! Layer `j` stores `W_j` (shape `p_{j+1} x p_j`) as sorted `(row, col, value)`
//! entries together with the shift `v_{j+1}` applied to its output. The output
//! layer carries an empty shift: there is no activation after `W_L`.
//!
//! Every stored parameter lies in `[-1, 1]` and no entry stores an exact zero,
//! so the number of entries is the sparsity count.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current version of the JSON network document.
pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
    shift: Vec<f64>,
}

impl Layer {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Non-zero weights, sorted by `(row, col)`.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Shift applied before the activation; empty on the output layer.
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn active_count(&self) -> usize {
        self.entries.len() + self.shift.iter().filter(|v| **v != 0.0).count()
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, entries: Vec<Entry>, shift: Vec<f64>) -> Self {
        Layer {
            rows,
            cols,
            entries,
            shift,
        }
    }
}

/// Accumulates the weights of one layer. Zero values are dropped on build.
#[derive(Debug, Clone)]
pub struct LayerBuilder {
    rows: usize,
    cols: usize,
    weights: BTreeMap<(usize, usize), f64>,
    shift: Vec<f64>,
}

impl LayerBuilder {
    /// A hidden layer (with a shift vector of length `rows`).
    pub fn hidden(rows: usize, cols: usize) -> Self {
        LayerBuilder {
            rows,
            cols,
            weights: BTreeMap::new(),
            shift: vec![0.0; rows],
        }
    }

    /// The output layer (no shift).
    pub fn output(rows: usize, cols: usize) -> Self {
        LayerBuilder {
            rows,
            cols,
            weights: BTreeMap::new(),
            shift: Vec::new(),
        }
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> &mut Self {
        assert!(row < self.rows && col < self.cols, "entry ({row}, {col}) out of bounds");
        self.weights.insert((row, col), value);
        self
    }

    pub fn set_shift(&mut self, row: usize, value: f64) -> &mut Self {
        assert!(!self.shift.is_empty(), "output layers carry no shift");
        self.shift[row] = value;
        self
    }

    pub fn build(self) -> Layer {
        let entries = self
            .weights
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|((row, col), value)| Entry { row, col, value })
            .collect();
        Layer {
            rows: self.rows,
            cols: self.cols,
            entries,
            shift: self.shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStats {
    /// Non-zero weights plus non-zero shifts.
    pub active: usize,
    /// Parameter count of the fully connected architecture with the same widths.
    pub capacity: usize,
    pub per_layer_active: Vec<usize>,
}

/// Output of [`SparseNetwork::evaluate_flagged`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedOutput {
    pub values: Vec<f64>,
    /// `true` where `|value| > F`; all `false` when no sup bound is set.
    pub exceeds_bound: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseNetwork {
    widths: Vec<usize>,
    layers: Vec<Layer>,
    sup_bound: Option<f64>,
}

impl SparseNetwork {
    /// Validates shapes, ranges and entry ordering.
    pub fn new(widths: Vec<usize>, layers: Vec<Layer>, sup_bound: Option<f64>) -> Result<Self> {
        validate(&widths, &layers, sup_bound)?;
        Ok(SparseNetwork {
            widths,
            layers,
            sup_bound,
        })
    }

    /// `x -> W x` with no hidden layer.
    pub fn linear(layer: Layer) -> Result<Self> {
        let widths = vec![layer.cols, layer.rows];
        Self::new(widths, vec![layer], None)
    }

    /// The `dim x dim` identity map with no hidden layer.
    pub fn identity(dim: usize) -> Self {
        let mut b = LayerBuilder::output(dim, dim);
        for i in 0..dim {
            b.set(i, i, 1.0);
        }
        Self::linear(b.build()).expect("identity is valid")
    }

    /// A random network with the given widths. Each weight and shift is
    /// non-zero with probability `density` and then uniform on `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, widths: &[usize], density: f64) -> Self {
        let depth = widths.len() - 2;
        let layers = (0..=depth)
            .map(|j| {
                let mut b = if j < depth {
                    LayerBuilder::hidden(widths[j + 1], widths[j])
                } else {
                    LayerBuilder::output(widths[j + 1], widths[j])
                };
                for row in 0..widths[j + 1] {
                    for col in 0..widths[j] {
                        if rng.random_bool(density) {
                            b.set(row, col, rng.random_range(-1.0..=1.0));
                        }
                    }
                    if j < depth && rng.random_bool(density) {
                        b.set_shift(row, rng.random_range(-1.0..=1.0));
                    }
                }
                b.build()
            })
            .collect();
        Self::new(widths.to_vec(), layers, None).expect("random parameters are in range")
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("widths has at least two entries")
    }

    /// Largest hidden width, 0 when there is no hidden layer.
    pub fn max_hidden_width(&self) -> usize {
        let l = self.widths.len();
        self.widths[1..l - 1].iter().copied().max().unwrap_or(0)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn with_sup_bound(mut self, bound: Option<f64>) -> Result<Self> {
        check_sup_bound(bound)?;
        self.sup_bound = bound;
        Ok(self)
    }

    pub(crate) fn into_parts(self) -> (Vec<usize>, Vec<Layer>, Option<f64>) {
        (self.widths, self.layers, self.sup_bound)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut ev = Evaluator::new(self);
        ev.eval(x).map(<[f64]>::to_vec)
    }

    /// Evaluates and marks coordinates whose magnitude exceeds the sup bound.
    /// Values are never clamped.
    pub fn evaluate_flagged(&self, x: &[f64]) -> Result<FlaggedOutput> {
        let values = self.evaluate(x)?;
        let exceeds_bound = match self.sup_bound {
            Some(f) => values.iter().map(|v| v.abs() > f).collect(),
            None => vec![false; values.len()],
        };
        Ok(FlaggedOutput { values, exceeds_bound })
    }

    pub fn count_active(&self) -> NetworkStats {
        let per_layer_active: Vec<usize> = self.layers.iter().map(Layer::active_count).collect();
        NetworkStats {
            active: per_layer_active.iter().sum(),
            capacity: capacity(&self.widths),
            per_layer_active,
        }
    }

    /// Deletes hidden units whose outgoing weights are all zero, together
    /// with their incoming row and shift, until no such unit remains. The
    /// computed function is unchanged. A layer keeps at least one unit.
    pub fn remove_inactive(&self) -> SparseNetwork {
        let mut widths = self.widths.clone();
        let mut layers = self.layers.clone();
        let depth = self.depth();
        loop {
            let mut changed = false;
            for i in 1..=depth {
                let mut has_outgoing = vec![false; widths[i]];
                for e in &layers[i].entries {
                    has_outgoing[e.col] = true;
                }
                let mut keep: Vec<usize> = (0..widths[i]).filter(|&u| has_outgoing[u]).collect();
                if keep.is_empty() {
                    keep.push(0);
                }
                if keep.len() == widths[i] {
                    continue;
                }
                let mut map = vec![usize::MAX; widths[i]];
                for (new, &old) in keep.iter().enumerate() {
                    map[old] = new;
                }
                let incoming = &mut layers[i - 1];
                incoming.entries.retain(|e| map[e.row] != usize::MAX);
                for e in &mut incoming.entries {
                    e.row = map[e.row];
                }
                incoming.shift = keep.iter().map(|&u| incoming.shift[u]).collect();
                incoming.rows = keep.len();

                let outgoing = &mut layers[i];
                outgoing.entries.retain(|e| map[e.col] != usize::MAX);
                for e in &mut outgoing.entries {
                    e.col = map[e.col];
                }
                outgoing.cols = keep.len();
                widths[i] = keep.len();
                changed = true;
            }
            if !changed {
                break;
            }
        }
        SparseNetwork {
            widths,
            layers,
            sup_bound: self.sup_bound,
        }
    }

    /// Appends two hidden layers so the scalar output becomes
    /// `s(1 - s(1 - y)) = min(max(y, 0), 1)`. Adds exactly four parameters.
    pub fn clip_unit(&self) -> Result<SparseNetwork> {
        if self.output_dim() != 1 {
            return Err(Error::Unsupported(format!(
                "clip_unit needs a scalar output, network has {} outputs",
                self.output_dim()
            )));
        }
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("at least one layer");
        let negated = last.entries.iter().map(|e| Entry { value: -e.value, ..*e }).collect();
        layers.push(Layer::from_parts(1, last.cols, negated, vec![-1.0]));
        layers.push(Layer::from_parts(
            1,
            1,
            vec![Entry {
                row: 0,
                col: 0,
                value: -1.0,
            }],
            vec![-1.0],
        ));
        layers.push(Layer::from_parts(
            1,
            1,
            vec![Entry {
                row: 0,
                col: 0,
                value: 1.0,
            }],
            Vec::new(),
        ));
        let mut widths = self.widths.clone();
        let n = widths.len();
        widths.splice(n - 1..n - 1, [1, 1]);
        SparseNetwork::new(widths, layers, self.sup_bound)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("network documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
            field: "document".into(),
            detail: e.to_string(),
        })?;
        Self::from_document(doc)
    }

    fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            version: DOCUMENT_VERSION,
            depth: self.depth(),
            widths: self.widths.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerDocument {
                    rows: l.rows,
                    cols: l.cols,
                    triplets: l.entries.iter().map(|e| (e.row, e.col, e.value)).collect(),
                    shift: l.shift.clone(),
                })
                .collect(),
            sup_bound: self.sup_bound,
            metadata: None,
        }
    }

    fn from_document(doc: NetworkDocument) -> Result<Self> {
        if doc.version != DOCUMENT_VERSION {
            return Err(Error::Parse {
                field: "version".into(),
                detail: format!("unsupported version {} (expected {DOCUMENT_VERSION})", doc.version),
            });
        }
        if doc.widths.len() < 2 || doc.depth != doc.widths.len() - 2 {
            return Err(Error::shape(
                "depth",
                format!("depth {} does not match {} widths", doc.depth, doc.widths.len()),
            ));
        }
        let layers = doc
            .layers
            .into_iter()
            .map(|l| {
                let mut entries: Vec<Entry> = l
                    .triplets
                    .into_iter()
                    .map(|(row, col, value)| Entry { row, col, value })
                    .collect();
                entries.sort_by_key(|e| (e.row, e.col));
                Layer::from_parts(l.rows, l.cols, entries, l.shift)
            })
            .collect();
        Self::new(doc.widths, layers, doc.sup_bound)
    }
}

/// Reusable scratch space for evaluating one network many times.
pub struct Evaluator<'a> {
    net: &'a SparseNetwork,
    cur: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a SparseNetwork) -> Self {
        let max = net.widths.iter().copied().max().unwrap_or(0);
        Evaluator {
            net,
            cur: Vec::with_capacity(max),
            next: Vec::with_capacity(max),
        }
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<&[f64]> {
        if x.len() != self.net.input_dim() {
            return Err(Error::shape(
                "input",
                format!("expected {} coordinates, got {}", self.net.input_dim(), x.len()),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("input", "non-finite coordinate"));
        }
        self.cur.clear();
        self.cur.extend_from_slice(x);
        for layer in &self.net.layers {
            self.next.clear();
            self.next.resize(layer.rows, 0.0);
            for e in &layer.entries {
                self.next[e.row] += e.value * self.cur[e.col];
            }
            if !layer.shift.is_empty() {
                for (y, v) in self.next.iter_mut().zip(&layer.shift) {
                    *y = (*y - v).max(0.0);
                }
            }
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        Ok(&self.cur)
    }
}

/// Total parameter count `sum_l (p_l + 1) p_{l+1} - p_{L+1}` of the fully
/// connected architecture with widths `p`.
pub fn capacity(widths: &[usize]) -> usize {
    let total: usize = widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum();
    total - widths.last().copied().unwrap_or(0)
}

fn check_sup_bound(bound: Option<f64>) -> Result<()> {
    match bound {
        Some(f) if !(f.is_finite() && f > 0.0) => Err(Error::range(
            "sup_bound",
            format!("{f} is not a positive finite number"),
        )),
        _ => Ok(()),
    }
}

fn check_param(field: impl FnOnce() -> String, value: f64) -> Result<()> {
    if !value.is_finite() || value.abs() > 1.0 {
        return Err(Error::range(field(), format!("parameter {value} outside [-1, 1]")));
    }
    Ok(())
}

fn validate(widths: &[usize], layers: &[Layer], sup_bound: Option<f64>) -> Result<()> {
    if widths.len() < 2 {
        return Err(Error::shape("widths", "need at least input and output widths"));
    }
    if let Some(i) = widths.iter().position(|&w| w == 0) {
        return Err(Error::shape(format!("widths[{i}]"), "widths must be positive"));
    }
    if layers.len() != widths.len() - 1 {
        return Err(Error::shape(
            "layers",
            format!("{} layers for {} widths", layers.len(), widths.len()),
        ));
    }
    let depth = layers.len() - 1;
    for (j, layer) in layers.iter().enumerate() {
        if layer.rows != widths[j + 1] {
            return Err(Error::shape(
                format!("layers[{j}].rows"),
                format!("{} rows, widths require {}", layer.rows, widths[j + 1]),
            ));
        }
        if layer.cols != widths[j] {
            return Err(Error::shape(
                format!("layers[{j}].cols"),
                format!("{} cols, widths require {}", layer.cols, widths[j]),
            ));
        }
        let expected_shift = if j < depth { layer.rows } else { 0 };
        if layer.shift.len() != expected_shift {
            return Err(Error::shape(
                format!("layers[{j}].shift"),
                format!("length {}, expected {expected_shift}", layer.shift.len()),
            ));
        }
        let mut prev: Option<(usize, usize)> = None;
        for (k, e) in layer.entries.iter().enumerate() {
            let field = || format!("layers[{j}].triplets[{k}]");
            if e.row >= layer.rows || e.col >= layer.cols {
                return Err(Error::shape(
                    field(),
                    format!("index ({}, {}) outside {}x{}", e.row, e.col, layer.rows, layer.cols),
                ));
            }
            if let Some(p) = prev {
                if p == (e.row, e.col) {
                    return Err(Error::shape(field(), format!("duplicate entry ({}, {})", e.row, e.col)));
                }
                if p > (e.row, e.col) {
                    return Err(Error::shape(field(), "entries are not sorted by (row, col)"));
                }
            }
            prev = Some((e.row, e.col));
            if e.value == 0.0 {
                return Err(Error::range(field(), "stored weight is exactly zero"));
            }
            check_param(field, e.value)?;
        }
        for (k, v) in layer.shift.iter().enumerate() {
            check_param(|| format!("layers[{j}].shift[{k}]"), *v)?;
        }
    }
    check_sup_bound(sup_bound)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDocument {
    version: u32,
    depth: usize,
    widths: Vec<usize>,
    layers: Vec<LayerDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sup_bound: Option<f64>,
    /// Free-form annotations from the producing tool; ignored on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDocument {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
    shift: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense reference: materialize every matrix and apply the recursion directly.
    fn dense_eval(net: &SparseNetwork, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let depth = net.depth();
        for (j, layer) in net.layers().iter().enumerate() {
            let mut m = vec![vec![0.0; layer.cols()]; layer.rows()];
            for e in layer.entries() {
                m[e.row][e.col] = e.value;
            }
            let mut next: Vec<f64> = m
                .iter()
                .map(|row| row.iter().zip(&cur).map(|(w, v)| w * v).sum())
                .collect();
            if j < depth {
                for (y, v) in next.iter_mut().zip(layer.shift()) {
                    *y = if *y - v > 0.0 { *y - v } else { 0.0 };
                }
            }
            cur = next;
        }
        cur
    }

    fn single(rows: usize, cols: usize, entries: &[(usize, usize, f64)], shift: Option<&[f64]>) -> Layer {
        let mut b = match shift {
            Some(_) => LayerBuilder::hidden(rows, cols),
            None => LayerBuilder::output(rows, cols),
        };
        for &(r, c, v) in entries {
            b.set(r, c, v);
        }
        if let Some(s) = shift {
            for (i, v) in s.iter().enumerate() {
                b.set_shift(i, *v);
            }
        }
        b.build()
    }

    #[test]
    fn identity_without_hidden_layer() {
        let net = SparseNetwork::identity(2);
        assert_eq!(net.evaluate(&[0.3, -0.5]).unwrap(), vec![0.3, -0.5]);
    }

    #[test]
    fn shift_kills_negative_preactivation() {
        let net = SparseNetwork::new(
            vec![1, 1, 1],
            vec![
                single(1, 1, &[(0, 0, 1.0)], Some(&[0.5])),
                single(1, 1, &[(0, 0, 1.0)], None),
            ],
            None,
        )
        .unwrap();
        assert_eq!(net.evaluate(&[0.2]).unwrap(), vec![0.0]);
    }

    #[test]
    fn metadata_is_ignored_on_load() {
        let net = SparseNetwork::identity(2);
        let mut doc: serde_json::Value = serde_json::from_str(&net.to_json()).unwrap();
        doc["metadata"] = serde_json::json!({ "seed": 3, "note": "x" });
        assert_eq!(SparseNetwork::from_json(&doc.to_string()).unwrap(), net);
        doc["extra"] = serde_json::json!(1);
        assert!(SparseNetwork::from_json(&doc.to_string()).is_err());
    }

    #[test]
    fn shape_errors() {
        let net = SparseNetwork::identity(2);
        assert!(matches!(net.evaluate(&[1.0]), Err(Error::Shape { .. })));
        let bad = SparseNetwork::new(vec![2, 3], vec![single(2, 2, &[], None)], None);
        assert!(matches!(bad, Err(Error::Shape { .. })));
    }

    #[test]
    fn capacity_of_dense_architecture() {
        // (4+1)*3 + (3+1)*3 + (3+1)*2 - 2, enumerated entry by entry
        let widths = [4usize, 3, 3, 2];
        let mut enumerated = 0;
        for j in 0..3 {
            enumerated += widths[j] * widths[j + 1];
            if j < 2 {
                enumerated += widths[j + 1];
            }
        }
        assert_eq!(enumerated, 33);
        assert_eq!(capacity(&widths), 33);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dense = SparseNetwork::random(&mut rng, &widths, 1.0);
        let stats = dense.count_active();
        assert_eq!(stats.capacity, 33);
        assert_eq!(stats.active, 33);
    }

    #[test]
    fn counting_active_parameters() {
        let zero = SparseNetwork::new(
            vec![2, 2, 1],
            vec![single(2, 2, &[], Some(&[0.0, 0.0])), single(1, 2, &[], None)],
            None,
        )
        .unwrap();
        assert_eq!(zero.count_active().active, 0);

        let net = SparseNetwork::new(
            vec![3, 3, 2],
            vec![
                single(
                    3,
                    3,
                    &[(0, 0, 0.5), (0, 2, -0.5), (1, 1, 1.0), (2, 0, 0.25), (2, 2, 0.1)],
                    Some(&[0.3, 0.0, -0.2]),
                ),
                single(2, 3, &[(0, 0, 1.0), (1, 2, -1.0)], None),
            ],
            None,
        )
        .unwrap();
        let stats = net.count_active();
        assert_eq!(stats.active, 9);
        assert_eq!(stats.per_layer_active, vec![7, 2]);
    }

    #[test]
    fn removes_unit_without_outgoing_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = SparseNetwork::random(&mut rng, &[2, 5, 4, 1], 1.0);
        // zero the outgoing column of hidden unit 3 in layer 1
        let (widths, mut layers, _) = base.clone().into_parts();
        layers[1].entries.retain(|e| e.col != 3);
        let net = SparseNetwork::new(widths, layers, None).unwrap();
        let pruned = net.remove_inactive();
        assert_eq!(pruned.widths(), &[2, 4, 4, 1]);
        for _ in 0..100 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let a = net.evaluate(&x).unwrap()[0];
            let b = pruned.evaluate(&x).unwrap()[0];
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dense_network_unchanged_by_removal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = SparseNetwork::random(&mut rng, &[3, 4, 4, 2], 1.0);
        assert_eq!(net.remove_inactive(), net);
    }

    #[test]
    fn removal_respects_sparsity_width_bound() {
        // two active parameters spread over a width-10 layer
        let net = SparseNetwork::new(
            vec![1, 10, 1],
            vec![
                single(10, 1, &[(4, 0, 0.5)], Some(&[0.0; 10])),
                single(1, 10, &[(0, 4, 1.0)], None),
            ],
            None,
        )
        .unwrap();
        assert_eq!(net.count_active().active, 2);
        let pruned = net.remove_inactive();
        assert!(pruned.widths()[1] <= 2);
        assert_eq!(pruned.evaluate(&[0.8]).unwrap(), net.evaluate(&[0.8]).unwrap());
    }

    #[test]
    fn clip_unit_clamps() {
        let scale = |w: f64| SparseNetwork::linear(single(1, 1, &[(0, 0, w)], None)).unwrap();
        // upstream output equals w * 1.0
        let cases = [(1.0, 1.0), (-0.3, 0.0), (0.42, 0.42)];
        for (w, expect) in cases {
            let net = scale(w).clip_unit().unwrap();
            let out = net.evaluate(&[1.0]).unwrap()[0];
            assert!((out - expect).abs() <= 1e-12, "{w} -> {out}");
        }
        // 1.7 is not a legal weight; route it through two inputs
        let net = SparseNetwork::linear(single(1, 2, &[(0, 0, 1.0), (0, 1, 0.7)], None)).unwrap();
        let before = net.count_active().active;
        let clipped = net.clip_unit().unwrap();
        assert_eq!(clipped.evaluate(&[1.0, 1.0]).unwrap(), vec![1.0]);
        assert_eq!(clipped.count_active().active, before + 4);
        assert_eq!(clipped.depth(), net.depth() + 2);
    }

    #[test]
    fn clip_unit_rejects_vector_output() {
        let err = SparseNetwork::identity(2).clip_unit().unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn sup_bound_is_flagged_not_clamped() {
        let net = SparseNetwork::new(
            vec![2, 1],
            vec![single(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)], None)],
            Some(1.5),
        )
        .unwrap();
        let out = net.evaluate_flagged(&[1.0, 1.0]).unwrap();
        assert_eq!(out.values, vec![2.0]);
        assert_eq!(out.exceeds_bound, vec![true]);
        let out = net.evaluate_flagged(&[0.5, 0.5]).unwrap();
        assert_eq!(out.exceeds_bound, vec![false]);
    }

    #[test]
    fn document_rejects_out_of_range_weight() {
        let text = r#"{"version":1,"depth":0,"widths":[1,1],"layers":[{"rows":1,"cols":1,"triplets":[[0,0,1.5]],"shift":[]}]}"#;
        match SparseNetwork::from_json(text) {
            Err(Error::Range { field, .. }) => assert_eq!(field, "layers[0].triplets[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn document_rejects_shape_mismatch() {
        let text = r#"{"version":1,"depth":0,"widths":[2,1],"layers":[{"rows":1,"cols":3,"triplets":[],"shift":[]}]}"#;
        match SparseNetwork::from_json(text) {
            Err(Error::Shape { field, .. }) => assert_eq!(field, "layers[0].cols"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn document_rejects_zero_duplicate_and_garbage() {
        let zero = r#"{"version":1,"depth":0,"widths":[1,1],"layers":[{"rows":1,"cols":1,"triplets":[[0,0,0.0]],"shift":[]}]}"#;
        assert!(matches!(SparseNetwork::from_json(zero), Err(Error::Range { .. })));
        let dup = r#"{"version":1,"depth":0,"widths":[1,1],"layers":[{"rows":1,"cols":1,"triplets":[[0,0,0.5],[0,0,0.5]],"shift":[]}]}"#;
        assert!(matches!(SparseNetwork::from_json(dup), Err(Error::Shape { .. })));
        assert!(matches!(SparseNetwork::from_json("{"), Err(Error::Parse { .. })));
        let version = r#"{"version":9,"depth":0,"widths":[1,1],"layers":[]}"#;
        assert!(matches!(SparseNetwork::from_json(version), Err(Error::Parse { .. })));
    }

    #[test]
    fn serialization_is_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = SparseNetwork::random(&mut rng, &[3, 4, 2], 0.5);
        assert_eq!(
            net.to_json(),
            SparseNetwork::from_json(&net.to_json()).unwrap().to_json()
        );
    }

    fn arb_net() -> impl Strategy<Value = (SparseNetwork, Vec<f64>)> {
        (any::<u64>(), 0usize..=5, 0.1f64..1.0).prop_map(|(seed, depth, density)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let widths: Vec<usize> = (0..depth + 2).map(|_| rng.random_range(1..=8)).collect();
            let net = SparseNetwork::random(&mut rng, &widths, density);
            let x = (0..widths[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
            (net, x)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sparse_matches_dense_oracle((net, x) in arb_net()) {
            let a = net.evaluate(&x).unwrap();
            let b = dense_eval(&net, &x);
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn round_trip_is_bit_exact((net, _x) in arb_net(), bound in proptest::option::of(0.1f64..10.0)) {
            let net = net.with_sup_bound(bound).unwrap();
            let back = SparseNetwork::from_json(&net.to_json()).unwrap();
            prop_assert_eq!(back, net);
        }

        #[test]
        fn removal_preserves_function_and_never_adds((net, x) in arb_net()) {
            let pruned = net.remove_inactive();
            prop_assert_eq!(net.evaluate(&x).unwrap(), pruned.evaluate(&x).unwrap());
            prop_assert!(pruned.count_active().active <= net.count_active().active);
            let s = net.count_active().active.max(1);
            for (i, w) in pruned.widths().iter().enumerate().skip(1).take(net.depth()) {
                prop_assert!(*w <= net.widths()[i].min(s));
            }
        }

        #[test]
        fn clipped_output_in_unit_interval(seed in any::<u64>(), x in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = SparseNetwork::random(&mut rng, &[1, 4, 1], 0.8).clip_unit().unwrap();
            let y = net.evaluate(&[x]).unwrap()[0];
            prop_assert!((0.0..=1.0).contains(&y));
        }
    }
}
