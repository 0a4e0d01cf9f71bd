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

//! Function-preserving combinators on sparse networks: zero-padding to wider
//! architectures, composition through a shifted activation, depth
//! synchronization by identity layers, block-diagonal parallelization and
//! input rewiring.

use crate::error::{Error, Result};
use crate::network::{Entry, Layer, SparseNetwork};

/// Where [`sync_depth`] inserts its identity layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Before the first layer. Preserves the function on nonnegative inputs.
    #[default]
    Input,
    /// After the output layer. Preserves the function only where every
    /// output coordinate is nonnegative; the caller asserts this.
    Output,
}

/// Embeds `net` into an architecture with the same depth and end widths but
/// wider hidden layers. New units have no weights and a zero shift.
pub fn enlarge(net: &SparseNetwork, target_widths: &[usize]) -> Result<SparseNetwork> {
    let widths = net.widths();
    if target_widths.len() != widths.len() {
        return Err(Error::shape(
            "target_widths",
            format!("expected {} widths, got {}", widths.len(), target_widths.len()),
        ));
    }
    let n = widths.len();
    if target_widths[0] != widths[0] || target_widths[n - 1] != widths[n - 1] {
        return Err(Error::shape("target_widths", "input and output widths must not change"));
    }
    if let Some(i) = (0..n).find(|&i| target_widths[i] < widths[i]) {
        return Err(Error::shape(
            format!("target_widths[{i}]"),
            format!("cannot embed width {} into {}", widths[i], target_widths[i]),
        ));
    }
    let depth = net.depth();
    let layers = net
        .layers()
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let mut shift = l.shift().to_vec();
            if j < depth {
                shift.resize(target_widths[j + 1], 0.0);
            }
            Layer::from_parts(target_widths[j + 1], target_widths[j], l.entries().to_vec(), shift)
        })
        .collect();
    SparseNetwork::new(target_widths.to_vec(), layers, net.sup_bound())
}

/// The network `x -> outer(s_v(inner(x)))`. The output layer of `inner`
/// becomes a hidden layer with shift `v`, so the depth is
/// `L_outer + L_inner + 1`.
pub fn compose(outer: &SparseNetwork, inner: &SparseNetwork, v: &[f64]) -> Result<SparseNetwork> {
    if inner.output_dim() != outer.input_dim() {
        return Err(Error::shape(
            "compose",
            format!(
                "inner network has {} outputs but outer network expects {} inputs",
                inner.output_dim(),
                outer.input_dim()
            ),
        ));
    }
    if v.len() != inner.output_dim() {
        return Err(Error::shape(
            "v",
            format!("expected {} shifts, got {}", inner.output_dim(), v.len()),
        ));
    }
    if let Some(i) = v.iter().position(|s| !(s.abs() <= 1.0)) {
        return Err(Error::range(format!("v[{i}]"), format!("{} is outside [-1, 1]", v[i])));
    }
    let mut layers: Vec<Layer> = inner.layers().to_vec();
    let last = layers.pop().expect("at least one layer");
    layers.push(Layer::from_parts(
        last.rows(),
        last.cols(),
        last.entries().to_vec(),
        v.to_vec(),
    ));
    layers.extend(outer.layers().iter().cloned());
    let mut widths = inner.widths().to_vec();
    widths.extend_from_slice(&outer.widths()[1..]);
    SparseNetwork::new(widths, layers, outer.sup_bound())
}

/// [`compose`] with the zero shift, valid whenever `inner` is nonnegative.
pub fn compose_zero(outer: &SparseNetwork, inner: &SparseNetwork) -> Result<SparseNetwork> {
    compose(outer, inner, &vec![0.0; inner.output_dim()])
}

/// Adds `q` identity layers. Each adds `p` unit weights where `p` is the
/// input width (or output width for [`Placement::Output`]).
pub fn sync_depth(net: &SparseNetwork, q: usize, placement: Placement) -> Result<SparseNetwork> {
    if q == 0 {
        return Ok(net.clone());
    }
    match placement {
        Placement::Input => {
            let p = net.input_dim();
            let mut layers: Vec<Layer> = (0..q).map(|_| identity_hidden(p)).collect();
            layers.extend(net.layers().iter().cloned());
            let mut widths = vec![p; q];
            widths.extend_from_slice(net.widths());
            SparseNetwork::new(widths, layers, net.sup_bound())
        }
        Placement::Output => {
            let p = net.output_dim();
            let mut layers: Vec<Layer> = net.layers().to_vec();
            let last = layers.pop().expect("at least one layer");
            layers.push(Layer::from_parts(
                last.rows(),
                last.cols(),
                last.entries().to_vec(),
                vec![0.0; p],
            ));
            layers.extend((1..q).map(|_| identity_hidden(p)));
            layers.push(Layer::from_parts(p, p, diagonal(p), Vec::new()));
            let mut widths = net.widths().to_vec();
            widths.extend(std::iter::repeat_n(p, q));
            SparseNetwork::new(widths, layers, net.sup_bound())
        }
    }
}

/// Pads every network to the largest depth with identity layers at the
/// input side.
pub fn sync_all(nets: &[SparseNetwork]) -> Result<Vec<SparseNetwork>> {
    let depth = nets.iter().map(SparseNetwork::depth).max().unwrap_or(0);
    nets.iter()
        .map(|n| sync_depth(n, depth - n.depth(), Placement::Input))
        .collect()
}

/// Runs networks side by side on the same input; the output is the
/// concatenation of their outputs.
pub fn parallelize(nets: &[SparseNetwork]) -> Result<SparseNetwork> {
    let first = nets
        .first()
        .ok_or_else(|| Error::arg("nets", "at least one network is required"))?;
    if nets.len() == 1 {
        return Ok(first.clone());
    }
    let depth = first.depth();
    let p0 = first.input_dim();
    for (k, n) in nets.iter().enumerate() {
        if n.depth() != depth {
            return Err(Error::shape(
                format!("nets[{k}]"),
                format!("depth {} differs from {depth}", n.depth()),
            ));
        }
        if n.input_dim() != p0 {
            return Err(Error::shape(
                format!("nets[{k}]"),
                format!("input width {} differs from {p0}", n.input_dim()),
            ));
        }
    }
    let mut widths = vec![p0];
    for i in 1..depth + 2 {
        widths.push(nets.iter().map(|n| n.widths()[i]).sum());
    }
    let mut layers = Vec::with_capacity(depth + 1);
    for j in 0..=depth {
        let mut entries = Vec::new();
        let mut shift = Vec::new();
        let (mut row_off, mut col_off) = (0, 0);
        for n in nets {
            let l = &n.layers()[j];
            entries.extend(l.entries().iter().map(|e| Entry {
                row: e.row + row_off,
                col: e.col + col_off,
                value: e.value,
            }));
            shift.extend_from_slice(l.shift());
            row_off += l.rows();
            if j > 0 {
                col_off += l.cols();
            }
        }
        layers.push(Layer::from_parts(widths[j + 1], widths[j], entries, shift));
    }
    SparseNetwork::new(widths, layers, None)
}

/// The network `x -> net(x[sources[0]], ..., x[sources[k]])` on inputs of
/// width `input_dim`. Sources must be distinct so no weights merge.
pub fn remap_inputs(net: &SparseNetwork, input_dim: usize, sources: &[usize]) -> Result<SparseNetwork> {
    if sources.len() != net.input_dim() {
        return Err(Error::shape(
            "sources",
            format!("expected {} sources, got {}", net.input_dim(), sources.len()),
        ));
    }
    let mut seen = vec![false; input_dim];
    for (k, &s) in sources.iter().enumerate() {
        if s >= input_dim {
            return Err(Error::shape(
                format!("sources[{k}]"),
                format!("{s} >= input width {input_dim}"),
            ));
        }
        if seen[s] {
            return Err(Error::arg(format!("sources[{k}]"), format!("input {s} is used twice")));
        }
        seen[s] = true;
    }
    let mut layers = net.layers().to_vec();
    let first = &layers[0];
    let mut entries: Vec<Entry> = first
        .entries()
        .iter()
        .map(|e| Entry {
            col: sources[e.col],
            ..*e
        })
        .collect();
    entries.sort_by_key(|e| (e.row, e.col));
    layers[0] = Layer::from_parts(first.rows(), input_dim, entries, first.shift().to_vec());
    let mut widths = net.widths().to_vec();
    widths[0] = input_dim;
    SparseNetwork::new(widths, layers, net.sup_bound())
}

/// A depth-0 network choosing coordinates of an input of width `input_dim`.
/// `None` rows output zero; paired with a composition shift of `-1` they
/// become constant ones.
pub fn selector(input_dim: usize, picks: &[Option<usize>]) -> Result<SparseNetwork> {
    let mut entries = Vec::new();
    for (row, p) in picks.iter().enumerate() {
        if let Some(col) = *p {
            if col >= input_dim {
                return Err(Error::shape(
                    format!("picks[{row}]"),
                    format!("{col} >= input width {input_dim}"),
                ));
            }
            entries.push(Entry { row, col, value: 1.0 });
        }
    }
    SparseNetwork::linear(Layer::from_parts(picks.len(), input_dim, entries, Vec::new()))
}

fn diagonal(p: usize) -> Vec<Entry> {
    (0..p)
        .map(|i| Entry {
            row: i,
            col: i,
            value: 1.0,
        })
        .collect()
}

fn identity_hidden(p: usize) -> Layer {
    Layer::from_parts(p, p, diagonal(p), vec![0.0; p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerBuilder;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random::<f64>()).collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn enlarge_pads_and_preserves() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = SparseNetwork::random(&mut rng, &[1, 3, 1], 1.0);
        let big = enlarge(&net, &[1, 5, 1]).unwrap();
        assert_eq!(big.widths(), &[1, 5, 1]);
        assert_eq!(big.count_active().active, net.count_active().active);
        for _ in 0..100 {
            let x = [rng.random_range(-1.0..1.0)];
            assert!(max_diff(&net.evaluate(&x).unwrap(), &big.evaluate(&x).unwrap()) <= 1e-12);
        }
        assert_eq!(enlarge(&net, &[1, 3, 1]).unwrap(), net);
        assert!(matches!(enlarge(&net, &[1, 2, 1]), Err(Error::Shape { .. })));
    }

    #[test]
    fn compose_with_identity_inner() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let outer = SparseNetwork::random(&mut rng, &[2, 4, 1], 1.0);
        let net = compose_zero(&outer, &SparseNetwork::identity(2)).unwrap();
        assert_eq!(net.depth(), outer.depth() + 1);
        for _ in 0..50 {
            let x = unit_point(&mut rng, 2);
            assert!(max_diff(&net.evaluate(&x).unwrap(), &outer.evaluate(&x).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn compose_applies_shift() {
        // inner outputs x, outer is the identity: result is (x - v)_+
        let net = compose(&SparseNetwork::identity(1), &SparseNetwork::identity(1), &[-0.25]).unwrap();
        assert_eq!(net.evaluate(&[0.5]).unwrap(), vec![0.75]);
        let net = compose(&SparseNetwork::identity(1), &SparseNetwork::identity(1), &[0.75]).unwrap();
        assert_eq!(net.evaluate(&[0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn compose_errors() {
        let a = SparseNetwork::identity(2);
        let b = SparseNetwork::identity(3);
        assert!(matches!(compose_zero(&a, &b), Err(Error::Shape { .. })));
        assert!(matches!(compose(&a, &a, &[0.0, 1.5]), Err(Error::Range { .. })));
    }

    #[test]
    fn sync_depth_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = SparseNetwork::random(&mut rng, &[2, 3, 1], 0.7);
        assert_eq!(sync_depth(&net, 0, Placement::Input).unwrap(), net);
        let deep = sync_depth(&net, 3, Placement::Input).unwrap();
        assert_eq!(deep.depth(), net.depth() + 3);
        assert_eq!(deep.widths(), &[2, 2, 2, 2, 3, 1]);
        assert_eq!(deep.count_active().active, net.count_active().active + 6);
        for _ in 0..200 {
            let x = unit_point(&mut rng, 2);
            assert!(max_diff(&net.evaluate(&x).unwrap(), &deep.evaluate(&x).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn sync_at_output_for_nonnegative_signal() {
        let mut b = LayerBuilder::output(1, 2);
        b.set(0, 0, 0.5).set(0, 1, 0.5);
        let net = SparseNetwork::linear(b.build()).unwrap();
        let deep = sync_depth(&net, 2, Placement::Output).unwrap();
        assert_eq!(deep.depth(), 2);
        assert_eq!(deep.count_active().active, net.count_active().active + 2);
        assert_eq!(deep.evaluate(&[0.2, 0.4]).unwrap(), net.evaluate(&[0.2, 0.4]).unwrap());
    }

    #[test]
    fn parallel_concatenates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = SparseNetwork::random(&mut rng, &[3, 4, 5, 2], 0.6);
        let g = SparseNetwork::random(&mut rng, &[3, 2, 2, 1], 0.6);
        let fg = parallelize(&[f.clone(), g.clone()]).unwrap();
        assert_eq!(fg.widths(), &[3, 6, 7, 3]);
        assert_eq!(
            fg.count_active().active,
            f.count_active().active + g.count_active().active
        );
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut want = f.evaluate(&x).unwrap();
            want.extend(g.evaluate(&x).unwrap());
            assert!(max_diff(&fg.evaluate(&x).unwrap(), &want) <= 1e-12);
        }
        assert_eq!(parallelize(std::slice::from_ref(&f)).unwrap(), f);
        let h = SparseNetwork::random(&mut rng, &[3, 2, 1], 0.6);
        assert!(parallelize(&[f, h]).is_err());
    }

    #[test]
    fn remap_and_select() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = SparseNetwork::random(&mut rng, &[2, 4, 1], 1.0);
        let wired = remap_inputs(&net, 4, &[3, 1]).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(wired.evaluate(&x).unwrap(), net.evaluate(&[0.4, 0.2]).unwrap());
        assert!(remap_inputs(&net, 4, &[1, 1]).is_err());
        let sel = selector(3, &[Some(2), None, Some(0)]).unwrap();
        assert_eq!(sel.evaluate(&[0.1, 0.2, 0.3]).unwrap(), vec![0.3, 0.0, 0.1]);
        let padded = compose(&SparseNetwork::identity(3), &sel, &[0.0, -1.0, 0.0]).unwrap();
        assert_eq!(padded.evaluate(&[0.1, 0.2, 0.3]).unwrap(), vec![0.3, 1.0, 0.1]);
    }

    /// Networks whose outputs are nonnegative, so zero-shift composition is exact.
    fn nonneg_net(rng: &mut ChaCha8Rng, p0: usize, out: usize) -> SparseNetwork {
        let depth = rng.random_range(0..3);
        let mut widths = vec![p0];
        widths.extend((0..depth).map(|_| rng.random_range(1..=5)));
        widths.push(out);
        let net = SparseNetwork::random(rng, &widths, 0.8);
        sync_depth(&net, 1, Placement::Output).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn composition_is_associative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = nonneg_net(&mut rng, 2, 3);
            let g = nonneg_net(&mut rng, 3, 2);
            let h = nonneg_net(&mut rng, 2, 1);
            let left = compose_zero(&h, &compose_zero(&g, &f).unwrap()).unwrap();
            let right = compose_zero(&compose_zero(&h, &g).unwrap(), &f).unwrap();
            prop_assert_eq!(left.depth(), f.depth() + g.depth() + h.depth() + 2);
            prop_assert_eq!(left.depth(), right.depth());
            let x = unit_point(&mut rng, 2);
            prop_assert!(max_diff(&left.evaluate(&x).unwrap(), &right.evaluate(&x).unwrap()) <= 1e-12);
        }

        #[test]
        fn compose_bookkeeping(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = nonneg_net(&mut rng, 2, 3);
            let g = SparseNetwork::random(&mut rng, &[3, 4, 1], 0.7);
            let gf = compose_zero(&g, &f).unwrap();
            let mut widths = f.widths().to_vec();
            widths.extend_from_slice(&g.widths()[1..]);
            prop_assert_eq!(gf.widths(), &widths[..]);
            prop_assert_eq!(gf.count_active().active, f.count_active().active + g.count_active().active);
            let x = unit_point(&mut rng, 2);
            let want = g.evaluate(&f.evaluate(&x).unwrap()).unwrap();
            prop_assert!(max_diff(&gf.evaluate(&x).unwrap(), &want) <= 1e-12);
        }
    }
}
