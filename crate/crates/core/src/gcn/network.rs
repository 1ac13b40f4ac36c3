//! Forward and reverse passes.
//!
//! Layer `k` computes, for every node `v`,
//! `h_v = act(mean_{u ∈ N(v)} h_u · W_k + h_v · B_k)` with the aggregate
//! taken as zero when `N(v)` is empty. The graph embedding is the sum of the
//! final node embeddings, followed by `Linear → act → Linear`.
//!
//! Neighbor means and the pooling sum add their terms in sorted order, so
//! relabeling the nodes of a graph leaves every output bit-identical.

use crate::error::{Error, Result};
use crate::graph::{Adjacency, DesignGraph};
use crate::matrix::{DenseMatrix, Trans};

use super::model::{Aggregation, GcnModel, Parameters, TargetNorm, OUTPUTS};

/// Result of [`gcn_forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// Final-layer node embeddings, one row per node.
    pub node_embeddings: DenseMatrix,
    pub pooled: Vec<f64>,
    /// Raw head output in normalized target space.
    pub normalized: [f64; OUTPUTS],
    /// Denormalized prediction in seconds (identity transform when untrained).
    pub prediction: [f64; OUTPUTS],
}

/// Intermediate values needed by the reverse pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    neighbors: Adjacency,
    /// `H_{k-1}` for each layer (the first entry is the feature matrix).
    inputs: Vec<DenseMatrix>,
    aggregates: Vec<DenseMatrix>,
    pre_activations: Vec<DenseMatrix>,
    pooled: Vec<f64>,
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
    pub output: ForwardOutput,
}

pub(crate) fn neighbor_lists(graph: &DesignGraph, aggregation: Aggregation) -> Adjacency {
    match aggregation {
        Aggregation::InNeighbors => Adjacency::predecessors(graph),
        Aggregation::Undirected => Adjacency::undirected(graph),
    }
}

/// Sort `rows` by the contents of the referenced rows of `h`. Summing in this
/// order makes reductions independent of node labeling: rows that compare
/// equal are bit-identical, so their relative order cannot change a sum.
fn canonical_order(h: &DenseMatrix, rows: &mut [usize]) {
    rows.sort_unstable_by(|&a, &b| {
        h.row(a)
            .iter()
            .zip(h.row(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn sum_rows_into(h: &DenseMatrix, rows: &[usize], out: &mut [f64]) {
    for &u in rows {
        out.iter_mut().zip(h.row(u)).for_each(|(o, x)| *o += x);
    }
}

fn mean_aggregate(h: &DenseMatrix, neighbors: &Adjacency) -> DenseMatrix {
    let d = h.cols();
    let mut out = DenseMatrix::zeros(h.rows(), d);
    let mut order = Vec::new();
    for v in 0..h.rows() {
        let nbrs = neighbors.neighbors(v);
        let row = out.row_mut(v);
        match nbrs.len() {
            0 => {}
            1 => row.copy_from_slice(h.row(nbrs[0])),
            n => {
                order.clear();
                order.extend_from_slice(nbrs);
                if n > 2 {
                    canonical_order(h, &mut order);
                }
                sum_rows_into(h, &order, row);
                let count = n as f64;
                row.iter_mut().for_each(|x| *x /= count);
            }
        }
    }
    out
}

fn sum_pool(h: &DenseMatrix) -> Vec<f64> {
    let mut order: Vec<usize> = (0..h.rows()).collect();
    canonical_order(h, &mut order);
    let mut pooled = vec![0.0; h.cols()];
    sum_rows_into(h, &order, &mut pooled);
    pooled
}

fn check_inputs(model: &GcnModel, graph: &DesignGraph, features: &DenseMatrix) -> Result<()> {
    if features.rows() != graph.node_count() {
        return Err(Error::Contract(format!(
            "feature matrix has {} rows but the graph has {} nodes",
            features.rows(),
            graph.node_count()
        )));
    }
    if features.cols() != model.config.input_dim {
        return Err(Error::Contract(format!(
            "feature width {} does not match model input width {}",
            features.cols(),
            model.config.input_dim
        )));
    }
    if !model.params.matches(&model.config) {
        return Err(Error::Contract("model parameters do not match its configuration".into()));
    }
    Ok(())
}

/// Forward pass keeping the intermediates for [`gcn_backward`].
pub fn forward_cached(model: &GcnModel, graph: &DesignGraph, features: &DenseMatrix) -> Result<ForwardCache> {
    check_inputs(model, graph, features)?;
    let act = model.config.activation;
    let neighbors = neighbor_lists(graph, model.config.aggregation);
    let p = &model.params;

    let mut inputs = Vec::with_capacity(p.layers.len());
    let mut aggregates = Vec::with_capacity(p.layers.len());
    let mut pre_activations = Vec::with_capacity(p.layers.len());
    let mut h = features.clone();
    for layer in &p.layers {
        let m = mean_aggregate(&h, &neighbors);
        let mut z = DenseMatrix::product(&m, &layer.w, Trans::None);
        z.gemm(1.0, &h, &layer.b, Trans::None, 1.0);
        let mut next = z.clone();
        next.as_mut_slice().iter_mut().for_each(|x| *x = act.apply(*x));
        inputs.push(std::mem::replace(&mut h, next));
        aggregates.push(m);
        pre_activations.push(z);
    }
    let pooled = sum_pool(&h);

    let pooled_row = DenseMatrix::from_vec(1, pooled.len(), pooled.clone())?;
    let mut hidden_pre = DenseMatrix::product(&pooled_row, &p.fc_hidden.weights, Trans::None);
    hidden_pre.add_assign(&p.fc_hidden.bias);
    let hidden: Vec<f64> = hidden_pre.as_slice().iter().map(|&x| act.apply(x)).collect();
    let hidden_row = DenseMatrix::from_vec(1, hidden.len(), hidden.clone())?;
    let mut out = DenseMatrix::product(&hidden_row, &p.fc_out.weights, Trans::None);
    out.add_assign(&p.fc_out.bias);
    let normalized: [f64; OUTPUTS] = std::array::from_fn(|j| out.get(0, j));
    let prediction = model.norm_or_identity().denormalize(&normalized);

    let output = ForwardOutput {
        node_embeddings: h,
        pooled: pooled.clone(),
        normalized,
        prediction,
    };
    if !(output.node_embeddings.is_finite() && output.normalized.iter().all(|v| v.is_finite())) {
        return Err(Error::Contract("forward pass produced a non-finite value".into()));
    }
    Ok(ForwardCache {
        neighbors,
        inputs,
        aggregates,
        pre_activations,
        pooled,
        hidden_pre: hidden_pre.as_slice().to_vec(),
        hidden,
        output,
    })
}

pub fn gcn_forward(model: &GcnModel, graph: &DesignGraph, features: &DenseMatrix) -> Result<ForwardOutput> {
    forward_cached(model, graph, features).map(|c| c.output)
}

/// Mean squared error in normalized target space, averaged over the four outputs.
pub fn mse_loss(pred_seconds: &[f64; OUTPUTS], target_seconds: &[f64; OUTPUTS], norm: &TargetNorm) -> f64 {
    let (p, t) = (norm.normalize(pred_seconds), norm.normalize(target_seconds));
    normalized_mse(&p, &t)
}

pub(crate) fn normalized_mse(p: &[f64; OUTPUTS], t: &[f64; OUTPUTS]) -> f64 {
    p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / OUTPUTS as f64
}

/// Loss and exact gradients of the normalized MSE for one graph.
///
/// `target_seconds` is normalized with the model's statistics (identity
/// when the model has none yet).
pub fn gcn_backward(
    model: &GcnModel,
    graph: &DesignGraph,
    features: &DenseMatrix,
    target_seconds: &[f64; OUTPUTS],
) -> Result<(f64, Parameters)> {
    let cache = forward_cached(model, graph, features)?;
    let target = model.norm_or_identity().normalize(target_seconds);
    let grads = backward_from_cache(model, &cache, &target)?;
    Ok((normalized_mse(&cache.output.normalized, &target), grads))
}

pub(crate) fn backward_from_cache(
    model: &GcnModel,
    cache: &ForwardCache,
    target: &[f64; OUTPUTS],
) -> Result<Parameters> {
    let act = model.config.activation;
    let p = &model.params;
    let mut g = p.zeros_like();

    // d loss / d normalized output
    let d_out: Vec<f64> = (0..OUTPUTS)
        .map(|j| 2.0 * (cache.output.normalized[j] - target[j]) / OUTPUTS as f64)
        .collect();
    let d_out_row = DenseMatrix::from_vec(1, OUTPUTS, d_out)?;
    let hidden_row = DenseMatrix::from_vec(1, cache.hidden.len(), cache.hidden.clone())?;
    g.fc_out.weights = DenseMatrix::product(&hidden_row, &d_out_row, Trans::Left);
    g.fc_out.bias = d_out_row.clone();

    let mut d_hidden = DenseMatrix::product(&d_out_row, &p.fc_out.weights, Trans::Right);
    for (d, &pre) in d_hidden.as_mut_slice().iter_mut().zip(&cache.hidden_pre) {
        *d *= act.grad(pre);
    }
    let pooled_row = DenseMatrix::from_vec(1, cache.pooled.len(), cache.pooled.clone())?;
    g.fc_hidden.weights = DenseMatrix::product(&pooled_row, &d_hidden, Trans::Left);
    g.fc_hidden.bias = d_hidden.clone();
    let d_pooled = DenseMatrix::product(&d_hidden, &p.fc_hidden.weights, Trans::Right);

    // Sum pooling sends the same gradient to every node.
    let n = cache.output.node_embeddings.rows();
    let mut d_h = DenseMatrix::zeros(n, d_pooled.cols());
    for v in 0..n {
        d_h.row_mut(v).copy_from_slice(d_pooled.as_slice());
    }

    for k in (0..p.layers.len()).rev() {
        let layer = &p.layers[k];
        let mut d_z = d_h;
        for (d, &pre) in d_z.as_mut_slice().iter_mut().zip(cache.pre_activations[k].as_slice()) {
            *d *= act.grad(pre);
        }
        g.layers[k].w = DenseMatrix::product(&cache.aggregates[k], &d_z, Trans::Left);
        g.layers[k].b = DenseMatrix::product(&cache.inputs[k], &d_z, Trans::Left);
        if k == 0 {
            break;
        }
        let d_m = DenseMatrix::product(&d_z, &layer.w, Trans::Right);
        let mut d_prev = DenseMatrix::product(&d_z, &layer.b, Trans::Right);
        for v in 0..n {
            let nbrs = cache.neighbors.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            let scale = 1.0 / nbrs.len() as f64;
            for &u in nbrs {
                let (src, dst) = (d_m.row(v), d_prev.row_mut(u));
                dst.iter_mut().zip(src).for_each(|(a, b)| *a += b * scale);
            }
        }
        d_h = d_prev;
    }

    if !g.is_finite() {
        return Err(Error::Contract("backward pass produced a non-finite gradient".into()));
    }
    Ok(g)
}
