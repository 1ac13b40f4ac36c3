use super::{DesignGraph, NodeKind};
use crate::matrix::DenseMatrix;

/// Width of a node feature row: 6-way kind one-hot, then `ln(1 + in_degree)`
/// and `ln(1 + out_degree)`.
pub const FEATURE_DIM: usize = 8;

/// Per-node input features, one row per node in graph order.
pub fn build_features(graph: &DesignGraph) -> DenseMatrix {
    let mut x = DenseMatrix::zeros(graph.node_count(), FEATURE_DIM);
    for (i, node) in graph.nodes().iter().enumerate() {
        let row = x.row_mut(i);
        row[node.kind.index()] = 1.0;
        row[NodeKind::ALL.len()] = (node.in_degree as f64).ln_1p();
        row[NodeKind::ALL.len() + 1] = (node.out_degree as f64).ln_1p();
    }
    x
}
