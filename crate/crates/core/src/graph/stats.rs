use serde::ser::{Serialize, Serializer};
use serde::Serialize as DeriveSerialize;

use super::{Adjacency, DesignGraph, NodeKind};

/// Longest path length in edges, or `Cyclic` when no topological order exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Acyclic(usize),
    Cyclic,
}

impl Serialize for Depth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Depth::Acyclic(d) => s.serialize_u64(*d as u64),
            Depth::Cyclic => s.serialize_str("cyclic"),
        }
    }
}

impl std::fmt::Display for Depth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Depth::Acyclic(d) => write!(f, "{d}"),
            Depth::Cyclic => f.write_str("cyclic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, DeriveSerialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    /// Node counts in [`NodeKind::ALL`] order.
    pub per_kind: [usize; 6],
    pub max_fan_out: usize,
    pub depth: Depth,
}

impl GraphStats {
    pub fn count(&self, kind: NodeKind) -> usize {
        self.per_kind[kind.index()]
    }
}

pub fn graph_stats(graph: &DesignGraph) -> GraphStats {
    let mut per_kind = [0usize; 6];
    for n in graph.nodes() {
        per_kind[n.kind.index()] += 1;
    }
    let depth = match graph.topological_order() {
        None => Depth::Cyclic,
        Some(order) => {
            let succ = Adjacency::successors(graph);
            let mut level = vec![0usize; graph.node_count()];
            for &v in &order {
                for &w in succ.neighbors(v) {
                    level[w] = level[w].max(level[v] + 1);
                }
            }
            Depth::Acyclic(level.into_iter().max().unwrap_or(0))
        }
    };
    GraphStats {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        per_kind,
        max_fan_out: graph.nodes().iter().map(|n| n.out_degree).max().unwrap_or(0),
        depth,
    }
}
