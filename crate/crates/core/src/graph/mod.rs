//! Design graphs: the directed, typed-node view of a design that the
//! runtime model consumes, plus the front-ends that produce it.

mod aiger;
mod dump;
mod features;
mod netlist;
mod stats;
mod verilog;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use aiger::parse_aiger;
pub use dump::{parse_dump, write_dump};
pub use features::{build_features, FEATURE_DIM};
pub use netlist::{parse_netlist_json, star_expand, Net, Netlist, Port, PortDir, Cell};
pub use stats::{graph_stats, Depth, GraphStats};
pub use verilog::{parse_verilog_subset, VerilogOptions, DEFAULT_DRIVER_PINS};

/// Node categories. The discriminant is the one-hot feature position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    PrimaryInput = 0,
    PrimaryOutput = 1,
    AndGate = 2,
    Inverter = 3,
    Cell = 4,
    Constant = 5,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::PrimaryInput,
        NodeKind::PrimaryOutput,
        NodeKind::AndGate,
        NodeKind::Inverter,
        NodeKind::Cell,
        NodeKind::Constant,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::PrimaryInput => "pi",
            NodeKind::PrimaryOutput => "po",
            NodeKind::AndGate => "and",
            NodeKind::Inverter => "inv",
            NodeKind::Cell => "cell",
            NodeKind::Constant => "const",
        }
    }
}

impl FromStr for NodeKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        NodeKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

/// Where a graph came from; decides which node kinds are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Aig,
    Netlist,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Aig => "aig",
            SourceKind::Netlist => "netlist",
        }
    }

    fn allows(self, kind: NodeKind) -> bool {
        match kind {
            NodeKind::AndGate | NodeKind::Inverter => self == SourceKind::Aig,
            NodeKind::Cell => self == SourceKind::Netlist,
            _ => true,
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub in_degree: usize,
    pub out_degree: usize,
}

/// Immutable directed graph of typed nodes.
///
/// Invariants (checked by [`DesignGraph::new`]): edge endpoints are valid
/// indices, there are no self-loops, node kinds match the source kind, cached
/// degrees match the edge list, and AIG-sourced graphs are acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignGraph {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    source: SourceKind,
}

impl DesignGraph {
    pub fn new(
        name: impl Into<String>,
        source: SourceKind,
        nodes: Vec<(String, NodeKind)>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut in_deg = vec![0usize; n];
        let mut out_deg = vec![0usize; n];
        for (i, &(s, d)) in edges.iter().enumerate() {
            if s >= n || d >= n {
                return Err(Error::Validation(format!(
                    "edge {i} ({s}->{d}) references a node outside 0..{n}"
                )));
            }
            if s == d {
                return Err(Error::Validation(format!("edge {i} is a self-loop on node {s}")));
            }
            out_deg[s] += 1;
            in_deg[d] += 1;
        }
        let nodes: Vec<Node> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, (id, kind))| {
                if !source.allows(kind) {
                    return Err(Error::Validation(format!(
                        "node `{id}` of kind {} is not allowed in a {source} graph",
                        kind.as_str()
                    )));
                }
                Ok(Node {
                    id,
                    kind,
                    in_degree: in_deg[i],
                    out_degree: out_deg[i],
                })
            })
            .collect::<Result<_>>()?;
        let graph = DesignGraph {
            name: name.into(),
            nodes,
            edges,
            source,
        };
        if source == SourceKind::Aig && graph.topological_order().is_none() {
            return Err(Error::Validation("AIG-sourced graph contains a cycle".into()));
        }
        Ok(graph)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn source(&self) -> SourceKind {
        self.source
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let succ = Adjacency::successors(self);
        let mut indeg: Vec<usize> = self.nodes.iter().map(|v| v.in_degree).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            order.push(v);
            for &w in succ.neighbors(v) {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Relabel nodes: node `i` of `self` becomes node `perm[i]` of the result.
    /// Edges are rewritten and reordered by their new source position.
    pub fn permuted(&self, perm: &[usize]) -> Result<DesignGraph> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Contract("permutation is not a bijection on the node set".into()));
        }
        let mut nodes = vec![(String::new(), NodeKind::Constant); n];
        for (old, node) in self.nodes.iter().enumerate() {
            nodes[perm[old]] = (node.id.clone(), node.kind);
        }
        let mut edges: Vec<(usize, usize)> =
            self.edges.iter().map(|&(s, d)| (perm[s], perm[d])).collect();
        edges.sort_unstable();
        DesignGraph::new(self.name.clone(), self.source, nodes, edges)
    }
}

/// Compressed sparse neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    fn build(n: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for (v, _) in pairs.clone() {
            offsets[v + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        for (v, u) in pairs {
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        Adjacency { offsets, targets }
    }

    /// For each node, the sources of its incoming edges (with multiplicity).
    pub fn predecessors(g: &DesignGraph) -> Self {
        Self::build(g.node_count(), g.edges.iter().map(|&(s, d)| (d, s)))
    }

    pub fn successors(g: &DesignGraph) -> Self {
        Self::build(g.node_count(), g.edges.iter().copied())
    }

    /// Edges in both directions.
    pub fn undirected(g: &DesignGraph) -> Self {
        Self::build(
            g.node_count(),
            g.edges.iter().flat_map(|&(s, d)| [(d, s), (s, d)]),
        )
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Load a design by file extension: `.aag` (AIGER), `.json` (netlist JSON),
/// `.v` (structural Verilog subset) or `.graph` (canonical dump).
pub fn load_design(path: &Path) -> Result<DesignGraph> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let bytes = std::fs::read(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("design");
    match ext.as_str() {
        "aag" => parse_aiger(&bytes).map(|g| g.renamed(stem)),
        "json" => star_expand(&parse_netlist_json(&bytes)?),
        "v" => {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::parse("verilog", 0, "input is not valid UTF-8"))?;
            star_expand(&parse_verilog_subset(&text, &VerilogOptions::default())?)
        }
        "graph" => {
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::parse("graph dump", 0, "input is not valid UTF-8"))?;
            parse_dump(&text)
        }
        other => Err(Error::Config(format!(
            "cannot infer design format from extension `{other}` (expected .aag, .json, .v or .graph)"
        ))),
    }
}

impl DesignGraph {
    pub(crate) fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}
