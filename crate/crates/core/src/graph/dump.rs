//! Canonical text dump of a [`DesignGraph`].
//!
//! ```text
//! eda-graph 1
//! name <graph name>
//! source aig|netlist
//! nodes <N>
//! <index> <kind> <id>        (N lines, index order)
//! edges <E>
//! <src> <dst>                (E lines, stored order)
//! ```
//!
//! Names and ids run to the end of their line. Output is byte-stable for a
//! given graph, which makes it usable for golden files.

use std::fmt::Write as _;

use super::{DesignGraph, NodeKind, SourceKind};
use crate::error::{Error, Result};

const MAGIC: &str = "eda-graph 1";
const FMT: &str = "graph dump";

pub fn write_dump(graph: &DesignGraph) -> String {
    let mut out = String::with_capacity(32 * (graph.node_count() + graph.edge_count()) + 64);
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "name {}", graph.name());
    let _ = writeln!(out, "source {}", graph.source());
    let _ = writeln!(out, "nodes {}", graph.node_count());
    for (i, n) in graph.nodes().iter().enumerate() {
        let _ = writeln!(out, "{i} {} {}", n.kind.as_str(), n.id);
    }
    let _ = writeln!(out, "edges {}", graph.edge_count());
    for (s, d) in graph.edges() {
        let _ = writeln!(out, "{s} {d}");
    }
    out
}

pub fn parse_dump(text: &str) -> Result<DesignGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(FMT, 0, format!("unexpected end of input, expected {what}")))
    };
    let (ln, magic) = next("header")?;
    if magic != MAGIC {
        return Err(Error::parse(FMT, ln, format!("expected `{MAGIC}`")));
    }
    let keyed = |line: (usize, &'_ str), key: &str| -> Result<String> {
        line.1
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' ').or(if rest.is_empty() { Some("") } else { None }))
            .map(str::to_string)
            .ok_or_else(|| Error::parse(FMT, line.0, format!("expected `{key} ...`")))
    };
    let count = |line: (usize, &str), key: &str| -> Result<usize> {
        keyed(line, key)?
            .parse()
            .map_err(|_| Error::parse(FMT, line.0, format!("invalid {key} count")))
    };
    let name = keyed(next("name")?, "name")?;
    let src_line = next("source")?;
    let source = match keyed(src_line, "source")?.as_str() {
        "aig" => SourceKind::Aig,
        "netlist" => SourceKind::Netlist,
        other => return Err(Error::parse(FMT, src_line.0, format!("unknown source kind `{other}`"))),
    };
    let n = count(next("node count")?, "nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let (ln, l) = next("node line")?;
        let mut parts = l.splitn(3, ' ');
        let idx = parts.next().and_then(|s| s.parse::<usize>().ok());
        let kind = parts.next().and_then(|s| s.parse::<NodeKind>().ok());
        let id = parts.next();
        match (idx, kind, id) {
            (Some(idx), Some(kind), Some(id)) if idx == i => nodes.push((id.to_string(), kind)),
            _ => return Err(Error::parse(FMT, ln, format!("expected `{i} <kind> <id>`"))),
        }
    }
    let m = count(next("edge count")?, "edges")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = next("edge line")?;
        let mut parts = l.split(' ').map(str::parse::<usize>);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(s)), Some(Ok(d)), None) => edges.push((s, d)),
            _ => return Err(Error::parse(FMT, ln, "expected `<src> <dst>`")),
        }
    }
    if let Some((ln, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(FMT, ln, format!("trailing content `{l}`")));
    }
    DesignGraph::new(name, source, nodes, edges)
}
