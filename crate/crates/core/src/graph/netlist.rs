use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{DesignGraph, NodeKind, SourceKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDir {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub id: String,
    #[serde(rename = "type")]
    pub cell_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Port {
    pub id: String,
    pub dir: PortDir,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Net {
    pub driver: String,
    #[serde(default)]
    pub sinks: Vec<String>,
}

/// A validated gate-level netlist. Construct through [`Netlist::new`],
/// [`parse_netlist_json`] or the Verilog front-end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Netlist {
    pub name: String,
    pub cells: Vec<Cell>,
    pub ports: Vec<Port>,
    pub nets: Vec<Net>,
}

/// Wire form: `driver` may arrive as a list so multi-driver nets can be
/// reported instead of failing inside serde.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetlist {
    name: String,
    #[serde(default)]
    cells: Vec<Cell>,
    #[serde(default)]
    ports: Vec<Port>,
    #[serde(default)]
    nets: Vec<RawNet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNet {
    #[serde(default)]
    driver: Option<Drivers>,
    #[serde(default)]
    sinks: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Drivers {
    One(String),
    Many(Vec<String>),
}

#[derive(Clone, Copy)]
enum Element {
    Cell,
    Port(PortDir),
}

impl Netlist {
    pub fn new(name: impl Into<String>, cells: Vec<Cell>, ports: Vec<Port>, nets: Vec<Net>) -> Result<Self> {
        let netlist = Netlist {
            name: name.into(),
            cells,
            ports,
            nets,
        };
        netlist.validate()?;
        Ok(netlist)
    }

    fn element_table(&self) -> Result<HashMap<&str, Element>> {
        let mut table = HashMap::with_capacity(self.cells.len() + self.ports.len());
        for p in &self.ports {
            if table.insert(p.id.as_str(), Element::Port(p.dir)).is_some() {
                return Err(Error::Validation(format!("duplicate id `{}` (port)", p.id)));
            }
        }
        for c in &self.cells {
            if table.insert(c.id.as_str(), Element::Cell).is_some() {
                return Err(Error::Validation(format!("duplicate id `{}` (cell)", c.id)));
            }
        }
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let table = self.element_table()?;
        for (i, net) in self.nets.iter().enumerate() {
            match table.get(net.driver.as_str()) {
                None => {
                    return Err(Error::Validation(format!(
                        "net {i}: driver `{}` is not a declared cell or port",
                        net.driver
                    )))
                }
                Some(Element::Port(PortDir::Out)) => {
                    return Err(Error::Validation(format!(
                        "net {i}: output port `{}` cannot drive a net",
                        net.driver
                    )))
                }
                Some(_) => {}
            }
            for sink in &net.sinks {
                match table.get(sink.as_str()) {
                    None => {
                        return Err(Error::Validation(format!(
                            "net {i}: sink `{sink}` is not a declared cell or port"
                        )))
                    }
                    Some(Element::Port(PortDir::In)) => {
                        return Err(Error::Validation(format!(
                            "net {i}: input port `{sink}` cannot be a sink"
                        )))
                    }
                    Some(_) if *sink == net.driver => {
                        return Err(Error::Validation(format!(
                            "net {i}: `{sink}` drives itself (self-loop)"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serialization is infallible")
    }
}

/// Parse and validate a netlist in the JSON exchange schema:
/// `{name, cells:[{id,type}], ports:[{id,dir}], nets:[{driver, sinks:[]}]}`.
pub fn parse_netlist_json(bytes: &[u8]) -> Result<Netlist> {
    let raw: RawNetlist = serde_json::from_slice(bytes)
        .map_err(|e| Error::Validation(format!("netlist JSON schema violation: {e}")))?;
    let mut nets = Vec::with_capacity(raw.nets.len());
    for (i, n) in raw.nets.into_iter().enumerate() {
        let driver = match n.driver {
            Some(Drivers::One(d)) => d,
            Some(Drivers::Many(mut ds)) if ds.len() == 1 => ds.pop().unwrap(),
            Some(Drivers::Many(ds)) => {
                return Err(Error::Validation(format!(
                    "net {i} has {} drivers (exactly one required): {:?}",
                    ds.len(),
                    ds
                )))
            }
            None => return Err(Error::Validation(format!("net {i} has no driver"))),
        };
        nets.push(Net { driver, sinks: n.sinks });
    }
    Netlist::new(raw.name, raw.cells, raw.ports, nets)
}

/// Star-model expansion: ports then cells become nodes (declaration order),
/// and every net contributes one edge from its driver to each sink.
pub fn star_expand(netlist: &Netlist) -> Result<DesignGraph> {
    let mut nodes = Vec::with_capacity(netlist.ports.len() + netlist.cells.len());
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(nodes.capacity());
    for p in &netlist.ports {
        index.insert(p.id.as_str(), nodes.len());
        let kind = match p.dir {
            PortDir::In => NodeKind::PrimaryInput,
            PortDir::Out => NodeKind::PrimaryOutput,
        };
        nodes.push((p.id.clone(), kind));
    }
    for c in &netlist.cells {
        index.insert(c.id.as_str(), nodes.len());
        nodes.push((c.id.clone(), NodeKind::Cell));
    }
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Validation(format!("unknown element `{id}`")))
    };
    let mut edges = Vec::with_capacity(netlist.nets.iter().map(|n| n.sinks.len()).sum());
    for net in &netlist.nets {
        let d = lookup(&net.driver)?;
        for s in &net.sinks {
            edges.push((d, lookup(s)?));
        }
    }
    DesignGraph::new(netlist.name.clone(), SourceKind::Netlist, nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INV: &str = r#"{
        "name": "inv",
        "cells": [{"id": "inv1", "type": "INV"}],
        "ports": [{"id": "a", "dir": "in"}, {"id": "y", "dir": "out"}],
        "nets": [{"driver": "a", "sinks": ["inv1"]}, {"driver": "inv1", "sinks": ["y"]}]
    }"#;

    #[test]
    fn minimal_netlist() {
        let n = parse_netlist_json(INV.as_bytes()).unwrap();
        assert_eq!((n.cells.len(), n.ports.len(), n.nets.len()), (1, 2, 2));
        let reparsed = parse_netlist_json(n.to_json().as_bytes()).unwrap();
        assert_eq!(reparsed, n);
    }

    #[test]
    fn dangling_net_accepted() {
        let src = r#"{"name":"d","cells":[{"id":"c","type":"BUF"}],"ports":[],
                      "nets":[{"driver":"c","sinks":[]}]}"#;
        let n = parse_netlist_json(src.as_bytes()).unwrap();
        assert_eq!(star_expand(&n).unwrap().edge_count(), 0);
    }

    fn validation_msg(src: &str) -> String {
        match parse_netlist_json(src.as_bytes()) {
            Err(Error::Validation(m)) => m,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_netlists() {
        let m = validation_msg(r#"{"name":"x","cells":[],"ports":[],"nets":[{"driver":"ghost","sinks":[]}]}"#);
        assert!(m.contains("ghost"));
        let m = validation_msg(
            r#"{"name":"x","cells":[{"id":"a","type":"T"},{"id":"a","type":"T"}],"ports":[],"nets":[]}"#,
        );
        assert!(m.contains("duplicate id `a`"));
        let m = validation_msg(
            r#"{"name":"x","cells":[{"id":"a","type":"T"},{"id":"b","type":"T"}],"ports":[],
                "nets":[{"driver":["a","b"],"sinks":[]}]}"#,
        );
        assert!(m.contains("2 drivers"));
        let m = validation_msg(r#"{"name":"x","cells":[{"id":"a","type":"T"}],"nets":[{"sinks":["a"]}]}"#);
        assert!(m.contains("no driver"));
        let m = validation_msg(r#"{"name":"x","cells":[],"ports":[{"id":"p","dir":"sideways"}]}"#);
        assert!(m.contains("schema"));
        let m = validation_msg(r#"{"name":"x","cells":[{"id":"a","type":"T","extra":1}]}"#);
        assert!(m.contains("schema"));
        let m = validation_msg(
            r#"{"name":"x","cells":[{"id":"a","type":"T"}],"ports":[{"id":"y","dir":"out"}],
                "nets":[{"driver":"y","sinks":["a"]}]}"#,
        );
        assert!(m.contains("output port"));
        let m = validation_msg(
            r#"{"name":"x","cells":[{"id":"a","type":"T"}],"ports":[],"nets":[{"driver":"a","sinks":["a"]}]}"#,
        );
        assert!(m.contains("self-loop"));
        let m = validation_msg(r#"{"name":"x","cells":[{"id":"a","type":"T"}],"ports":[],"nets":[{"driver":"a","sinks":["b"]}]}"#);
        assert!(m.contains("sink `b`"));
    }

    #[test]
    fn star_model_edges() {
        let src = r#"{"name":"s","cells":[{"id":"d","type":"T"},{"id":"a","type":"T"},
                      {"id":"b","type":"T"},{"id":"c","type":"T"}],"ports":[],
                      "nets":[{"driver":"d","sinks":["a","b","c"]}]}"#;
        let g = star_expand(&parse_netlist_json(src.as_bytes()).unwrap()).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(g.nodes()[0].out_degree, 3);
    }
}
