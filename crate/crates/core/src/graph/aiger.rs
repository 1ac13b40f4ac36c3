//! ASCII AIGER (`aag`) reader for combinational designs.
//!
//! Mapping onto [`DesignGraph`]:
//! * inputs, AND gates and outputs become one node each, in file order;
//! * a referenced constant literal (0 or 1) adds a single `Constant` node;
//! * every distinct complemented literal adds one `Inverter` node, fed by
//!   the node of the underlying variable and shared by all its fanouts.
//!
//! Edges run fan-in to gate. Constant and inverter nodes are appended after
//! the outputs in order of first reference.

use std::collections::HashMap;

use super::{DesignGraph, NodeKind, SourceKind};
use crate::error::{Error, Result};

const FMT: &str = "aiger";

#[derive(Clone, Copy)]
enum VarDef {
    Input(usize),
    And(usize),
}

struct AndLine {
    lhs: u64,
    rhs: [u64; 2],
    line: usize,
}

struct Header {
    max_var: u64,
    inputs: usize,
    latches: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str) -> Result<Header> {
    let mut fields = line.split_ascii_whitespace();
    if fields.next() != Some("aag") {
        return Err(Error::parse(FMT, 1, "expected header `aag M I L O A`"));
    }
    let nums: Vec<&str> = fields.collect();
    if nums.len() < 5 {
        return Err(Error::parse(FMT, 1, "header needs five counts `M I L O A`"));
    }
    let mut vals = Vec::with_capacity(nums.len());
    for tok in &nums {
        vals.push(
            tok.parse::<u64>()
                .map_err(|_| Error::parse(FMT, 1, format!("invalid header count `{tok}`")))?,
        );
    }
    // AIGER 1.9 extension counts (B C J F) are only accepted when zero.
    if vals[5..].iter().any(|&v| v != 0) {
        return Err(Error::parse(
            FMT,
            1,
            "bad-state, constraint, justice and fairness sections are not supported",
        ));
    }
    let to_usize = |v: u64| {
        usize::try_from(v).map_err(|_| Error::parse(FMT, 1, "header count too large"))
    };
    let header = Header {
        max_var: vals[0],
        inputs: to_usize(vals[1])?,
        latches: to_usize(vals[2])?,
        outputs: to_usize(vals[3])?,
        ands: to_usize(vals[4])?,
    };
    if header.latches != 0 {
        return Err(Error::parse(
            FMT,
            1,
            format!("latch count {} is nonzero; only combinational designs are supported", header.latches),
        ));
    }
    if (header.inputs + header.ands) as u64 > header.max_var {
        return Err(Error::parse(FMT, 1, "M is smaller than I + L + A"));
    }
    Ok(header)
}

fn parse_literals(text: &str, line: usize, expected: usize, max_lit: u64) -> Result<Vec<u64>> {
    let toks: Vec<&str> = text.split_ascii_whitespace().collect();
    if toks.len() != expected {
        return Err(Error::parse(
            FMT,
            line,
            format!("expected {expected} literal(s), found {}", toks.len()),
        ));
    }
    toks.iter()
        .map(|t| {
            let lit = t
                .parse::<u64>()
                .map_err(|_| Error::parse(FMT, line, format!("invalid literal `{t}`")))?;
            if lit > max_lit {
                return Err(Error::parse(
                    FMT,
                    line,
                    format!("literal {lit} out of range [0, {max_lit}]"),
                ));
            }
            Ok(lit)
        })
        .collect()
}

/// Parse an ASCII AIGER file into an acyclic [`DesignGraph`].
pub fn parse_aiger(bytes: &[u8]) -> Result<DesignGraph> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| Error::parse(FMT, 0, "input is not ASCII text"))?;
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse(FMT, 1, "empty input, expected `aag` header"))?;
    let header = parse_header(first)?;
    let max_lit = 2 * header.max_var + 1;

    let mut next_line = |what: &str| -> Result<(usize, &str)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::parse(FMT, 0, format!("unexpected end of file while reading {what}")))
    };

    let mut defs: HashMap<u64, VarDef> = HashMap::new();
    let mut def_line: HashMap<u64, usize> = HashMap::new();

    let mut input_lits = Vec::with_capacity(header.inputs);
    for k in 0..header.inputs {
        let (ln, l) = next_line("inputs")?;
        let lit = parse_literals(l, ln, 1, max_lit)?[0];
        if lit < 2 || lit % 2 == 1 {
            return Err(Error::parse(FMT, ln, format!("input literal {lit} must be even and nonzero")));
        }
        if defs.insert(lit / 2, VarDef::Input(k)).is_some() {
            return Err(Error::parse(FMT, ln, format!("variable {} defined twice", lit / 2)));
        }
        def_line.insert(lit / 2, ln);
        input_lits.push(lit);
    }

    let mut outputs = Vec::with_capacity(header.outputs);
    for _ in 0..header.outputs {
        let (ln, l) = next_line("outputs")?;
        outputs.push((parse_literals(l, ln, 1, max_lit)?[0], ln));
    }

    let mut ands = Vec::with_capacity(header.ands);
    for k in 0..header.ands {
        let (ln, l) = next_line("AND gates")?;
        let lits = parse_literals(l, ln, 3, max_lit)?;
        let lhs = lits[0];
        if lhs < 2 || lhs % 2 == 1 {
            return Err(Error::parse(FMT, ln, format!("AND output literal {lhs} must be even and nonzero")));
        }
        if defs.insert(lhs / 2, VarDef::And(k)).is_some() {
            return Err(Error::parse(FMT, ln, format!("variable {} defined twice", lhs / 2)));
        }
        def_line.insert(lhs / 2, ln);
        ands.push(AndLine {
            lhs,
            rhs: [lits[1], lits[2]],
            line: ln,
        });
    }

    // Symbol table and comment section.
    let mut in_comment = false;
    for (i, l) in lines {
        if in_comment || l.trim().is_empty() {
            continue;
        }
        match l.as_bytes()[0] {
            b'c' if l.trim() == "c" => in_comment = true,
            b'i' | b'l' | b'o' | b'b' | b'c' | b'j' | b'f' => {}
            _ => return Err(Error::parse(FMT, i + 1, "unexpected trailing content")),
        }
    }

    let check_ref = |lit: u64, ln: usize| -> Result<()> {
        let var = lit / 2;
        if var != 0 && !defs.contains_key(&var) {
            return Err(Error::parse(FMT, ln, format!("literal {lit} references undefined variable {var}")));
        }
        Ok(())
    };
    for a in &ands {
        for &r in &a.rhs {
            check_ref(r, a.line)?;
        }
    }
    for &(lit, ln) in &outputs {
        check_ref(lit, ln)?;
    }
    check_acyclic(&ands, &defs)?;

    let n_in = header.inputs;
    let n_and = header.ands;
    let mut nodes: Vec<(String, NodeKind)> = Vec::with_capacity(n_in + n_and + header.outputs);
    nodes.extend(input_lits.iter().map(|l| (format!("pi{l}"), NodeKind::PrimaryInput)));
    nodes.extend(ands.iter().map(|a| (format!("and{}", a.lhs), NodeKind::AndGate)));
    nodes.extend((0..header.outputs).map(|k| (format!("po{k}"), NodeKind::PrimaryOutput)));

    let mut edges = Vec::with_capacity(2 * n_and + header.outputs);
    let mut constant: Option<usize> = None;
    let mut inverters: HashMap<u64, usize> = HashMap::new();

    let mut source_of = |lit: u64, nodes: &mut Vec<(String, NodeKind)>, edges: &mut Vec<(usize, usize)>| {
        let var = lit / 2;
        let base = match defs.get(&var) {
            Some(VarDef::Input(k)) => *k,
            Some(VarDef::And(k)) => n_in + *k,
            None => *constant.get_or_insert_with(|| {
                nodes.push(("const0".to_string(), NodeKind::Constant));
                nodes.len() - 1
            }),
        };
        if lit.is_multiple_of(2) {
            return base;
        }
        *inverters.entry(lit).or_insert_with(|| {
            nodes.push((format!("inv{lit}"), NodeKind::Inverter));
            let inv = nodes.len() - 1;
            edges.push((base, inv));
            inv
        })
    };

    for (k, a) in ands.iter().enumerate() {
        for &r in &a.rhs {
            let src = source_of(r, &mut nodes, &mut edges);
            edges.push((src, n_in + k));
        }
    }
    for (k, &(lit, _)) in outputs.iter().enumerate() {
        let src = source_of(lit, &mut nodes, &mut edges);
        edges.push((src, n_in + n_and + k));
    }

    DesignGraph::new("aig", SourceKind::Aig, nodes, edges)
}

/// Iterative three-color DFS over AND definitions.
fn check_acyclic(ands: &[AndLine], defs: &HashMap<u64, VarDef>) -> Result<()> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; ands.len()];
    let and_fanins = |k: usize| {
        ands[k].rhs.iter().filter_map(|r| match defs.get(&(r / 2)) {
            Some(VarDef::And(j)) => Some(*j),
            _ => None,
        })
    };
    for root in 0..ands.len() {
        if color[root] != WHITE {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = GREY;
        while let Some(&mut (k, ref mut next)) = stack.last_mut() {
            if let Some(j) = and_fanins(k).nth(*next) {
                *next += 1;
                match color[j] {
                    WHITE => {
                        color[j] = GREY;
                        stack.push((j, 0));
                    }
                    GREY => {
                        return Err(Error::parse(
                            FMT,
                            ands[j].line,
                            format!("cyclic definition through AND literal {}", ands[j].lhs),
                        ))
                    }
                    _ => {}
                }
            } else {
                color[k] = BLACK;
                stack.pop();
            }
        }
    }
    Ok(())
}
