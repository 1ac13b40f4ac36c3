//! Structural gate-level Verilog subset.
//!
//! Accepted: a single `module` with non-ANSI or ANSI scalar port lists,
//! `input` / `output` / `wire` declarations, and cell instantiations that use
//! named port connections. Pins listed in [`VerilogOptions::driver_pins`]
//! drive the connected net; every other pin is a sink. Anything else
//! (behavioral blocks, `assign`, buses, parameters, positional connections,
//! constants, a second module) is reported as unsupported with its location.

use std::collections::HashMap;

use super::netlist::{Cell, Net, Netlist, Port, PortDir};
use crate::error::{Error, Result};

pub const DEFAULT_DRIVER_PINS: [&str; 4] = ["Y", "Z", "Q", "out"];

#[derive(Debug, Clone)]
pub struct VerilogOptions {
    pub driver_pins: Vec<String>,
}

impl Default for VerilogOptions {
    fn default() -> Self {
        VerilogOptions {
            driver_pins: DEFAULT_DRIVER_PINS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Punct(char),
    Number(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "always", "always_comb", "always_ff", "assign", "initial", "reg", "logic", "generate", "function",
    "task", "parameter", "localparam", "defparam", "integer", "inout", "supply0", "supply1", "tri",
    "if", "case", "begin", "specify",
];

fn unsupported(construct: impl Into<String>, t: &Token) -> Error {
    Error::Unsupported {
        construct: construct.into(),
        line: t.line,
        column: t.col,
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i >= chars.len() {
                    return Err(Error::parse("verilog", tl, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                s.push(chars[i]);
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
        } else if c == '\\' {
            // Escaped identifier runs to the next whitespace.
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            while i < chars.len() && !chars[i].is_whitespace() {
                s.push(chars[i]);
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
        } else if c.is_ascii_digit() || c == '\'' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '\'' || chars[i] == '_') {
                s.push(chars[i]);
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Token { tok: Tok::Number(s), line: tl, col: tc });
        } else if c == '`' {
            return Err(Error::Unsupported {
                construct: "compiler directive".into(),
                line: tl,
                column: tc,
            });
        } else {
            out.push(Token { tok: Tok::Punct(c), line: tl, col: tc });
            advance(&mut i, &mut line, &mut col, c);
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    opts: &'a VerilogOptions,
}

#[derive(Default)]
struct NetInfo {
    drivers: Vec<String>,
    sinks: Vec<String>,
    port_sinks: Vec<String>,
}

#[derive(Default)]
struct Module {
    name: String,
    ports: Vec<Port>,
    cells: Vec<Cell>,
    nets: HashMap<String, NetInfo>,
    net_order: Vec<String>,
}

impl Module {
    fn net(&mut self, name: &str) -> &mut NetInfo {
        if !self.nets.contains_key(name) {
            self.net_order.push(name.to_string());
        }
        self.nets.entry(name.to_string()).or_default()
    }

    fn declare_port(&mut self, id: String, dir: PortDir, at: &Token) -> Result<()> {
        if self.ports.iter().any(|p| p.id == id) {
            return Err(Error::parse("verilog", at.line, format!("port `{id}` declared twice")));
        }
        match dir {
            PortDir::In => self.net(&id).drivers.push(id.clone()),
            PortDir::Out => self.net(&id).port_sinks.push(id.clone()),
        }
        self.ports.push(Port { id, dir });
        Ok(())
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn last_line(&self) -> usize {
        self.toks.last().map_or(1, |t| t.line)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::parse("verilog", self.last_line(), "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_punct(&mut self, c: char) -> Result<Token> {
        let t = self.next()?;
        match t.tok {
            Tok::Punct(p) if p == c => Ok(t),
            Tok::Punct('[') => Err(unsupported("bus/bit-select", &t)),
            _ => Err(Error::parse("verilog", t.line, format!("expected `{c}` at column {}", t.col))),
        }
    }

    fn ident(&mut self) -> Result<(String, Token)> {
        let t = self.next()?;
        match &t.tok {
            Tok::Ident(s) if UNSUPPORTED_KEYWORDS.contains(&s.as_str()) => Err(unsupported(s.clone(), &t)),
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            Tok::Punct('[') => Err(unsupported("bus/bit-select", &t)),
            Tok::Number(n) => Err(unsupported(format!("constant `{n}`"), &t)),
            Tok::Punct(c) => Err(Error::parse(
                "verilog",
                t.line,
                format!("expected identifier, found `{c}` at column {}", t.col),
            )),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    fn parse_module(&mut self) -> Result<Module> {
        let (kw, t) = self.ident()?;
        if kw != "module" {
            return Err(Error::parse("verilog", t.line, "expected `module`"));
        }
        let mut m = Module {
            name: self.ident()?.0,
            ..Default::default()
        };
        if self.is_punct('#') {
            return Err(unsupported("module parameters", &self.next()?));
        }
        if self.is_punct('(') {
            self.next()?;
            if !self.is_punct(')') {
                loop {
                    let (word, _) = self.ident()?;
                    match word.as_str() {
                        "input" | "output" => {
                            let dir = if word == "input" { PortDir::In } else { PortDir::Out };
                            let (mut name, mut nt) = self.ident()?;
                            if name == "wire" {
                                (name, nt) = self.ident()?;
                            }
                            m.declare_port(name, dir, &nt)?;
                        }
                        // Non-ANSI header names are declared by later input/output statements.
                        _ => {}
                    }
                    if self.is_punct(',') {
                        self.next()?;
                        continue;
                    }
                    break;
                }
            }
            self.expect_punct(')')?;
        }
        self.expect_punct(';')?;

        loop {
            let (word, at) = self.ident()?;
            match word.as_str() {
                "endmodule" => break,
                "module" => return Err(unsupported("nested module", &at)),
                "input" | "output" | "wire" => {
                    loop {
                        let (mut name, mut nt) = self.ident()?;
                        if name == "wire" && word != "wire" {
                            (name, nt) = self.ident()?;
                        }
                        match word.as_str() {
                            "input" => m.declare_port(name, PortDir::In, &nt)?,
                            "output" => m.declare_port(name, PortDir::Out, &nt)?,
                            _ => {
                                m.net(&name);
                            }
                        }
                        if self.is_punct(',') {
                            self.next()?;
                            continue;
                        }
                        break;
                    }
                    self.expect_punct(';')?;
                }
                _ => self.parse_instance(&mut m, word)?,
            }
        }
        Ok(m)
    }

    fn parse_instance(&mut self, m: &mut Module, cell_type: String) -> Result<()> {
        if self.is_punct('#') {
            return Err(unsupported("instance parameters", &self.next()?));
        }
        let (inst, _) = self.ident()?;
        self.expect_punct('(')?;
        if !self.is_punct(')') {
            loop {
                let t = self.next()?;
                if t.tok != Tok::Punct('.') {
                    return Err(unsupported("positional port connection", &t));
                }
                let (pin, _) = self.ident()?;
                self.expect_punct('(')?;
                if !self.is_punct(')') {
                    let (net, _) = self.ident()?;
                    if self.is_punct('[') {
                        return Err(unsupported("bus/bit-select", &self.next()?));
                    }
                    let info = m.net(&net);
                    if self.opts.driver_pins.contains(&pin) {
                        info.drivers.push(inst.clone());
                    } else {
                        info.sinks.push(inst.clone());
                    }
                }
                self.expect_punct(')')?;
                if self.is_punct(',') {
                    self.next()?;
                    continue;
                }
                break;
            }
        }
        self.expect_punct(')')?;
        self.expect_punct(';')?;
        m.cells.push(Cell { id: inst, cell_type });
        Ok(())
    }
}

/// Parse the structural subset into a validated [`Netlist`].
pub fn parse_verilog_subset(text: &str, opts: &VerilogOptions) -> Result<Netlist> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        opts,
    };
    let mut m = p.parse_module()?;
    if let Some(t) = p.peek().cloned() {
        return match &t.tok {
            Tok::Ident(s) if s == "module" => Err(unsupported("multiple modules", &t)),
            _ => Err(Error::parse("verilog", t.line, "unexpected content after `endmodule`")),
        };
    }

    let mut nets = Vec::new();
    for name in std::mem::take(&mut m.net_order) {
        let mut info = m.nets.remove(&name).unwrap_or_default();
        info.sinks.append(&mut info.port_sinks);
        match info.drivers.len() {
            0 if info.sinks.is_empty() => continue,
            0 => return Err(Error::Validation(format!("net `{name}` has no driver"))),
            1 => nets.push(Net {
                driver: info.drivers.pop().unwrap(),
                sinks: info.sinks,
            }),
            k => {
                return Err(Error::Validation(format!(
                    "net `{name}` has {k} drivers: {:?}",
                    info.drivers
                )))
            }
        }
    }
    Netlist::new(m.name, m.cells, m.ports, nets)
}
