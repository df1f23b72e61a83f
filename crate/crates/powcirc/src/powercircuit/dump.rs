//! Line-oriented text form of a circuit and named markings.
//!
//! ```text
//! node 0:
//! node 1: +1@0
//! marking x: -1@0 +1@1
//! ```
//!
//! Nodes appear in ascending value order and are referred to by rank.

use std::cmp::Ordering;
use std::fmt::Write;

use super::{CircuitError, Marking, NodeId, PowerCircuit};

/// A circuit read back from its dump, with the markings listed after it.
#[derive(Debug, Clone)]
pub struct ParsedDump {
    pub circuit: PowerCircuit,
    pub markings: Vec<(String, Marking)>,
}

impl PowerCircuit {
    /// Serializes every node, then each named marking.
    pub fn dump(&self, markings: &[(&str, &Marking)]) -> String {
        let mut rank = vec![0usize; self.nodes.len()];
        for (r, &id) in self.order.iter().enumerate() {
            rank[id as usize] = r;
        }
        let mut out = String::new();
        for (r, &id) in self.order.iter().enumerate() {
            write!(out, "node {r}:").unwrap();
            write_terms(&mut out, &self.nodes[id as usize].succ, &rank);
            out.push('\n');
        }
        for (name, m) in markings {
            write!(out, "marking {name}:").unwrap();
            write_terms(&mut out, m, &rank);
            out.push('\n');
        }
        out
    }

    /// Reads a dump produced by [`PowerCircuit::dump`]. Node ids of the
    /// result equal the ranks in the text.
    pub fn parse_dump(base: u32, text: &str) -> Result<ParsedDump, CircuitError> {
        let mut pc = PowerCircuit::empty(base)?;
        let mut markings = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let err = |msg: &str| CircuitError::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            if line.trim().is_empty() {
                continue;
            }
            let (head, body) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            let mut words = head.split_whitespace();
            let kind = words.next().ok_or_else(|| err("empty header"))?;
            let name = words.next().ok_or_else(|| err("missing name"))?;
            if words.next().is_some() {
                return Err(err("unexpected token in header"));
            }
            let terms = parse_terms(body, pc.nodes.len()).map_err(|m| err(&m))?;
            let m = pc.marking(terms).map_err(|e| err(&e.to_string()))?;
            match kind {
                "node" => {
                    if !markings.is_empty() {
                        return Err(err("node after marking"));
                    }
                    if name.parse::<usize>().ok() != Some(pc.nodes.len()) {
                        return Err(err("node ranks must count up from 0"));
                    }
                    if pc.sign(&m) == Ordering::Less {
                        return Err(err("negative successor"));
                    }
                    if let Some(&last) = pc.order.last() {
                        if pc.compare(&pc.nodes[last as usize].succ, &m) != Ordering::Less {
                            return Err(err("nodes out of order"));
                        }
                    }
                    pc.insert_node(m);
                }
                "marking" => markings.push((name.to_string(), m)),
                _ => return Err(err("expected 'node' or 'marking'")),
            }
        }
        Ok(ParsedDump {
            circuit: pc,
            markings,
        })
    }
}

fn write_terms(out: &mut String, m: &Marking, rank: &[usize]) {
    let mut terms: Vec<(usize, i32)> = m.terms.iter().map(|&(n, d)| (rank[n as usize], d)).collect();
    terms.sort_unstable();
    for (r, d) in terms {
        write!(out, " {d:+}@{r}").unwrap();
    }
}

fn parse_terms(body: &str, nodes: usize) -> Result<Vec<(NodeId, i32)>, String> {
    body.split_whitespace()
        .map(|tok| {
            let (d, r) = tok
                .split_once('@')
                .ok_or_else(|| format!("malformed term '{tok}'"))?;
            let d: i32 = d.parse().map_err(|_| format!("bad digit in '{tok}'"))?;
            let r: usize = r.parse().map_err(|_| format!("bad node in '{tok}'"))?;
            if r >= nodes {
                return Err(format!("term '{tok}' references an undefined node"));
            }
            Ok((r as NodeId, d))
        })
        .collect()
}
