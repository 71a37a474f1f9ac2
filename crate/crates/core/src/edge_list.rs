//! Edge-list file format: one edge per line, `u v s` with whitespace
//! separators, `s` in `{+1, 1, -1, +, -}`, `#` starting a comment. Node
//! tokens are arbitrary strings mapped to dense ids in first-seen order; the
//! mapping is returned alongside the graph.
//!
//! Saving writes node ids as decimal tokens in stored edge order, so a save
//! and load round trip reproduces the edges and signs exactly (up to the
//! returned mapping). Nodes without edges do not survive a round trip.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{GraphError, Sign, SignedGraph};

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: expected `u v s`, found {found} fields")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: invalid sign token `{token}`")]
    InvalidSign { line: usize, token: String },
    #[error("line {line}: self-loop on `{token}`")]
    SelfLoop { line: usize, token: String },
    #[error("line {line}: duplicate edge between `{a}` and `{b}`")]
    DuplicateEdge { line: usize, a: String, b: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_sign(token: &str) -> Option<i8> {
    match token {
        "+1" | "1" | "+" => Some(1),
        "-1" | "-" => Some(-1),
        _ => None,
    }
}

/// Parses an edge list from any reader. Returns the graph and the node
/// mapping: `mapping[id]` is the token that became node `id`.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(SignedGraph, Vec<String>), EdgeListError> {
    let mut tokens: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut raw: Vec<(usize, usize, i8)> = Vec::new();
    let mut present: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_number = lineno + 1;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(EdgeListError::FieldCount {
                line: line_number,
                found: fields.len(),
            });
        }
        let sign = parse_sign(fields[2]).ok_or_else(|| EdgeListError::InvalidSign {
            line: line_number,
            token: fields[2].to_string(),
        })?;
        let mut id_of = |token: &str| -> usize {
            *ids.entry(token.to_string()).or_insert_with(|| {
                tokens.push(token.to_string());
                tokens.len() - 1
            })
        };
        let u = id_of(fields[0]);
        let v = id_of(fields[1]);
        if u == v {
            return Err(EdgeListError::SelfLoop {
                line: line_number,
                token: fields[0].into(),
            });
        }
        if !present.insert((u.min(v), u.max(v))) {
            return Err(EdgeListError::DuplicateEdge {
                line: line_number,
                a: fields[0].into(),
                b: fields[1].into(),
            });
        }
        raw.push((u, v, sign));
    }
    let graph = SignedGraph::new(tokens.len(), &raw)?;
    Ok((graph, tokens))
}

pub fn load_edge_list<P: AsRef<Path>>(
    path: P,
) -> Result<(SignedGraph, Vec<String>), EdgeListError> {
    let file = std::fs::File::open(path)?;
    parse_edge_list(std::io::BufReader::new(file))
}

/// Writes the graph in stored edge order with decimal node ids.
pub fn write_edge_list<W: Write>(g: &SignedGraph, mut writer: W) -> std::io::Result<()> {
    for e in g.edges() {
        let s = if e.sign == Sign::Plus { "+1" } else { "-1" };
        writeln!(writer, "{} {} {}", e.u, e.v, s)?;
    }
    Ok(())
}

pub fn save_edge_list<P: AsRef<Path>>(g: &SignedGraph, path: P) -> Result<(), EdgeListError> {
    let file = std::fs::File::create(path)?;
    write_edge_list(g, std::io::BufWriter::new(file))?;
    Ok(())
}
