//! Plain-text edge lists.
//!
//! ```text
//! n m
//! u v        (m lines, 0-based endpoints)
//! bits B     (optional identifier width)
//! id k       (optional; when present exactly n lines, the i-th gives node i)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, GraphError, IdAssignment};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn line_err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Line {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| line_err(line, format!("invalid {what} `{tok}`")))
}

pub fn parse(text: &str) -> Result<(Graph, IdAssignment), ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines
        .next()
        .ok_or_else(|| ParseError::Truncated("missing `n m` header".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(line_err(ln, "header must be `n m`"));
    }
    let n: usize = parse_num(ln, toks[0], "node count")?;
    let m: usize = parse_num(ln, toks[1], "edge count")?;

    let mut edges = Vec::with_capacity(m);
    for k in 0..m {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| ParseError::Truncated(format!("expected {m} edges, found {k}")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(line_err(ln, "edge line must be `u v`"));
        }
        let u: usize = parse_num(ln, toks[0], "endpoint")?;
        let v: usize = parse_num(ln, toks[1], "endpoint")?;
        if u >= n || v >= n {
            return Err(line_err(ln, format!("endpoint out of range 0..{n}")));
        }
        if u == v {
            return Err(line_err(ln, format!("self-loop on node {u}")));
        }
        edges.push((u, v));
    }

    let mut bits = None;
    let mut ids = Vec::new();
    for (ln, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["bits", b] if bits.is_none() && ids.is_empty() => {
                bits = Some(parse_num::<u32>(ln, b, "bit width")?);
            }
            ["id", k] => ids.push(parse_num::<u64>(ln, k, "identifier")?),
            _ => return Err(line_err(ln, format!("unexpected line `{l}`"))),
        }
        if ids.len() > n {
            return Err(line_err(ln, format!("more than {n} identifiers")));
        }
    }
    if !ids.is_empty() && ids.len() != n {
        return Err(ParseError::Truncated(format!(
            "expected {n} identifiers, found {}",
            ids.len()
        )));
    }

    let g = Graph::new(n, &edges)?;
    let b = bits.unwrap_or_else(|| IdAssignment::default_bits(n));
    let ids = if ids.is_empty() {
        (0..n as u64).collect()
    } else {
        ids
    };
    Ok((g, IdAssignment::new(ids, b)?))
}

/// Writes the graph; `bits`/`id` lines are emitted only when the
/// assignment differs from the default index assignment.
pub fn render(g: &Graph, ids: &IdAssignment) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.node_count(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    if *ids != IdAssignment::index(g.node_count()) {
        writeln!(out, "bits {}", ids.bits()).unwrap();
        for &id in ids.as_slice() {
            writeln!(out, "id {id}").unwrap();
        }
    }
    out
}
