//! Plain-text edge lists.
//!
//! ```text
//! # optional comments
//! k n m
//! roots r1 r2 ...      (patterns only)
//! v1 v2 ... vk         (m lines, sorted)
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::generators::Pattern;
use crate::hypergraph::Hypergraph;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(line, format!("bad number `{t}`")))
        })
        .collect()
}

/// Parses an edge list, returning the hypergraph and the roots line if present.
pub fn parse_edge_list(text: &str) -> Result<(Hypergraph, Option<Vec<u32>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header: Vec<usize> = numbers(hl, header)?;
    let [k, n, m] = header[..] else {
        return Err(parse_err(hl, "header must be `k n m`"));
    };
    let mut roots = None;
    let mut edges = Vec::with_capacity(m);
    for (ln, l) in lines {
        if let Some(rest) = l.strip_prefix("roots") {
            if roots.is_some() || !edges.is_empty() {
                return Err(parse_err(ln, "roots line must directly follow the header"));
            }
            roots = Some(numbers(ln, rest)?);
            continue;
        }
        let e: Vec<u32> = numbers(ln, l)?;
        if e.len() != k {
            return Err(parse_err(
                ln,
                format!("expected {k} vertices, found {}", e.len()),
            ));
        }
        edges.push(e);
    }
    if edges.len() != m {
        return Err(parse_err(
            hl,
            format!("header announces {m} edges, found {}", edges.len()),
        ));
    }
    Ok((Hypergraph::build(n, k, edges)?, roots))
}

pub fn read_hypergraph(text: &str) -> Result<Hypergraph> {
    parse_edge_list(text).map(|(h, _)| h)
}

pub fn read_pattern(text: &str) -> Result<Pattern> {
    let (h, roots) = parse_edge_list(text)?;
    Pattern::from_graph(h).with_roots(roots.unwrap_or_default())
}

fn write_body(h: &Hypergraph, roots: &[u32]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", h.k(), h.n(), h.edge_count());
    if !roots.is_empty() {
        out.push_str("roots");
        for r in roots {
            let _ = write!(out, " {r}");
        }
        out.push('\n');
    }
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_hypergraph(h: &Hypergraph) -> String {
    write_body(h, &[])
}

pub fn write_pattern(p: &Pattern) -> String {
    write_body(p.graph(), p.roots())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid_pattern, pattern_library};

    #[test]
    fn round_trip() {
        let text = "3 5 2\n0 1 2\n1 3 4\n";
        let h = read_hypergraph(text).unwrap();
        assert_eq!(write_hypergraph(&h), text);
        let messy = "# comment\n3 5 2\n\n4 3 1\n2 1 0\n";
        assert_eq!(write_hypergraph(&read_hypergraph(messy).unwrap()), text);
    }

    #[test]
    fn patterns_keep_roots() {
        let g = grid_pattern(&pattern_library("edge").unwrap()).unwrap();
        let text = write_pattern(&g);
        assert!(text.lines().nth(1).unwrap().starts_with("roots 0 1 2"));
        let back = read_pattern(&text).unwrap();
        assert_eq!(back.roots(), g.roots());
        assert_eq!(back.graph(), g.graph());
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(read_hypergraph(""), Err(Error::Parse { .. })));
        assert!(matches!(
            read_hypergraph("3 4 1\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_hypergraph("3 4 2\n0 1 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_hypergraph("3 4 1\n0 1 7\n"),
            Err(Error::RejectsVertexRange { .. })
        ));
        assert!(matches!(
            read_hypergraph("3 4 1\n0 1 x\n"),
            Err(Error::Parse { .. })
        ));
    }
}
