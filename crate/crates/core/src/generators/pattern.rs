use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// A small target hypergraph on labels `0..f` with optional ordered roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    name: Option<String>,
    graph: Hypergraph,
    roots: Vec<u32>,
    linear: bool,
}

/// First pair of edges sharing two or more vertices, if any.
pub(crate) fn linearity_violation(h: &Hypergraph) -> Option<(Vec<u32>, Vec<u32>)> {
    let m = h.edge_count();
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (h.edge(i), h.edge(j));
            if a.iter().filter(|v| b.contains(v)).count() >= 2 {
                return Some((a.to_vec(), b.to_vec()));
            }
        }
    }
    None
}

impl Pattern {
    pub fn new<E, I>(f: usize, k: usize, edges: I) -> Result<Self>
    where
        E: AsRef<[u32]>,
        I: IntoIterator<Item = E>,
    {
        if f < k {
            return Err(Error::InvalidParameters(format!(
                "pattern on {f} vertices cannot be {k}-uniform"
            )));
        }
        let graph = Hypergraph::build(f, k, edges)?;
        Ok(Self::from_graph(graph))
    }

    pub fn from_graph(graph: Hypergraph) -> Self {
        let linear = linearity_violation(&graph).is_none();
        Pattern {
            name: None,
            graph,
            roots: Vec::new(),
            linear,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Sets the ordered roots; they must be distinct labels below `f`.
    pub fn with_roots(mut self, roots: Vec<u32>) -> Result<Self> {
        let f = self.f();
        let mut seen = vec![false; f];
        for &r in &roots {
            if r as usize >= f {
                return Err(Error::RejectsVertexRange { vertex: r, n: f });
            }
            if std::mem::replace(&mut seen[r as usize], true) {
                return Err(Error::InvalidParameters(format!("root {r} listed twice")));
            }
        }
        self.roots = roots;
        Ok(self)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    #[inline]
    pub fn f(&self) -> usize {
        self.graph.n()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn edges(&self) -> std::slice::ChunksExact<'_, u32> {
        self.graph.edges()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Whether every two edges share at most one vertex.
    pub fn is_linear(&self) -> bool {
        self.linear
    }

    /// Checks the no-packing hypothesis for the parity construction: an even
    /// number of vertices that split into pairs `{w, z}` whose links share a
    /// pair. Returns such a pairing when one exists.
    pub fn common_link_pairing(&self) -> Option<Vec<(u32, u32)>> {
        let f = self.f();
        if f % 2 == 1 || self.k() != 3 {
            return None;
        }
        let mut ok = vec![vec![false; f]; f];
        for w in 0..f as u32 {
            for z in w + 1..f as u32 {
                let shared = (0..f as u32).any(|u| {
                    (u + 1..f as u32).any(|v| {
                        ![w, z].contains(&u)
                            && ![w, z].contains(&v)
                            && self.graph.contains_edge(&[w, u, v])
                            && self.graph.contains_edge(&[z, u, v])
                    })
                });
                ok[w as usize][z as usize] = shared;
                ok[z as usize][w as usize] = shared;
            }
        }
        let mut used = vec![false; f];
        let mut pairs = Vec::new();
        fn go(ok: &[Vec<bool>], used: &mut [bool], pairs: &mut Vec<(u32, u32)>) -> bool {
            let Some(w) = used.iter().position(|&u| !u) else {
                return true;
            };
            used[w] = true;
            for z in w + 1..used.len() {
                if !used[z] && ok[w][z] {
                    used[z] = true;
                    pairs.push((w as u32, z as u32));
                    if go(ok, used, pairs) {
                        return true;
                    }
                    pairs.pop();
                    used[z] = false;
                }
            }
            used[w] = false;
            false
        }
        go(&ok, &mut used, &mut pairs).then_some(pairs)
    }
}

/// Complete k-partite pattern with parts of the given sizes, labelled consecutively.
pub fn complete_partite(sizes: &[usize]) -> Result<Pattern> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::InvalidParameters(format!(
            "bad part sizes {sizes:?}"
        )));
    }
    let mut parts = Vec::new();
    let mut next = 0u32;
    for &t in sizes {
        parts.push((next..next + t as u32).collect::<Vec<_>>());
        next += t as u32;
    }
    let mut edges = vec![Vec::new()];
    for part in &parts {
        edges = edges
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                part.iter().map(move |&v| {
                    let mut e = e.clone();
                    e.push(v);
                    e
                })
            })
            .collect();
    }
    let name = format!(
        "complete_partite({})",
        sizes
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(Pattern::new(next as usize, sizes.len(), edges)?.named(name))
}

fn parse_args(inner: &str) -> Option<Vec<usize>> {
    inner.split(',').map(|t| t.trim().parse().ok()).collect()
}

/// Looks up a named pattern.
///
/// Names: `cherry`, `c4_2plus1`, `cherry_4cycle`, `k222`,
/// `complete_partite(t1,...,tk)`, `edge(k)` (plain `edge` means `edge(3)`).
pub fn pattern_library(name: &str) -> Result<Pattern> {
    let unknown = || Error::UnknownPattern(name.to_string());
    let trimmed = name.trim();
    let p = match trimmed {
        "cherry" => Pattern::new(4, 3, [[0, 1, 2], [0, 1, 3]])?,
        "c4_2plus1" => Pattern::new(6, 3, [[0, 1, 4], [0, 1, 5], [2, 3, 4], [2, 3, 5]])?,
        "cherry_4cycle" => Pattern::new(
            8,
            3,
            [
                [0, 1, 2],
                [0, 1, 3],
                [2, 3, 4],
                [2, 3, 5],
                [4, 5, 6],
                [4, 5, 7],
                [6, 7, 0],
                [6, 7, 1],
            ],
        )?,
        "k222" => return complete_partite(&[2, 2, 2]).map(|p| p.named("k222")),
        "edge" => return edge(3),
        _ => {
            let (head, rest) = trimmed.split_once('(').ok_or_else(unknown)?;
            let args = rest
                .strip_suffix(')')
                .and_then(parse_args)
                .ok_or_else(unknown)?;
            return match head {
                "edge" if args.len() == 1 => edge(args[0]),
                "complete_partite" => complete_partite(&args),
                _ => Err(unknown()),
            };
        }
    };
    Ok(p.named(trimmed))
}

/// The single k-edge.
pub fn edge(k: usize) -> Result<Pattern> {
    if k < 2 {
        return Err(Error::InvalidParameters(format!("edge uniformity {k} < 2")));
    }
    let e: Vec<u32> = (0..k as u32).collect();
    Ok(Pattern::new(k, k, [e])?.named(format!("edge({k})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_shapes() {
        let c = pattern_library("cherry").unwrap();
        assert_eq!((c.f(), c.edge_count()), (4, 2));
        assert!(!c.is_linear());
        let c4 = pattern_library("c4_2plus1").unwrap();
        assert_eq!((c4.f(), c4.edge_count()), (6, 4));
        let cc = pattern_library("cherry_4cycle").unwrap();
        assert_eq!((cc.f(), cc.edge_count()), (8, 8));
        let k = pattern_library("k222").unwrap();
        assert_eq!((k.f(), k.edge_count()), (6, 8));
        let e = pattern_library("edge(4)").unwrap();
        assert_eq!((e.f(), e.k(), e.edge_count()), (4, 4, 1));
        assert!(e.is_linear());
        let cp = pattern_library("complete_partite(1,1,2)").unwrap();
        assert_eq!(cp.graph(), c.graph());
        assert!(matches!(
            pattern_library("petersen"),
            Err(Error::UnknownPattern(_))
        ));
        assert!(matches!(
            pattern_library("edge(x)"),
            Err(Error::UnknownPattern(_))
        ));
    }

    #[test]
    fn pairing_hypothesis() {
        for name in ["k222", "cherry_4cycle"] {
            assert!(
                pattern_library(name)
                    .unwrap()
                    .common_link_pairing()
                    .is_some(),
                "{name}"
            );
        }
        // vertex 0 of a cherry has no partner sharing a link pair
        for name in ["cherry", "c4_2plus1"] {
            assert!(
                pattern_library(name)
                    .unwrap()
                    .common_link_pairing()
                    .is_none(),
                "{name}"
            );
        }
        assert!(edge(3).unwrap().common_link_pairing().is_none());
        let k = pattern_library("k222").unwrap();
        assert_eq!(
            k.common_link_pairing().unwrap(),
            vec![(0, 1), (2, 3), (4, 5)]
        );
    }

    #[test]
    fn roots_validated() {
        let c = pattern_library("cherry").unwrap();
        assert!(c.clone().with_roots(vec![0, 1]).is_ok());
        assert!(c.clone().with_roots(vec![0, 0]).is_err());
        assert!(c.with_roots(vec![4]).is_err());
    }
}
