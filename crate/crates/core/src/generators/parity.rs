use rand::Rng;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::stage_rng;
use crate::vertex_set::VertexSet;

/// A parity 3-graph together with the data it was built from.
#[derive(Clone, Debug)]
pub struct ParityConstruction {
    pub hypergraph: Hypergraph,
    pub x: VertexSet,
    pub y: VertexSet,
    pub seed: u64,
    /// Adjacency of the underlying random graph `G`.
    pub base_graph: Vec<VertexSet>,
}

/// Size of the part `X` for `n` vertices; odd whenever `n` is even.
pub fn parity_part_size(n: usize) -> usize {
    match n % 4 {
        0 => n / 2 - 1,
        2 => n / 2,
        _ => (n - 1) / 2,
    }
}

/// Samples `G(n, 1/2)` and keeps a triple `E` when `|E ∩ X|` is even and `E`
/// is a clique of `G`, or `|E ∩ X|` is odd and `E` is independent in `G`.
pub fn parity_construction(n: usize, seed: u64) -> Result<ParityConstruction> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    let mut rng = stage_rng(seed, "parity_base_graph");
    let mut adj = vec![VertexSet::empty(n); n];
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random_bool(0.5) {
                adj[u as usize].insert(v);
                adj[v as usize].insert(u);
            }
        }
    }
    let x_size = parity_part_size(n) as u32;
    let x = VertexSet::from_members(n, 0..x_size);
    let y = VertexSet::full(n).difference(&x);
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            let ab = adj[a as usize].contains(b);
            for c in b + 1..n as u32 {
                let pairs = ab as u8
                    + adj[a as usize].contains(c) as u8
                    + adj[b as usize].contains(c) as u8;
                let in_x = [a, b, c].iter().filter(|&&v| v < x_size).count();
                let keep = if in_x % 2 == 0 {
                    pairs == 3
                } else {
                    pairs == 0
                };
                if keep {
                    edges.push([a, b, c]);
                }
            }
        }
    }
    Ok(ParityConstruction {
        hypergraph: Hypergraph::build(n, 3, edges)?,
        x,
        y,
        seed,
        base_graph: adj,
    })
}

impl ParityConstruction {
    /// Searches for `x ∈ X`, `y ∈ Y` and a pair `{u, v}` with `xuv` and `yuv`
    /// both edges. The construction forbids this, so `None` is expected.
    pub fn common_link_violation(&self) -> Option<(u32, u32, u32, u32)> {
        let h = &self.hypergraph;
        for x in &self.x {
            for y in &self.y {
                for u in 0..h.n() as u32 {
                    if u == x || u == y {
                        continue;
                    }
                    let shared = h.pair_neighbors(x, u).intersection(h.pair_neighbors(y, u));
                    if let Some(v) = shared.iter().next() {
                        return Some((x, y, u, v));
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn part_sizes() {
        let p = parity_construction(12, 3).unwrap();
        assert_eq!((p.x.len(), p.y.len()), (5, 7));
        let p = parity_construction(14, 3).unwrap();
        assert_eq!((p.x.len(), p.y.len()), (7, 7));
        assert_eq!(parity_part_size(13), 6);
        assert_eq!(parity_part_size(15), 7);
        for n in (4..40).step_by(2) {
            assert_eq!(parity_part_size(n) % 2, 1);
        }
    }

    #[test]
    fn edges_follow_parity_rule() {
        for seed in 0..5 {
            let p = parity_construction(16, seed).unwrap();
            let g = &p.base_graph;
            for a in 0..16u32 {
                for b in a + 1..16 {
                    for c in b + 1..16 {
                        let adj = [(a, b), (a, c), (b, c)].map(|(u, v)| g[u as usize].contains(v));
                        let in_x = [a, b, c].iter().filter(|&&v| p.x.contains(v)).count();
                        let expected = if in_x % 2 == 0 {
                            adj.iter().all(|&e| e)
                        } else {
                            adj.iter().all(|&e| !e)
                        };
                        assert_eq!(p.hypergraph.contains_edge(&[a, b, c]), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn no_common_link_pairs_across_parts() {
        for n in [9, 12, 20, 30] {
            for seed in 0..3 {
                assert_eq!(
                    parity_construction(n, seed)
                        .unwrap()
                        .common_link_violation(),
                    None
                );
            }
        }
    }
}
