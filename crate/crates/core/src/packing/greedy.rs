use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::audit::separable_partition;
use crate::certificate::Block;
use crate::embedding::{Embedder, RootedQuery};
use crate::error::{Error, Result};
use crate::generators::Pattern;
use crate::hypergraph::Hypergraph;
use crate::rng::{indexed_rng, stage_rng};
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyMode {
    /// Hand back copies until `b` divides the leftover.
    Plain { b: usize },
    /// Release each copy with probability `phi`, rebalance to a multiple of `b`,
    /// and retry until the leftover splits into pairs of codegree `≥ ζn`.
    Separable {
        zeta: f64,
        b: usize,
        phi: f64,
        retries: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub blocks: Vec<Block>,
    pub leftover: Vec<u32>,
    /// Pairing of the leftover in separable mode.
    pub pairing: Option<Vec<(u32, u32)>>,
    pub released: usize,
    pub attempts: usize,
}

/// Extracts copies from `H[V ∖ forbidden]` until none is left, visiting
/// vertices in a seeded random order.
fn extract(
    h: &Hypergraph,
    pattern: &Pattern,
    forbidden: &VertexSet,
    seed: u64,
) -> Result<(Vec<Block>, VertexSet)> {
    let mut rest = h.active().difference(forbidden);
    let mut rank: Vec<u32> = (0..h.n() as u32).collect();
    rank.shuffle(&mut stage_rng(seed, "greedy_order"));
    let mut blocks = Vec::new();
    loop {
        if rest.len() < pattern.f() {
            break;
        }
        let mut q = RootedQuery::new();
        for w in 0..pattern.f() as u32 {
            q = q.range(w, rest.clone());
        }
        let Some(w) = Embedder::new(h, pattern, &q)?
            .with_rank(rank.clone())
            .first()
        else {
            break;
        };
        for &v in &w {
            rest.remove(v);
        }
        blocks.push(Block::from_witness(w));
    }
    Ok((blocks, rest))
}

/// Greedy almost-perfect packing avoiding `forbidden`.
pub fn greedy_pack(
    h: &Hypergraph,
    pattern: &Pattern,
    forbidden: &VertexSet,
    mode: &GreedyMode,
    seed: u64,
) -> Result<GreedyOutcome> {
    if h.k() != pattern.k() {
        return Err(Error::UniformityUnsupported {
            expected: pattern.k(),
            found: h.k(),
        });
    }
    let f = pattern.f();
    match *mode {
        GreedyMode::Plain { b } => {
            check_b(b, f)?;
            let (mut blocks, rest) = extract(h, pattern, forbidden, seed)?;
            let mut leftover = rest.to_vec();
            let per = b / f;
            // when f does not divide the leftover no rounding helps; callers check
            let y = if leftover.len() % f == 0 {
                (per - (leftover.len() / f) % per) % per
            } else {
                0
            };
            let y = y.min(blocks.len());
            for bl in blocks.split_off(blocks.len() - y) {
                leftover.extend(bl.vertices);
            }
            leftover.sort_unstable();
            Ok(GreedyOutcome {
                blocks,
                leftover,
                pairing: None,
                released: y,
                attempts: 1,
            })
        }
        GreedyMode::Separable {
            zeta,
            b,
            phi,
            retries,
        } => {
            check_b(b, f)?;
            if b % 2 == 1 {
                return Err(Error::OddSetSize(b));
            }
            let per = b / f;
            let mut last = Vec::new();
            for attempt in 0..retries.max(1) {
                let mut rng = indexed_rng(seed, "separable_release", attempt as u64);
                let (blocks, rest) = extract(h, pattern, forbidden, rng.random())?;
                let mut leftover = rest;
                let mut kept = Vec::new();
                let mut released = 0;
                for bl in blocks {
                    if rng.random::<f64>() < phi {
                        released += 1;
                        leftover.union_with(&VertexSet::from_members(
                            h.n(),
                            bl.vertices.iter().copied(),
                        ));
                    } else {
                        kept.push(bl);
                    }
                }
                if leftover.len() % f != 0 {
                    last = leftover.to_vec();
                    continue;
                }
                let top_up = (per - (leftover.len() / f) % per) % per;
                if top_up > kept.len() {
                    last = leftover.to_vec();
                    continue;
                }
                kept.shuffle(&mut rng);
                for bl in kept.split_off(kept.len() - top_up) {
                    released += 1;
                    for v in bl.vertices {
                        leftover.insert(v);
                    }
                }
                if let Some(pairing) = separable_partition(h, &leftover, zeta)?.pairing {
                    return Ok(GreedyOutcome {
                        blocks: kept,
                        leftover: leftover.to_vec(),
                        pairing: Some(pairing),
                        released,
                        attempts: attempt + 1,
                    });
                }
                last = leftover.to_vec();
            }
            Err(Error::SeparabilityUnreachable {
                size: last.len(),
                attempts: retries.max(1),
                leftover: last,
            })
        }
    }
}

fn check_b(b: usize, f: usize) -> Result<()> {
    if b == 0 || !b.is_multiple_of(f) {
        return Err(Error::DivisibilityViolation(format!(
            "absorbee size {b} is not a positive multiple of {f}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{pattern_library, random_uniform};

    #[test]
    fn disjoint_cherries_are_all_found() {
        let edges: Vec<[u32; 3]> = (0..5u32)
            .flat_map(|i| [[4 * i, 4 * i + 1, 4 * i + 2], [4 * i, 4 * i + 1, 4 * i + 3]])
            .collect();
        let h = Hypergraph::build(20, 3, edges).unwrap();
        let cherry = pattern_library("cherry").unwrap();
        let out = greedy_pack(
            &h,
            &cherry,
            &VertexSet::empty(20),
            &GreedyMode::Plain { b: 4 },
            7,
        )
        .unwrap();
        assert!(out.leftover.is_empty());
        assert_eq!(out.blocks.len(), 5);
    }

    #[test]
    fn nothing_to_extract() {
        let h = Hypergraph::build(8, 3, [[0, 1, 2]]).unwrap();
        let cherry = pattern_library("cherry").unwrap();
        let forbidden = VertexSet::from_members(8, [7]);
        let out = greedy_pack(&h, &cherry, &forbidden, &GreedyMode::Plain { b: 4 }, 0).unwrap();
        assert_eq!(out.leftover, (0..7).collect::<Vec<u32>>());
        let out = greedy_pack(
            &h,
            &cherry,
            &VertexSet::empty(8),
            &GreedyMode::Plain { b: 4 },
            0,
        )
        .unwrap();
        assert!(out.blocks.is_empty());
        assert_eq!(out.leftover, (0..8).collect::<Vec<u32>>());
    }

    #[test]
    fn separable_leftover_pairs_up() {
        let h = random_uniform(24, 3, 0.5, 4).unwrap();
        let cherry = pattern_library("cherry").unwrap();
        let mode = GreedyMode::Separable {
            zeta: 0.05,
            b: 4,
            phi: 0.1,
            retries: 5,
        };
        let out = greedy_pack(&h, &cherry, &VertexSet::empty(24), &mode, 2).unwrap();
        let pairing = out.pairing.unwrap();
        assert_eq!(pairing.len() * 2, out.leftover.len());
        assert_eq!(out.leftover.len() % 4, 0);
        for (u, v) in pairing {
            assert!(h.codegree(u, v) as f64 >= 0.05 * 24.0);
        }
    }
}
