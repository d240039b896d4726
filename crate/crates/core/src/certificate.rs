//! Perfect packing certificates and their verification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::generators::Pattern;
use crate::hypergraph::Hypergraph;
use crate::vertex_set::VertexSet;

/// One copy of the pattern: its host vertices and the map pattern vertex → host vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub vertices: Vec<u32>,
    pub witness: Vec<u32>,
}

impl Block {
    pub fn from_witness(witness: Vec<u32>) -> Self {
        let mut vertices = witness.clone();
        vertices.sort_unstable();
        Block { vertices, witness }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub schema: String,
    pub pattern: String,
    pub n: usize,
    pub blocks: Vec<Block>,
}

impl PackingCertificate {
    pub fn new(pattern: &Pattern, n: usize, mut blocks: Vec<Block>) -> Self {
        blocks.sort_by(|a, b| a.vertices.cmp(&b.vertices));
        PackingCertificate {
            schema: "pack/1".into(),
            pattern: pattern.name().unwrap_or("custom").to_string(),
            n,
            blocks,
        }
    }

    pub fn covered(&self, universe: usize) -> VertexSet {
        VertexSet::from_members(
            universe,
            self.blocks.iter().flat_map(|b| b.vertices.iter().copied()),
        )
    }
}

/// First problem found in a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WitnessShape { block: usize },
    Overlap { block: usize, vertex: u32 },
    OutsideHost { block: usize, vertex: u32 },
    Uncovered { vertex: u32 },
    MissingEdge { block: usize, edge: Vec<u32> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WitnessShape { block } => {
                write!(f, "block {block}: witness does not match its vertices")
            }
            Violation::Overlap { block, vertex } => {
                write!(f, "block {block}: vertex {vertex} already covered")
            }
            Violation::OutsideHost { block, vertex } => {
                write!(f, "block {block}: vertex {vertex} not in host")
            }
            Violation::Uncovered { vertex } => write!(f, "vertex {vertex} is not covered"),
            Violation::MissingEdge { block, edge } => {
                write!(f, "block {block}: {edge:?} is not a host edge")
            }
        }
    }
}

/// Checks blocks are disjoint copies of the pattern; with `perfect`, also that
/// they cover every vertex of the host.
pub fn check_blocks(
    h: &Hypergraph,
    pattern: &Pattern,
    blocks: &[Block],
    perfect: bool,
) -> Result<(), Violation> {
    let mut seen = VertexSet::empty(h.n());
    for (i, b) in blocks.iter().enumerate() {
        let mut sorted = b.witness.clone();
        sorted.sort_unstable();
        if b.witness.len() != pattern.f()
            || sorted != b.vertices
            || sorted.windows(2).any(|w| w[0] == w[1])
        {
            return Err(Violation::WitnessShape { block: i });
        }
        for &v in &b.vertices {
            if !h.active().contains(v) {
                return Err(Violation::OutsideHost {
                    block: i,
                    vertex: v,
                });
            }
            if !seen.insert(v) {
                return Err(Violation::Overlap {
                    block: i,
                    vertex: v,
                });
            }
        }
        for e in pattern.edges() {
            let image: Vec<u32> = e.iter().map(|&w| b.witness[w as usize]).collect();
            if !h.contains_edge(&image) {
                return Err(Violation::MissingEdge {
                    block: i,
                    edge: image,
                });
            }
        }
    }
    if perfect {
        if let Some(v) = h.active().difference(&seen).iter().next() {
            return Err(Violation::Uncovered { vertex: v });
        }
    }
    Ok(())
}

/// Whether the certificate is a perfect packing of `h` by copies of `pattern`.
pub fn verify_certificate(
    h: &Hypergraph,
    pattern: &Pattern,
    cert: &PackingCertificate,
) -> Result<(), Violation> {
    check_blocks(h, pattern, &cert.blocks, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{pattern_library, random_uniform};

    #[test]
    fn detects_each_violation() {
        let h = random_uniform(6, 3, 1.0, 0).unwrap();
        let e = pattern_library("edge").unwrap();
        let good = PackingCertificate::new(
            &e,
            6,
            vec![
                Block::from_witness(vec![0, 1, 2]),
                Block::from_witness(vec![3, 4, 5]),
            ],
        );
        assert_eq!(verify_certificate(&h, &e, &good), Ok(()));
        let overlap = PackingCertificate::new(
            &e,
            6,
            vec![
                Block::from_witness(vec![0, 1, 2]),
                Block::from_witness(vec![2, 4, 5]),
            ],
        );
        assert!(matches!(
            verify_certificate(&h, &e, &overlap),
            Err(Violation::Overlap { vertex: 2, .. })
        ));
        let partial = PackingCertificate::new(&e, 6, vec![Block::from_witness(vec![0, 1, 2])]);
        assert!(matches!(
            verify_certificate(&h, &e, &partial),
            Err(Violation::Uncovered { vertex: 3 })
        ));
        let sparse = Hypergraph::build(6, 3, [[0, 1, 2]]).unwrap();
        assert!(matches!(
            verify_certificate(&sparse, &e, &good),
            Err(Violation::MissingEdge { block: 1, .. })
        ));
    }
}
