//! Exact perfect-packing decision by exact cover.
//!
//! Candidate blocks are the vertex sets spanning a (not necessarily induced)
//! copy of the pattern. The cover search is Algorithm X over dancing links,
//! always branching on the uncovered vertex with the fewest live blocks
//! (lowest index on ties) and trying blocks in lexicographic order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::certificate::{Block, PackingCertificate};
use crate::combinatorics::{binomial, for_each_combination};
use crate::embedding::{find_copy_within, Embedder, RootedQuery};
use crate::generators::{ParityConstruction, Pattern};
use crate::hypergraph::Hypergraph;
use crate::vertex_set::VertexSet;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Above this many `f`-subsets, candidates come from copy enumeration instead.
const SUBSET_SCAN_LIMIT: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Exists(PackingCertificate),
    NotExists,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub verdict: Verdict,
    pub nodes_explored: u64,
    pub budget: u64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema: String,
    pub pattern: String,
    pub n: usize,
    pub verdict: String,
    pub nodes_explored: u64,
    pub budget: u64,
    pub candidates: usize,
    pub certificate: Option<PackingCertificate>,
}

impl OracleVerdict {
    pub fn report(&self, pattern: &Pattern, n: usize) -> OracleReport {
        let (verdict, certificate) = match &self.verdict {
            Verdict::Exists(c) => ("exists", Some(c.clone())),
            Verdict::NotExists => ("not_exists", None),
            Verdict::Timeout => ("timeout", None),
        };
        OracleReport {
            schema: "oracle/1".into(),
            pattern: pattern.name().unwrap_or("custom").to_string(),
            n,
            verdict: verdict.into(),
            nodes_explored: self.nodes_explored,
            budget: self.budget,
            candidates: self.candidates,
            certificate,
        }
    }
}

/// Every vertex set carrying a copy of the pattern, with one witness each,
/// sorted lexicographically by vertex set.
pub fn candidate_blocks(h: &Hypergraph, pattern: &Pattern) -> Vec<Block> {
    let f = pattern.f();
    let verts = h.active().to_vec();
    let mut blocks = Vec::new();
    if pattern.edge_count() == 1 && f == pattern.k() {
        let e = pattern.edges().next().expect("one edge");
        for he in h.edges() {
            let mut witness = vec![0; f];
            for (i, &w) in e.iter().enumerate() {
                witness[w as usize] = he[i];
            }
            blocks.push(Block::from_witness(witness));
        }
    } else if binomial(verts.len(), f) <= SUBSET_SCAN_LIMIT {
        for_each_combination(&verts, f, |s| {
            let w = VertexSet::from_members(h.n(), s.iter().copied());
            if let Some(m) = find_copy_within(h, pattern, &w) {
                blocks.push(Block::from_witness(m));
            }
            true
        });
    } else if let Ok(e) = Embedder::new(h, pattern, &RootedQuery::new()) {
        let mut seen: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        e.for_each(|m| {
            let mut key = m.to_vec();
            key.sort_unstable();
            seen.entry(key).or_insert_with(|| m.to_vec());
            true
        });
        blocks = seen.into_values().map(Block::from_witness).collect();
    }
    blocks.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    blocks
}

/// Dancing-links exact cover over columns `0..cols`.
struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    col: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
}

impl Dlx {
    fn new(cols: usize, rows: &[Vec<usize>]) -> Self {
        let header = cols + 1;
        let mut d = Dlx {
            left: (0..header)
                .map(|i| if i == 0 { cols } else { i - 1 })
                .collect(),
            right: (0..header)
                .map(|i| if i == cols { 0 } else { i + 1 })
                .collect(),
            up: (0..header).collect(),
            down: (0..header).collect(),
            col: (0..header).collect(),
            row: vec![usize::MAX; header],
            size: vec![0; header],
        };
        for (r, cs) in rows.iter().enumerate() {
            let mut first = None;
            for &c in cs {
                let c = c + 1;
                let node = d.col.len();
                d.col.push(c);
                d.row.push(r);
                d.up.push(d.up[c]);
                d.down.push(c);
                let above = d.up[c];
                d.down[above] = node;
                d.up[c] = node;
                d.size[c] += 1;
                match first {
                    None => {
                        d.left.push(node);
                        d.right.push(node);
                        first = Some(node);
                    }
                    Some(f) => {
                        let last = d.left[f];
                        d.left.push(last);
                        d.right.push(f);
                        d.right[last] = node;
                        d.left[f] = node;
                    }
                }
            }
        }
        d
    }

    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.size[self.col[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                self.size[self.col[j]] += 1;
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    /// Returns Some(found) or None on budget exhaustion.
    fn search(&mut self, chosen: &mut Vec<usize>, nodes: &mut u64, budget: u64) -> Option<bool> {
        if self.right[0] == 0 {
            return Some(true);
        }
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        let mut c = self.right[0];
        let mut best = c;
        while c != 0 {
            if self.size[c] < self.size[best] {
                best = c;
            }
            c = self.right[c];
        }
        let c = best;
        if self.size[c] == 0 {
            return Some(false);
        }
        self.cover(c);
        let mut r = self.down[c];
        while r != c {
            chosen.push(self.row[r]);
            let mut j = self.right[r];
            while j != r {
                self.cover(self.col[j]);
                j = self.right[j];
            }
            let res = self.search(chosen, nodes, budget);
            let mut j = self.left[r];
            while j != r {
                self.uncover(self.col[j]);
                j = self.left[j];
            }
            match res {
                Some(true) => return Some(true),
                None => {
                    self.uncover(c);
                    return None;
                }
                Some(false) => {
                    chosen.pop();
                }
            }
            r = self.down[r];
        }
        self.uncover(c);
        Some(false)
    }
}

/// Decides whether `h` has a perfect packing by copies of `pattern`.
pub fn oracle_perfect_packing(h: &Hypergraph, pattern: &Pattern, budget: u64) -> OracleVerdict {
    let n = h.vertex_count();
    let f = pattern.f();
    if pattern.k() != h.k() || !n.is_multiple_of(f) {
        return OracleVerdict {
            verdict: Verdict::NotExists,
            nodes_explored: 0,
            budget,
            candidates: 0,
        };
    }
    if n == 0 {
        let cert = PackingCertificate::new(pattern, h.n(), Vec::new());
        return OracleVerdict {
            verdict: Verdict::Exists(cert),
            nodes_explored: 0,
            budget,
            candidates: 0,
        };
    }
    let blocks = candidate_blocks(h, pattern);
    let mut column = vec![usize::MAX; h.n()];
    for (i, v) in h.active().iter().enumerate() {
        column[v as usize] = i;
    }
    let rows: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| b.vertices.iter().map(|&v| column[v as usize]).collect())
        .collect();
    let mut dlx = Dlx::new(n, &rows);
    let mut chosen = Vec::new();
    let mut nodes = 0u64;
    let verdict = match dlx.search(&mut chosen, &mut nodes, budget) {
        Some(true) => {
            let picked = chosen.iter().map(|&r| blocks[r].clone()).collect();
            Verdict::Exists(PackingCertificate::new(pattern, h.n(), picked))
        }
        Some(false) => Verdict::NotExists,
        None => Verdict::Timeout,
    };
    OracleVerdict {
        verdict,
        nodes_explored: nodes,
        budget,
        candidates: blocks.len(),
    }
}

/// Whether the parity argument alone rules out a perfect packing: the
/// pattern pairs up along common link pairs, no `x ∈ X`, `y ∈ Y` share a
/// link pair, and `|X|` is odd.
pub fn parity_predicts_no_packing(pc: &ParityConstruction, pattern: &Pattern) -> bool {
    pattern.common_link_pairing().is_some()
        && pc.x.len() % 2 == 1
        && pc.common_link_violation().is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::verify_certificate;
    use crate::generators::{parity_construction, pattern_library, random_uniform};

    #[test]
    fn complete_host_matching() {
        let k6 = random_uniform(6, 3, 1.0, 0).unwrap();
        let e = pattern_library("edge").unwrap();
        let v = oracle_perfect_packing(&k6, &e, DEFAULT_BUDGET);
        let Verdict::Exists(cert) = &v.verdict else {
            panic!("expected a packing")
        };
        assert_eq!(cert.blocks.len(), 2);
        assert_eq!(verify_certificate(&k6, &e, cert), Ok(()));
    }

    #[test]
    fn divisibility_short_circuits() {
        let k7 = random_uniform(7, 3, 1.0, 0).unwrap();
        let e = pattern_library("edge").unwrap();
        let v = oracle_perfect_packing(&k7, &e, DEFAULT_BUDGET);
        assert_eq!((v.verdict, v.nodes_explored), (Verdict::NotExists, 0));
    }

    #[test]
    fn parity_host_has_no_k222_packing() {
        let k = pattern_library("k222").unwrap();
        for seed in 0..3 {
            let pc = parity_construction(12, seed).unwrap();
            assert_eq!(
                oracle_perfect_packing(&pc.hypergraph, &k, DEFAULT_BUDGET).verdict,
                Verdict::NotExists
            );
            assert!(parity_predicts_no_packing(&pc, &k));
        }
    }

    #[test]
    fn tiny_budget_times_out() {
        // K_7 and K_5 side by side: neither side splits into 4-sets
        let mut edges = Vec::new();
        for part in [0u32..7, 7..12] {
            let verts: Vec<u32> = part.collect();
            for_each_combination(&verts, 3, |e| {
                edges.push(e.to_vec());
                true
            });
        }
        let h = Hypergraph::build(12, 3, edges).unwrap();
        let c = pattern_library("cherry").unwrap();
        assert_eq!(oracle_perfect_packing(&h, &c, 1).verdict, Verdict::Timeout);
        let full = oracle_perfect_packing(&h, &c, DEFAULT_BUDGET);
        assert_eq!(full.verdict, Verdict::NotExists);
        assert!(full.nodes_explored > 1);
    }
}
