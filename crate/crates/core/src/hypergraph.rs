//! Canonical k-uniform hypergraph representation.
//!
//! Vertices are dense integers `0..n`. Sub-hypergraphs (links, induced
//! subgraphs) keep the parent's labels and carry an `active` mask instead of
//! relabeling, so vertex sets found inside them are already in parent labels.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use crate::combinatorics::for_each_combination;
use crate::error::{Error, Result};
use crate::vertex_set::VertexSet;

/// Packed key of a sorted vertex tuple, used for membership tests.
pub(crate) fn tuple_key(sorted: &[u32], bits: u32) -> u128 {
    sorted
        .iter()
        .fold(0u128, |acc, &v| (acc << bits) | v as u128)
}

fn key_bits(k: usize) -> u32 {
    (128 / k.max(1)).min(32) as u32
}

/// Codegree lookups built on first use.
#[derive(Clone)]
enum Completions {
    /// k = 3: completion lists and bitsets per ordered pair, indexed `u * n + v`.
    Pairs {
        lists: Vec<Vec<u32>>,
        bits: Vec<VertexSet>,
    },
    Sparse(HashMap<u128, Vec<u32>>),
}

#[derive(Clone)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    active: VertexSet,
    /// `m * k` vertex labels; each edge sorted, edges in lexicographic order.
    edges: Vec<u32>,
    keys: HashSet<u128>,
    degrees: Vec<u32>,
    incidence: Vec<Vec<u32>>,
    completions: OnceLock<Completions>,
}

/// Extremes of `d(S)` over all `level`-sets of active vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub level: usize,
    pub min: usize,
    pub max: usize,
    /// Lexicographically least set attaining the minimum.
    pub argmin: Option<Vec<u32>>,
    /// Lexicographically least set attaining the maximum.
    pub argmax: Option<Vec<u32>>,
}

impl Hypergraph {
    /// Builds a k-graph on `0..n`, canonicalizing and deduplicating edges.
    pub fn build<E, I>(n: usize, k: usize, edges: I) -> Result<Self>
    where
        E: AsRef<[u32]>,
        I: IntoIterator<Item = E>,
    {
        if k < 2 || n < k {
            return Err(Error::InvalidParameters(format!(
                "need n >= k >= 2, got n = {n}, k = {k}"
            )));
        }
        Self::with_active(n, k, VertexSet::full(n), edges)
    }

    /// Like [`Hypergraph::build`] but over an explicit active vertex mask and
    /// without the `n >= k >= 2` restriction (links of 2-graphs are 1-graphs).
    pub fn with_active<E, I>(n: usize, k: usize, active: VertexSet, edges: I) -> Result<Self>
    where
        E: AsRef<[u32]>,
        I: IntoIterator<Item = E>,
    {
        if k == 0 {
            return Err(Error::InvalidParameters(
                "uniformity must be positive".into(),
            ));
        }
        if active.universe() != n {
            return Err(Error::InvalidParameters(
                "active mask universe differs from n".into(),
            ));
        }
        if n as u64 >= 1u64 << key_bits(k).min(63) {
            return Err(Error::InvalidParameters(format!(
                "n = {n} too large for uniformity {k}"
            )));
        }
        let mut canon: Vec<Vec<u32>> = Vec::new();
        for e in edges {
            let e = e.as_ref();
            let mut sorted = e.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if e.len() != k || sorted.len() != k {
                return Err(Error::RejectsEdgeArity {
                    edge: e.to_vec(),
                    expected: k,
                    found: sorted.len(),
                });
            }
            if let Some(&v) = sorted
                .iter()
                .find(|&&v| v as usize >= n || !active.contains(v))
            {
                return Err(Error::RejectsVertexRange { vertex: v, n });
            }
            canon.push(sorted);
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self::from_canonical(n, k, active, canon))
    }

    fn from_canonical(n: usize, k: usize, active: VertexSet, canon: Vec<Vec<u32>>) -> Self {
        let bits = key_bits(k);
        let mut degrees = vec![0u32; n];
        let mut incidence = vec![Vec::new(); n];
        let mut keys = HashSet::with_capacity(canon.len());
        let mut edges = Vec::with_capacity(canon.len() * k);
        for (i, e) in canon.iter().enumerate() {
            keys.insert(tuple_key(e, bits));
            for &v in e {
                degrees[v as usize] += 1;
                incidence[v as usize].push(i as u32);
            }
            edges.extend_from_slice(e);
        }
        Hypergraph {
            n,
            k,
            active,
            edges,
            keys,
            degrees,
            incidence,
            completions: OnceLock::new(),
        }
    }

    /// Size of the label space.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn active(&self) -> &VertexSet {
        &self.active
    }

    /// Number of active vertices; this is the `n` of all density normalizations.
    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.active.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len() / self.k
    }

    #[inline]
    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i * self.k..(i + 1) * self.k]
    }

    pub fn edges(&self) -> std::slice::ChunksExact<'_, u32> {
        self.edges.chunks_exact(self.k)
    }

    /// Membership test for an edge given in sorted order.
    #[inline]
    pub fn has_sorted_edge(&self, sorted: &[u32]) -> bool {
        sorted.len() == self.k && self.keys.contains(&tuple_key(sorted, key_bits(self.k)))
    }

    /// Membership test for a vertex tuple in any order.
    pub fn contains_edge(&self, vertices: &[u32]) -> bool {
        if vertices.len() != self.k {
            return false;
        }
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        self.has_sorted_edge(&sorted)
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        self.degrees.get(v as usize).copied().unwrap_or(0) as usize
    }

    /// Indices of the edges containing `v`.
    pub fn incident_edges(&self, v: u32) -> &[u32] {
        self.incidence.get(v as usize).map_or(&[], |l| l.as_slice())
    }

    fn completions_index(&self) -> &Completions {
        self.completions.get_or_init(|| {
            if self.k == 3 {
                let n = self.n;
                let mut lists = vec![Vec::new(); n * n];
                let mut bits = vec![VertexSet::empty(n); n * n];
                for e in self.edges() {
                    let (a, b, c) = (e[0] as usize, e[1] as usize, e[2] as usize);
                    for (u, v, w) in [(a, b, c), (a, c, b), (b, c, a)] {
                        lists[u * n + v].push(w as u32);
                        lists[v * n + u].push(w as u32);
                        bits[u * n + v].insert(w as u32);
                        bits[v * n + u].insert(w as u32);
                    }
                }
                for l in &mut lists {
                    l.sort_unstable();
                }
                Completions::Pairs { lists, bits }
            } else {
                let bits = key_bits(self.k);
                let mut map: HashMap<u128, Vec<u32>> = HashMap::new();
                let mut rest = Vec::with_capacity(self.k);
                for e in self.edges() {
                    for skip in 0..self.k {
                        rest.clear();
                        rest.extend(
                            e.iter()
                                .enumerate()
                                .filter(|&(i, _)| i != skip)
                                .map(|(_, &v)| v),
                        );
                        map.entry(tuple_key(&rest, bits)).or_default().push(e[skip]);
                    }
                }
                for l in map.values_mut() {
                    l.sort_unstable();
                }
                Completions::Sparse(map)
            }
        })
    }

    /// Sorted vertices `w` such that `set ∪ {w}` is an edge; `set` must be a
    /// sorted `(k-1)`-set.
    pub fn completions(&self, set: &[u32]) -> &[u32] {
        if set.len() + 1 != self.k {
            return &[];
        }
        match self.completions_index() {
            Completions::Pairs { lists, .. } => {
                let (u, v) = (set[0] as usize, set[1] as usize);
                if u >= self.n || v >= self.n {
                    return &[];
                }
                &lists[u * self.n + v]
            }
            Completions::Sparse(map) => map
                .get(&tuple_key(set, key_bits(self.k)))
                .map_or(&[], |l| l.as_slice()),
        }
    }

    /// Bitset of `N(u, v) = {w : uvw ∈ H}` for 3-graphs. Panics for other `k`.
    #[inline]
    pub fn pair_neighbors(&self, u: u32, v: u32) -> &VertexSet {
        match self.completions_index() {
            Completions::Pairs { bits, .. } => &bits[u as usize * self.n + v as usize],
            Completions::Sparse(_) => panic!("pair neighborhoods exist only for 3-graphs"),
        }
    }

    /// Pair codegree `d({u, v})` for 3-graphs.
    #[inline]
    pub fn codegree(&self, u: u32, v: u32) -> usize {
        if u == v {
            return 0;
        }
        self.pair_neighbors(u, v).len()
    }

    /// Number of `(k - |S|)`-sets `T` disjoint from `S` with `S ∪ T ∈ H`.
    pub fn degree_of_set(&self, set: &[u32]) -> Result<usize> {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() >= self.k {
            return Err(Error::SetTooLarge {
                size: sorted.len(),
                k: self.k,
            });
        }
        Ok(match sorted.len() {
            0 => self.edge_count(),
            1 => self.degree(sorted[0]),
            l if l + 1 == self.k => self.completions(&sorted).len(),
            _ => {
                let first = sorted[0];
                self.incident_edges(first)
                    .iter()
                    .filter(|&&ei| {
                        let e = self.edge(ei as usize);
                        sorted.iter().all(|v| e.binary_search(v).is_ok())
                    })
                    .count()
            }
        })
    }

    /// Exact minimum and maximum of `d(S)` over all `level`-sets of active vertices.
    pub fn min_degree_profile(&self, level: usize) -> Result<DegreeProfile> {
        if level == 0 || level >= self.k {
            return Err(Error::LevelOutOfRange {
                level,
                max: self.k - 1,
            });
        }
        let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for e in self.edges() {
            for_each_combination(e, level, |s| {
                *counts.entry(s.to_vec()).or_insert(0) += 1;
                true
            });
        }
        let verts = self.active.to_vec();
        if verts.len() < level {
            return Ok(DegreeProfile {
                level,
                min: 0,
                max: 0,
                argmin: None,
                argmax: None,
            });
        }
        let mut argmax: Option<(&Vec<u32>, usize)> = None;
        for (s, &c) in &counts {
            if argmax.is_none_or(|(_, best)| c > best) {
                argmax = Some((s, c));
            }
        }
        let total = crate::combinatorics::binomial(verts.len(), level);
        let (min, argmin) = if (counts.len() as u64) < total {
            // some level-set has degree zero; find the lexicographically least one
            let mut missing = None;
            for_each_combination(&verts, level, |s| {
                if counts.contains_key(s) {
                    true
                } else {
                    missing = Some(s.to_vec());
                    false
                }
            });
            (0, missing)
        } else {
            let mut best: Option<(&Vec<u32>, usize)> = None;
            for (s, &c) in &counts {
                if best.is_none_or(|(_, b)| c < b) {
                    best = Some((s, c));
                }
            }
            let (s, c) = best.expect("nonempty");
            (c, Some(s.clone()))
        };
        let (max, argmax) = match argmax {
            Some((s, c)) => (c, Some(s.clone())),
            None => (0, argmin.clone()),
        };
        Ok(DegreeProfile {
            level,
            min,
            max,
            argmin,
            argmax,
        })
    }

    /// The link of `x`: the `(k-1)`-graph on `V ∖ {x}` of sets completing `x`.
    pub fn link(&self, x: u32) -> Result<Hypergraph> {
        if x as usize >= self.n {
            return Err(Error::RejectsVertexRange {
                vertex: x,
                n: self.n,
            });
        }
        let mut active = self.active.clone();
        active.remove(x);
        let canon: Vec<Vec<u32>> = self
            .incident_edges(x)
            .iter()
            .map(|&ei| {
                self.edge(ei as usize)
                    .iter()
                    .copied()
                    .filter(|&v| v != x)
                    .collect()
            })
            .collect();
        Ok(Self::from_canonical(self.n, self.k - 1, active, canon))
    }

    /// Sub-hypergraph induced on `w` (labels kept, mask restricted).
    pub fn induced(&self, w: &VertexSet) -> Hypergraph {
        let active = self.active.intersection(w);
        let canon: Vec<Vec<u32>> = self
            .edges()
            .filter(|e| e.iter().all(|&v| active.contains(v)))
            .map(|e| e.to_vec())
            .collect();
        Self::from_canonical(self.n, self.k, active, canon)
    }

    /// Number of ordered tuples in `X_1 × … × X_k` whose underlying set is an edge.
    pub fn multipartite_count(&self, parts: &[VertexSet]) -> u64 {
        assert_eq!(parts.len(), self.k, "need exactly k vertex sets");
        if parts.iter().any(|p| p.is_empty()) {
            return 0;
        }
        let k = self.k;
        let mut dp = vec![0u64; 1 << k];
        let mut total = 0u64;
        for e in self.edges() {
            dp.iter_mut().for_each(|x| *x = 0);
            dp[0] = 1;
            for mask in 0..(1usize << k) - 1 {
                let c = dp[mask];
                if c == 0 {
                    continue;
                }
                let part = &parts[mask.count_ones() as usize];
                for (j, &v) in e.iter().enumerate() {
                    if mask >> j & 1 == 0 && part.contains(v) {
                        dp[mask | 1 << j] += c;
                    }
                }
            }
            total += dp[(1 << k) - 1];
        }
        total
    }
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.k == other.k
            && self.active == other.active
            && self.edges == other.edges
    }
}

impl Eq for Hypergraph {}

impl fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypergraph")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("active", &self.active.len())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cherry() -> Hypergraph {
        Hypergraph::build(4, 3, [[0, 1, 2], [0, 1, 3]]).unwrap()
    }

    fn k4() -> Hypergraph {
        Hypergraph::build(4, 3, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap()
    }

    #[test]
    fn build_canonicalizes() {
        let h = Hypergraph::build(4, 3, [vec![2, 1, 0], vec![0, 1, 2], vec![3, 1, 0]]).unwrap();
        assert_eq!(h.edge_count(), 2);
        assert_eq!(
            h.edges().collect::<Vec<_>>(),
            vec![&[0, 1, 2][..], &[0, 1, 3][..]]
        );
        assert_eq!(
            Hypergraph::build(5, 3, Vec::<Vec<u32>>::new())
                .unwrap()
                .edge_count(),
            0
        );
        assert_eq!(k4().edge_count(), 4);
    }

    #[test]
    fn build_rejects_bad_edges() {
        assert!(matches!(
            Hypergraph::build(4, 3, [vec![0, 1]]),
            Err(Error::RejectsEdgeArity { .. })
        ));
        assert!(matches!(
            Hypergraph::build(4, 3, [vec![0, 1, 1]]),
            Err(Error::RejectsEdgeArity { .. })
        ));
        assert!(matches!(
            Hypergraph::build(4, 3, [vec![0, 1, 4]]),
            Err(Error::RejectsVertexRange { vertex: 4, .. })
        ));
        assert!(Hypergraph::build(2, 3, Vec::<Vec<u32>>::new()).is_err());
    }

    #[test]
    fn set_degrees() {
        assert_eq!(k4().degree_of_set(&[0]).unwrap(), 3);
        assert_eq!(cherry().degree_of_set(&[0, 1]).unwrap(), 2);
        assert_eq!(cherry().degree_of_set(&[2, 3]).unwrap(), 0);
        assert_eq!(cherry().degree_of_set(&[]).unwrap(), 2);
        assert!(matches!(
            cherry().degree_of_set(&[0, 1, 2]),
            Err(Error::SetTooLarge { .. })
        ));
    }

    #[test]
    fn degree_profiles() {
        let p = k4().min_degree_profile(2).unwrap();
        assert_eq!((p.min, p.max), (2, 2));
        let p = cherry().min_degree_profile(1).unwrap();
        assert_eq!(p.min, 1);
        assert_eq!(p.argmin, Some(vec![2]));
        assert_eq!(p.max, 2);
        assert_eq!(p.argmax, Some(vec![0]));
        let empty = Hypergraph::build(5, 3, Vec::<Vec<u32>>::new()).unwrap();
        for level in 1..3 {
            let p = empty.min_degree_profile(level).unwrap();
            assert_eq!((p.min, p.max), (0, 0));
        }
        assert!(matches!(
            k4().min_degree_profile(3),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            k4().min_degree_profile(0),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn links() {
        let l = cherry().link(0).unwrap();
        assert_eq!(l.k(), 2);
        assert_eq!(
            l.edges().collect::<Vec<_>>(),
            vec![&[1, 2][..], &[1, 3][..]]
        );
        assert!(!l.active().contains(0));
        let l = k4().link(0).unwrap();
        assert_eq!(
            l.edges().collect::<Vec<_>>(),
            vec![&[1, 2][..], &[1, 3][..], &[2, 3][..]]
        );
        let empty = Hypergraph::build(5, 3, Vec::<Vec<u32>>::new()).unwrap();
        assert_eq!(empty.link(3).unwrap().edge_count(), 0);
        assert!(empty.link(5).is_err());
    }

    #[test]
    fn multipartite_counts() {
        let all = VertexSet::full(4);
        assert_eq!(
            k4().multipartite_count(&[all.clone(), all.clone(), all.clone()]),
            24
        );
        let none = VertexSet::empty(4);
        assert_eq!(
            k4().multipartite_count(&[none, all.clone(), all.clone()]),
            0
        );
        let x1 = VertexSet::from_members(4, [0]);
        let x2 = VertexSet::from_members(4, [1]);
        let x3 = VertexSet::from_members(4, [2, 3]);
        assert_eq!(cherry().multipartite_count(&[x1, x2, x3]), 2);
    }

    #[test]
    fn induced_subgraphs() {
        let w = VertexSet::from_members(4, [0, 1, 2]);
        let h = cherry().induced(&w);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![&[0, 1, 2][..]]);
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(cherry().induced(&VertexSet::full(4)), cherry());
        assert_eq!(
            k4().induced(&VertexSet::from_members(4, [0, 1]))
                .edge_count(),
            0
        );
    }

    #[test]
    fn codegree_index_matches_recount() {
        let h = k4();
        assert_eq!(h.completions(&[0, 1]), &[2, 3]);
        assert_eq!(h.pair_neighbors(2, 3).to_vec(), vec![0, 1]);
        let h4 = Hypergraph::build(5, 4, [[0, 1, 2, 3], [0, 1, 2, 4]]).unwrap();
        assert_eq!(h4.completions(&[0, 1, 2]), &[3, 4]);
        assert_eq!(h4.degree_of_set(&[0, 1]).unwrap(), 2);
        assert_eq!(h4.degree_of_set(&[1, 3]).unwrap(), 1);
    }
}
