//! Injective, edge-preserving maps of a pattern into a host.
//!
//! Search order: roots first in the given order, then repeatedly the unplaced
//! pattern vertex completing the most pattern edges, ties broken by larger
//! pattern degree and then smaller label. When a vertex completes an edge its
//! candidates come from the host's codegree completions; otherwise from its
//! allowed range in ascending label (or supplied rank) order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::Pattern;
use crate::hypergraph::Hypergraph;
use crate::vertex_set::VertexSet;

/// Constraints on where pattern vertices may go.
#[derive(Debug, Clone, Default)]
pub struct RootedQuery {
    pub roots: Vec<(u32, u32)>,
    pub ranges: Vec<(u32, VertexSet)>,
}

impl RootedQuery {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pins pattern vertex `w` to host vertex `x`.
    pub fn root(mut self, w: u32, x: u32) -> Self {
        self.roots.push((w, x));
        self
    }

    /// Restricts pattern vertex `w` to the host vertices in `set`.
    pub fn range(mut self, w: u32, set: VertexSet) -> Self {
        self.ranges.push((w, set));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyCount {
    pub count: u64,
    pub truncated: bool,
}

enum Slot {
    Root(u32),
    Free(VertexSet),
}

struct Step {
    w: u32,
    slot: Slot,
    /// For each pattern edge completed at this step, its other vertices.
    completes: Vec<Vec<u32>>,
}

/// A compiled search plan for one pattern, host and query.
pub struct Embedder<'a> {
    h: &'a Hypergraph,
    f: usize,
    steps: Vec<Step>,
    rank: Option<Vec<u32>>,
}

impl<'a> Embedder<'a> {
    pub fn new(h: &'a Hypergraph, pattern: &Pattern, query: &RootedQuery) -> Result<Self> {
        if pattern.k() != h.k() {
            return Err(Error::InvalidQuery(format!(
                "pattern is {}-uniform, host is {}-uniform",
                pattern.k(),
                h.k()
            )));
        }
        let f = pattern.f();
        let mut slots: Vec<Option<Slot>> = (0..f).map(|_| None).collect();
        let mut root_order = Vec::new();
        let mut images = Vec::new();
        for &(w, x) in &query.roots {
            if w as usize >= f {
                return Err(Error::InvalidQuery(format!(
                    "pattern vertex {w} out of range"
                )));
            }
            if !h.active().contains(x) {
                return Err(Error::InvalidQuery(format!("host vertex {x} not in host")));
            }
            if slots[w as usize].is_some() {
                return Err(Error::InvalidQuery(format!(
                    "pattern vertex {w} constrained twice"
                )));
            }
            if images.contains(&x) {
                return Err(Error::InvalidQuery(format!(
                    "host vertex {x} used by two roots"
                )));
            }
            images.push(x);
            slots[w as usize] = Some(Slot::Root(x));
            root_order.push(w);
        }
        for (w, set) in &query.ranges {
            if *w as usize >= f {
                return Err(Error::InvalidQuery(format!(
                    "pattern vertex {w} out of range"
                )));
            }
            if slots[*w as usize].is_some() {
                return Err(Error::InvalidQuery(format!(
                    "pattern vertex {w} constrained twice"
                )));
            }
            if set.universe() != h.n() {
                return Err(Error::InvalidQuery(
                    "range set has the wrong universe".into(),
                ));
            }
            slots[*w as usize] = Some(Slot::Free(set.intersection(h.active())));
        }
        let fg = pattern.graph();
        let mut placed = vec![false; f];
        let mut order = root_order;
        for &w in &order {
            placed[w as usize] = true;
        }
        while order.len() < f {
            let completes = |w: u32, placed: &[bool]| {
                fg.incident_edges(w)
                    .iter()
                    .filter(|&&ei| {
                        fg.edge(ei as usize)
                            .iter()
                            .all(|&u| u == w || placed[u as usize])
                    })
                    .count()
            };
            let next = (0..f as u32)
                .filter(|&w| !placed[w as usize])
                .max_by_key(|&w| (completes(w, &placed), fg.degree(w), std::cmp::Reverse(w)))
                .expect("an unplaced vertex remains");
            placed[next as usize] = true;
            order.push(next);
        }
        let mut position = vec![0usize; f];
        for (t, &w) in order.iter().enumerate() {
            position[w as usize] = t;
        }
        let steps = order
            .iter()
            .enumerate()
            .map(|(t, &w)| {
                let completes = fg
                    .incident_edges(w)
                    .iter()
                    .map(|&ei| fg.edge(ei as usize))
                    .filter(|e| e.iter().all(|&u| position[u as usize] <= t))
                    .map(|e| e.iter().copied().filter(|&u| u != w).collect())
                    .collect();
                let slot = slots[w as usize]
                    .take()
                    .unwrap_or_else(|| Slot::Free(h.active().clone()));
                Step { w, slot, completes }
            })
            .collect();
        Ok(Embedder {
            h,
            f,
            steps,
            rank: None,
        })
    }

    /// Visits free candidates in increasing `rank[v]` instead of label order.
    pub fn with_rank(mut self, rank: Vec<u32>) -> Self {
        self.rank = Some(rank);
        self
    }

    fn candidates(&self, t: usize, map: &[u32], used: &VertexSet, out: &mut Vec<u32>) {
        out.clear();
        let step = &self.steps[t];
        let edge_ok = |x: u32, out_edges: &[Vec<u32>], key: &mut Vec<u32>| {
            out_edges.iter().all(|others| {
                key.clear();
                key.extend(others.iter().map(|&u| map[u as usize]));
                key.push(x);
                key.sort_unstable();
                self.h.has_sorted_edge(key)
            })
        };
        let mut key = Vec::with_capacity(self.h.k());
        match &step.slot {
            Slot::Root(x) => {
                if !used.contains(*x) && edge_ok(*x, &step.completes, &mut key) {
                    out.push(*x);
                }
            }
            Slot::Free(allowed) => {
                if let Some((first, rest)) = step.completes.split_first() {
                    key.extend(first.iter().map(|&u| map[u as usize]));
                    key.sort_unstable();
                    let base = self.h.completions(&key);
                    for &x in base {
                        if allowed.contains(x) && !used.contains(x) && edge_ok(x, rest, &mut key) {
                            out.push(x);
                        }
                    }
                } else {
                    out.extend(allowed.iter().filter(|&x| !used.contains(x)));
                }
                if let Some(rank) = &self.rank {
                    out.sort_by_key(|&x| rank[x as usize]);
                }
            }
        }
    }

    fn dfs(
        &self,
        t: usize,
        map: &mut [u32],
        used: &mut VertexSet,
        visit: &mut dyn FnMut(&[u32]) -> bool,
    ) -> bool {
        if t == self.steps.len() {
            return visit(map);
        }
        let mut cands = Vec::new();
        self.candidates(t, map, used, &mut cands);
        let w = self.steps[t].w as usize;
        for x in cands {
            map[w] = x;
            used.insert(x);
            let go_on = self.dfs(t + 1, map, used, visit);
            used.remove(x);
            if !go_on {
                return false;
            }
        }
        true
    }

    /// Calls `visit` with each copy (pattern vertex → host vertex) in search
    /// order until it returns `false`.
    pub fn for_each(&self, mut visit: impl FnMut(&[u32]) -> bool) {
        let mut map = vec![u32::MAX; self.f];
        let mut used = VertexSet::empty(self.h.n());
        self.dfs(0, &mut map, &mut used, &mut visit);
    }

    /// First copy in search order.
    pub fn first(&self) -> Option<Vec<u32>> {
        let mut found = None;
        self.for_each(|m| {
            found = Some(m.to_vec());
            false
        });
        found
    }

    /// Number of copies, stopping at `limit` when given.
    pub fn count(&self, limit: Option<u64>) -> CopyCount {
        if let Some(limit) = limit {
            // one copy past the limit tells whether the count was cut short
            let mut count = 0u64;
            self.for_each(|_| {
                count += 1;
                count <= limit
            });
            return CopyCount {
                count: count.min(limit),
                truncated: count > limit,
            };
        }
        // split on the first step; the sum does not depend on scheduling
        let mut first = Vec::new();
        let map = vec![u32::MAX; self.f];
        let used = VertexSet::empty(self.h.n());
        if self.steps.is_empty() {
            return CopyCount {
                count: 1,
                truncated: false,
            };
        }
        self.candidates(0, &map, &used, &mut first);
        let w = self.steps[0].w as usize;
        let count = first
            .par_iter()
            .map(|&x| {
                let mut map = map.clone();
                let mut used = used.clone();
                map[w] = x;
                used.insert(x);
                let mut c = 0u64;
                self.dfs(1, &mut map, &mut used, &mut |_| {
                    c += 1;
                    true
                });
                c
            })
            .sum();
        CopyCount {
            count,
            truncated: false,
        }
    }
}

/// Number of injective edge-preserving maps respecting the query.
pub fn count_rooted_copies(
    h: &Hypergraph,
    pattern: &Pattern,
    query: &RootedQuery,
    limit: Option<u64>,
) -> Result<CopyCount> {
    Ok(Embedder::new(h, pattern, query)?.count(limit))
}

/// The first copy of the pattern inside `w`, if any.
pub fn find_copy_within(h: &Hypergraph, pattern: &Pattern, w: &VertexSet) -> Option<Vec<u32>> {
    if w.len() < pattern.f() {
        return None;
    }
    let mut q = RootedQuery::new();
    for v in 0..pattern.f() as u32 {
        q = q.range(v, w.clone());
    }
    Embedder::new(h, pattern, &q).ok()?.first()
}

/// Whether `map` sends every pattern edge to a host edge injectively.
pub fn is_copy(h: &Hypergraph, pattern: &Pattern, map: &[u32]) -> bool {
    if map.len() != pattern.f() {
        return false;
    }
    let mut seen = map.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == map.len()
        && pattern
            .edges()
            .all(|e| h.contains_edge(&e.iter().map(|&w| map[w as usize]).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{pattern_library, random_uniform};

    #[test]
    fn edge_in_complete_graph() {
        let k4 = random_uniform(4, 3, 1.0, 0).unwrap();
        let e = pattern_library("edge").unwrap();
        let c = count_rooted_copies(&k4, &e, &RootedQuery::new(), None).unwrap();
        assert_eq!(
            c,
            CopyCount {
                count: 24,
                truncated: false
            }
        );
        let c = count_rooted_copies(&k4, &e, &RootedQuery::new(), Some(5)).unwrap();
        assert_eq!(
            c,
            CopyCount {
                count: 5,
                truncated: true
            }
        );
        let c = count_rooted_copies(&k4, &e, &RootedQuery::new(), Some(24)).unwrap();
        assert_eq!(
            c,
            CopyCount {
                count: 24,
                truncated: false
            }
        );
    }

    #[test]
    fn rooted_cherry_in_cherry() {
        let c = pattern_library("cherry").unwrap();
        let q = RootedQuery::new().root(0, 0).root(1, 1);
        assert_eq!(
            count_rooted_copies(c.graph(), &c, &q, None).unwrap().count,
            2
        );
        let q = RootedQuery::new().root(0, 0).root(1, 0);
        assert!(matches!(
            count_rooted_copies(c.graph(), &c, &q, None),
            Err(Error::InvalidQuery(_))
        ));
        let q = RootedQuery::new().root(0, 0).range(0, VertexSet::full(4));
        assert!(matches!(
            count_rooted_copies(c.graph(), &c, &q, None),
            Err(Error::InvalidQuery(_))
        ));
    }

    #[test]
    fn empty_host_has_no_copies() {
        let h = Hypergraph::build(8, 3, Vec::<Vec<u32>>::new()).unwrap();
        let c = pattern_library("cherry").unwrap();
        assert_eq!(
            count_rooted_copies(&h, &c, &RootedQuery::new(), None)
                .unwrap()
                .count,
            0
        );
        assert_eq!(find_copy_within(&h, &c, &VertexSet::full(8)), None);
    }

    #[test]
    fn find_within_window() {
        let k6 = random_uniform(6, 3, 1.0, 0).unwrap();
        let e = pattern_library("edge").unwrap();
        let w = VertexSet::from_members(6, [1, 3, 5]);
        let mut m = find_copy_within(&k6, &e, &w).unwrap();
        assert!(is_copy(&k6, &e, &m));
        m.sort_unstable();
        assert_eq!(m, vec![1, 3, 5]);
    }
}
