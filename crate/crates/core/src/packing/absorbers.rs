use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{default_zeta, Strategy};
use crate::audit::{edge_density, separable_partition};
use crate::certificate::{check_blocks, Block};
use crate::combinatorics::{for_each_combination, next_permutation};
use crate::embedding::{find_copy_within, Embedder, RootedQuery};
use crate::error::{Error, Result};
use crate::generators::{edge, grid_cell, grid_pattern, pattern_library, Pattern};
use crate::hypergraph::Hypergraph;
use crate::oracle::{oracle_perfect_packing, Verdict, DEFAULT_BUDGET};
use crate::rng::stage_rng;
use crate::vertex_set::VertexSet;

/// An absorbing set with a perfect packing of itself and one of itself plus its absorbee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub vertices: Vec<u32>,
    pub inner: Vec<Block>,
    pub outer: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsorbCheck {
    pub absorbs: bool,
    /// Packing of `H[A]`, when one exists.
    pub inner: Option<Vec<Block>>,
    /// Packing of `H[A ∪ B]`, when `H[A]` packs and this one does too.
    pub outer: Option<Vec<Block>>,
    /// An oracle call ran out of budget; `absorbs` is then false.
    pub timed_out: bool,
}

/// Decides with the exact oracle whether `a` absorbs `b`.
pub fn verify_absorbs(
    h: &Hypergraph,
    pattern: &Pattern,
    a: &VertexSet,
    b: &VertexSet,
) -> Result<AbsorbCheck> {
    if a.universe() != h.n() || b.universe() != h.n() {
        return Err(Error::InvalidParameters(
            "vertex sets have the wrong universe".into(),
        ));
    }
    if let Some(v) = a.intersection(b).iter().next() {
        return Err(Error::Overlap(v));
    }
    if let Some(v) = a.union(b).difference(h.active()).iter().next() {
        return Err(Error::RejectsVertexRange {
            vertex: v,
            n: h.n(),
        });
    }
    let f = pattern.f();
    if !a.len().is_multiple_of(f) || !b.len().is_multiple_of(f) {
        return Err(Error::DivisibilityViolation(format!(
            "|A| = {} and |B| = {} must both be multiples of {f}",
            a.len(),
            b.len()
        )));
    }
    let mut check = AbsorbCheck {
        absorbs: false,
        inner: None,
        outer: None,
        timed_out: false,
    };
    match oracle_perfect_packing(&h.induced(a), pattern, DEFAULT_BUDGET).verdict {
        Verdict::Exists(c) => check.inner = Some(c.blocks),
        Verdict::NotExists => return Ok(check),
        Verdict::Timeout => {
            check.timed_out = true;
            return Ok(check);
        }
    }
    match oracle_perfect_packing(&h.induced(&a.union(b)), pattern, DEFAULT_BUDGET).verdict {
        Verdict::Exists(c) => {
            check.outer = Some(c.blocks);
            check.absorbs = true;
        }
        Verdict::NotExists => {}
        Verdict::Timeout => check.timed_out = true,
    }
    Ok(check)
}

/// Options for [`find_absorbers`].
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorberSearch {
    pub strategy: Strategy,
    /// Stop after this many absorbers; `None` enumerates everything the search reaches.
    pub limit: Option<usize>,
    pub seed: u64,
    /// Separability threshold; defaults to `min(p/4, α/4)`.
    pub zeta: Option<f64>,
    /// Density used for the `C4` pair threshold; defaults to the edge density.
    pub density: Option<f64>,
}

impl AbsorberSearch {
    pub fn new(strategy: Strategy, limit: Option<usize>, seed: u64) -> Self {
        AbsorberSearch {
            strategy,
            limit,
            seed,
            zeta: None,
            density: None,
        }
    }
}

/// Absorbers for the ordered set `b`.
///
/// Cherry and matching searches run the explicit construction first and then,
/// if the limit is not reached, every remaining packable `a`-set outside `b`,
/// so an unlimited search returns all absorbers of `b`. The `C4` and grid
/// searches only return constructed gadgets.
pub fn find_absorbers(
    h: &Hypergraph,
    pattern: &Pattern,
    b: &[u32],
    search: &AbsorberSearch,
) -> Result<Vec<Absorber>> {
    let strategy = search.strategy;
    strategy.check(pattern)?;
    if h.k() != pattern.k() {
        return Err(Error::UniformityUnsupported {
            expected: pattern.k(),
            found: h.k(),
        });
    }
    let (_, bsize) = strategy.sizes(pattern);
    if b.len() != bsize {
        return Err(Error::InvalidParameters(format!(
            "strategy {} absorbs sets of size {bsize}, got {}",
            strategy.name(),
            b.len()
        )));
    }
    let bset = VertexSet::from_members(h.n(), b.iter().copied());
    if bset.len() != b.len() {
        return Err(Error::InvalidParameters(format!(
            "absorbee {b:?} repeats a vertex"
        )));
    }
    if let Some(&v) = b.iter().find(|&&v| !h.active().contains(v)) {
        return Err(Error::RejectsVertexRange {
            vertex: v,
            n: h.n(),
        });
    }
    let mut out = Collector::new(h, pattern, &bset, search.limit);
    match strategy {
        Strategy::Cherry => cherry(h, pattern, &bset, search, &mut out)?,
        Strategy::C4 => c4(h, pattern, &bset, search, &mut out)?,
        Strategy::Matching => matching(h, pattern, b, &mut out)?,
        Strategy::LinearGrid => {
            let grid =
                grid_pattern(pattern).map_err(|e| Error::UnsupportedStrategy(e.to_string()))?;
            grid_into(h, pattern, &grid, b, &mut out)?;
        }
    }
    Ok(out.found)
}

/// Grid absorbers: rooted copies of `grid` with its roots on `b` in every
/// order. Rows `1..f` give the packing of `A`, columns the packing of `A ∪ B`.
/// Linearity of `pattern` is not checked here.
pub fn grid_absorbers(
    h: &Hypergraph,
    pattern: &Pattern,
    grid: &Pattern,
    b: &[u32],
    limit: Option<usize>,
) -> Result<Vec<Absorber>> {
    let f = pattern.f();
    if grid.f() != f * f || grid.roots().len() != f || b.len() != f {
        return Err(Error::InvalidParameters(
            "grid and absorbee sizes do not match the pattern".into(),
        ));
    }
    let bset = VertexSet::from_members(h.n(), b.iter().copied());
    let mut out = Collector::new(h, pattern, &bset, limit);
    grid_into(h, pattern, grid, b, &mut out)?;
    Ok(out.found)
}

struct Collector<'a> {
    h: &'a Hypergraph,
    pattern: &'a Pattern,
    b: &'a VertexSet,
    limit: Option<usize>,
    seen: HashSet<Vec<u32>>,
    found: Vec<Absorber>,
}

impl<'a> Collector<'a> {
    fn new(
        h: &'a Hypergraph,
        pattern: &'a Pattern,
        b: &'a VertexSet,
        limit: Option<usize>,
    ) -> Self {
        Collector {
            h,
            pattern,
            b,
            limit,
            seen: HashSet::new(),
            found: Vec::new(),
        }
    }

    fn full(&self) -> bool {
        self.limit.is_some_and(|l| self.found.len() >= l)
    }

    fn is_new(&self, vertices: &[u32]) -> bool {
        !self.seen.contains(vertices)
    }

    /// Records an absorber after checking both packings edge by edge.
    /// Returns false once the limit is reached.
    fn offer(&mut self, inner: Vec<Block>, outer: Vec<Block>) -> bool {
        if self.full() {
            return false;
        }
        let mut vertices: Vec<u32> = inner
            .iter()
            .flat_map(|bl| bl.vertices.iter().copied())
            .collect();
        vertices.sort_unstable();
        if self.seen.contains(&vertices) {
            return true;
        }
        let a = VertexSet::from_members(self.h.n(), vertices.iter().copied());
        let covers = |blocks: &[Block], target: &VertexSet| {
            check_blocks(self.h, self.pattern, blocks, false).is_ok()
                && VertexSet::from_members(
                    self.h.n(),
                    blocks.iter().flat_map(|bl| bl.vertices.iter().copied()),
                ) == *target
        };
        let ok = a.len() == vertices.len()
            && a.is_disjoint(self.b)
            && covers(&inner, &a)
            && covers(&outer, &a.union(self.b));
        debug_assert!(
            ok,
            "constructed absorber failed its own check: {vertices:?}"
        );
        if ok {
            self.seen.insert(vertices.clone());
            self.found.push(Absorber {
                vertices,
                inner,
                outer,
            });
        }
        !self.full()
    }
}

/// Isomorphism from a canonical pattern onto `pattern`, as a label map.
fn canonical_map(canonical: &Pattern, pattern: &Pattern) -> Vec<u32> {
    find_copy_within(pattern.graph(), canonical, &VertexSet::full(pattern.f()))
        .expect("strategy check guarantees an isomorphism")
}

/// Block for a copy given in canonical labels.
fn block_via(phi: &[u32], canonical_witness: &[u32]) -> Block {
    let mut witness = vec![0; phi.len()];
    for (i, &x) in canonical_witness.iter().enumerate() {
        witness[phi[i] as usize] = x;
    }
    Block::from_witness(witness)
}

/// Perfect packing of the small vertex set `set` by direct partition search.
fn small_packing(h: &Hypergraph, pattern: &Pattern, set: &[u32]) -> Option<Vec<Block>> {
    let f = pattern.f();
    if !set.len().is_multiple_of(f) {
        return None;
    }
    fn go(h: &Hypergraph, pattern: &Pattern, rest: &[u32], acc: &mut Vec<Block>) -> bool {
        let f = pattern.f();
        let Some((&v, others)) = rest.split_first() else {
            return true;
        };
        let mut done = false;
        for_each_combination(others, f - 1, |mates| {
            let mut part = VertexSet::from_members(h.n(), mates.iter().copied());
            part.insert(v);
            if let Some(w) = find_copy_within(h, pattern, &part) {
                acc.push(Block::from_witness(w));
                let remaining: Vec<u32> = others
                    .iter()
                    .copied()
                    .filter(|u| !mates.contains(u))
                    .collect();
                if go(h, pattern, &remaining, acc) {
                    done = true;
                    return false;
                }
                acc.pop();
            }
            true
        });
        done
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let mut acc = Vec::new();
    go(h, pattern, &sorted, &mut acc).then_some(acc)
}

fn zeta_for(h: &Hypergraph, search: &AbsorberSearch) -> f64 {
    search.zeta.unwrap_or_else(|| default_zeta(h))
}

fn cherry(
    h: &Hypergraph,
    pattern: &Pattern,
    b: &VertexSet,
    search: &AbsorberSearch,
    out: &mut Collector,
) -> Result<()> {
    let pairing = separable_partition(h, b, zeta_for(h, search))?
        .pairing
        .ok_or(Error::NotSeparable)?;
    let canonical = pattern_library("cherry")?;
    let phi = canonical_map(&canonical, pattern);
    let outside = h.active().difference(b);
    let (b1, b2) = pairing[0];
    let (b3, b4) = pairing[1];
    let x1 = h.pair_neighbors(b1, b2).intersection(&outside);
    let x2 = h.pair_neighbors(b3, b4).intersection(&outside);
    let mut order = x1.to_vec();
    order.shuffle(&mut stage_rng(search.seed, "cherry_split"));
    let (y1s, y2s) = order.split_at(order.len() / 2);
    'outer: for &y1 in y1s {
        for &y2 in y2s {
            let mut common = h.pair_neighbors(y1, y2).intersection(&x2);
            common.remove(y1);
            common.remove(y2);
            let common = common.to_vec();
            let mut go_on = true;
            for_each_combination(&common, 2, |xs| {
                let inner = vec![block_via(&phi, &[y1, y2, xs[0], xs[1]])];
                let outer = vec![
                    block_via(&phi, &[b1, b2, y1, y2]),
                    block_via(&phi, &[b3, b4, xs[0], xs[1]]),
                ];
                go_on = out.offer(inner, outer);
                go_on
            });
            if !go_on {
                break 'outer;
            }
        }
    }
    if out.full() {
        return Ok(());
    }
    // every absorber spans a copy, so scanning the copies outside B finds the rest
    let mut ab: Vec<u32> = b.to_vec();
    let outside_vec = outside.to_vec();
    for_each_combination(&outside_vec, 4, |a| {
        if !out.is_new(a) {
            return true;
        }
        let Some(w) = find_copy_within(
            h,
            pattern,
            &VertexSet::from_members(h.n(), a.iter().copied()),
        ) else {
            return true;
        };
        ab.truncate(4);
        ab.extend_from_slice(a);
        match small_packing(h, pattern, &ab) {
            Some(outer) => out.offer(vec![Block::from_witness(w)], outer),
            None => true,
        }
    });
    Ok(())
}

fn matching(h: &Hypergraph, pattern: &Pattern, b: &[u32], out: &mut Collector) -> Result<()> {
    let phi = canonical_map(&edge(3)?, pattern);
    let bset = out.b.clone();
    let outside = h.active().difference(&bset);
    let edges: Vec<[u32; 3]> = h
        .edges()
        .filter(|e| e.iter().all(|&v| outside.contains(v)))
        .map(|e| [e[0], e[1], e[2]])
        .collect();
    let mut sigma = [0usize, 1, 2];
    'perm: loop {
        for x in &edges {
            let xs = VertexSet::from_members(h.n(), x.iter().copied());
            let ys: Vec<VertexSet> = (0..3)
                .map(|i| {
                    h.pair_neighbors(b[i], x[sigma[i]])
                        .intersection(&outside)
                        .difference(&xs)
                })
                .collect();
            for y1 in ys[0].iter() {
                for y2 in ys[1].iter().filter(|&y| y != y1) {
                    let mut y3s = h.pair_neighbors(y1, y2).intersection(&ys[2]);
                    y3s.remove(y1);
                    y3s.remove(y2);
                    for y3 in y3s.iter() {
                        let y = [y1, y2, y3];
                        let inner = vec![block_via(&phi, x), block_via(&phi, &y)];
                        let outer = (0..3)
                            .map(|i| block_via(&phi, &[b[i], x[sigma[i]], y[i]]))
                            .collect();
                        if !out.offer(inner, outer) {
                            break 'perm;
                        }
                    }
                }
            }
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    if out.full() {
        return Ok(());
    }
    // every absorber is two disjoint edges outside B
    let mut ab: Vec<u32> = b.to_vec();
    'pairs: for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (e1, e2) = (edges[i], edges[j]);
            if e1.iter().any(|v| e2.contains(v)) {
                continue;
            }
            let mut a: Vec<u32> = e1.iter().chain(&e2).copied().collect();
            a.sort_unstable();
            if !out.is_new(&a) {
                continue;
            }
            ab.truncate(3);
            ab.extend_from_slice(&a);
            if let Some(outer) = small_packing(h, pattern, &ab) {
                if !out.offer(vec![block_via(&phi, &e1), block_via(&phi, &e2)], outer) {
                    break 'pairs;
                }
            }
        }
    }
    Ok(())
}

/// Pairs of vertices outside `b` whose common neighbourhood meets `x` in at
/// least `threshold` vertices, most-connected first.
fn rich_pairs(h: &Hypergraph, outside: &[u32], x: &VertexSet, threshold: f64) -> Vec<(u32, u32)> {
    let mut scored = Vec::new();
    for (i, &r) in outside.iter().enumerate() {
        for &s in &outside[i + 1..] {
            let c = h.pair_neighbors(r, s).intersection_len(x);
            if c as f64 >= threshold {
                scored.push((std::cmp::Reverse(c), r, s));
            }
        }
    }
    scored.sort_unstable();
    scored.into_iter().map(|(_, r, s)| (r, s)).collect()
}

/// Calls `visit` on tripartite `K_{4,4,4}` copies `(T1, T2, T3)` with
/// `T_i ⊆ y[i]`, pairwise disjoint. Stops when `visit` returns false.
fn for_each_k444(
    h: &Hypergraph,
    y: &[VertexSet; 3],
    mut visit: impl FnMut(&[u32], &[u32], &[u32]) -> bool,
) -> bool {
    let y1 = y[0].to_vec();
    let mut keep_going = true;
    for_each_combination(&y1, 4, |t1| {
        let t1set = VertexSet::from_members(h.n(), t1.iter().copied());
        let y2: Vec<u32> = y[1].difference(&t1set).to_vec();
        let base3 = y[2].difference(&t1set);
        let mut t2 = Vec::with_capacity(4);
        fn grow(
            h: &Hypergraph,
            t1: &[u32],
            y2: &[u32],
            from: usize,
            t2: &mut Vec<u32>,
            c3: &VertexSet,
            visit: &mut dyn FnMut(&[u32], &[u32], &[u32]) -> bool,
        ) -> bool {
            if t2.len() == 4 {
                let cands = c3.to_vec();
                let mut cont = true;
                for_each_combination(&cands, 4, |t3| {
                    cont = visit(t1, t2, t3);
                    cont
                });
                return cont;
            }
            for idx in from..y2.len() {
                let v = y2[idx];
                let mut c = c3.clone();
                c.remove(v);
                for &u in t1 {
                    c.intersect_with(h.pair_neighbors(u, v));
                }
                if c.len() < 4 {
                    continue;
                }
                t2.push(v);
                let cont = grow(h, t1, y2, idx + 1, t2, &c, visit);
                t2.pop();
                if !cont {
                    return false;
                }
            }
            true
        }
        keep_going = grow(h, t1, &y2, 0, &mut t2, &base3, &mut visit);
        keep_going
    });
    keep_going
}

fn c4(
    h: &Hypergraph,
    pattern: &Pattern,
    b: &VertexSet,
    search: &AbsorberSearch,
    out: &mut Collector,
) -> Result<()> {
    let zeta = zeta_for(h, search);
    let pairing = separable_partition(h, b, zeta)?
        .pairing
        .ok_or(Error::NotSeparable)?;
    let canonical = pattern_library("c4_2plus1")?;
    let phi = canonical_map(&canonical, pattern);
    let outside = h.active().difference(b);
    let outside_vec = outside.to_vec();
    let p = search.density.unwrap_or_else(|| edge_density(h));
    let threshold = p * zeta * h.vertex_count() as f64 / 10.0;
    let xs: Vec<VertexSet> = pairing
        .iter()
        .map(|&(u, v)| h.pair_neighbors(u, v).intersection(&outside))
        .collect();
    let rs: Vec<Vec<(u32, u32)>> = xs
        .iter()
        .map(|x| rich_pairs(h, &outside_vec, x, threshold))
        .collect();
    for &(r1, s1) in &rs[0] {
        for &(r2, s2) in rs[1]
            .iter()
            .filter(|&&(r, s)| ![r1, s1].contains(&r) && ![r1, s1].contains(&s))
        {
            let used2 = [r1, s1, r2, s2];
            for &(r3, s3) in rs[2]
                .iter()
                .filter(|&&(r, s)| !used2.contains(&r) && !used2.contains(&s))
            {
                let r = [(r1, s1), (r2, s2), (r3, s3)];
                let rset = VertexSet::from_members(h.n(), [r1, s1, r2, s2, r3, s3]);
                let ys: [VertexSet; 3] = std::array::from_fn(|i| {
                    h.pair_neighbors(r[i].0, r[i].1)
                        .intersection(&xs[i])
                        .difference(&rset)
                });
                let cont = for_each_k444(h, &ys, |t1, t2, t3| {
                    let t = [t1, t2, t3];
                    let y = |i: usize, j: usize| t[i - 1][j - 1];
                    let inner = vec![
                        block_via(&phi, &[r1, s1, y(2, 3), y(3, 3), y(1, 1), y(1, 2)]),
                        block_via(&phi, &[r2, s2, y(3, 4), y(1, 3), y(2, 1), y(2, 2)]),
                        block_via(&phi, &[r3, s3, y(1, 4), y(2, 4), y(3, 1), y(3, 2)]),
                    ];
                    let mut outer: Vec<Block> = (0..3)
                        .map(|i| {
                            let (bi, bj) = pairing[i];
                            block_via(&phi, &[bi, bj, r[i].0, r[i].1, y(i + 1, 1), y(i + 1, 2)])
                        })
                        .collect();
                    outer.push(block_via(
                        &phi,
                        &[y(1, 3), y(2, 3), y(1, 4), y(2, 4), y(3, 3), y(3, 4)],
                    ));
                    out.offer(inner, outer)
                });
                if !cont {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

fn grid_into(
    h: &Hypergraph,
    pattern: &Pattern,
    grid: &Pattern,
    b: &[u32],
    out: &mut Collector,
) -> Result<()> {
    let f = pattern.f();
    let bset = VertexSet::from_members(h.n(), b.iter().copied());
    let outside = h.active().difference(&bset);
    let roots = grid.roots().to_vec();
    let mut perm: Vec<usize> = (0..f).collect();
    loop {
        let mut q = RootedQuery::new();
        for (j, &w) in roots.iter().enumerate() {
            q = q.root(w, b[perm[j]]);
        }
        for w in (0..grid.f() as u32).filter(|w| !roots.contains(w)) {
            q = q.range(w, outside.clone());
        }
        let mut cont = true;
        Embedder::new(h, grid, &q)?.for_each(|map| {
            let cell = |i: usize, j: usize| map[grid_cell(i, j, f) as usize];
            let inner = (1..f)
                .map(|i| Block::from_witness((0..f).map(|l| cell(i, (l + f - i) % f)).collect()))
                .collect();
            let outer = (0..f)
                .map(|j| Block::from_witness((0..f).map(|l| cell((l + f - j) % f, j)).collect()))
                .collect();
            cont = out.offer(inner, outer);
            cont
        });
        if !cont || !next_permutation(&mut perm) {
            return Ok(());
        }
    }
}
