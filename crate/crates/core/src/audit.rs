//! Density-defect search, degree summaries and pair separability.

use std::cmp::Ordering;

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial_f64;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::indexed_rng;
use crate::vertex_set::VertexSet;

/// Largest `n·k` for which the defect is maximized exhaustively.
pub const EXACT_THRESHOLD: usize = 21;

const LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectMethod {
    Exact,
    SampledLocalSearch,
}

#[derive(Debug, Clone, Copy)]
pub struct DefectOptions {
    /// Rough number of objective evaluations; restarts = budget / (n·k).
    pub budget: usize,
    pub seed: u64,
    pub exact_threshold: usize,
    /// Maximize `|p·Π|X_i| − e|` instead of the one-sided deficit.
    pub symmetric: bool,
}

impl DefectOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        DefectOptions {
            budget,
            seed,
            exact_threshold: EXACT_THRESHOLD,
            symmetric: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectEstimate {
    /// `max(0, (p·Π|X_i| − e(X_1..X_k)) / n^k)` over the searched families.
    pub mu_hat: f64,
    pub witness: Vec<VertexSet>,
    pub method: DefectMethod,
    pub restarts: usize,
}

/// Normalized defect of a specific family, clamped at zero.
pub fn family_defect(h: &Hypergraph, p: f64, family: &[VertexSet], symmetric: bool) -> f64 {
    let raw = raw_defect(h, p, family);
    let raw = if symmetric { raw.abs() } else { raw };
    raw.max(0.0) / (h.vertex_count() as f64).powi(h.k() as i32)
}

fn raw_defect(h: &Hypergraph, p: f64, family: &[VertexSet]) -> f64 {
    let prod: f64 = family.iter().map(|x| x.len() as f64).product();
    p * prod - h.multipartite_count(family) as f64
}

/// Tuples `(x_1..x_k) ∈ X_1×…×X_k` with `x_i = v` whose set is an edge, for every `v`.
fn position_counts(h: &Hypergraph, family: &[VertexSet], i: usize) -> Vec<f64> {
    let k = h.k();
    let n = h.n();
    let mut out = vec![0.0; n];
    if k == 3 {
        let (a, b) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for v in h.active() {
            let mut c = 0usize;
            for u in &family[a] {
                if u != v {
                    c += h.pair_neighbors(v, u).intersection_len(&family[b]);
                }
            }
            out[v as usize] = c as f64;
        }
        return out;
    }
    let others: Vec<&VertexSet> = (0..k).filter(|&j| j != i).map(|j| &family[j]).collect();
    let mut dp = vec![0u64; 1 << (k - 1)];
    let mut rest = Vec::with_capacity(k - 1);
    for v in h.active() {
        let mut c = 0u64;
        for &ei in h.incident_edges(v) {
            rest.clear();
            rest.extend(h.edge(ei as usize).iter().copied().filter(|&w| w != v));
            dp.iter_mut().for_each(|x| *x = 0);
            dp[0] = 1;
            for mask in 0..dp.len() - 1 {
                let cur = dp[mask];
                if cur == 0 {
                    continue;
                }
                let part = others[mask.count_ones() as usize];
                for (j, &w) in rest.iter().enumerate() {
                    if mask >> j & 1 == 0 && part.contains(w) {
                        dp[mask | 1 << j] += cur;
                    }
                }
            }
            c += dp[dp.len() - 1];
        }
        out[v as usize] = c as f64;
    }
    out
}

struct Climb<'a> {
    h: &'a Hypergraph,
    p: f64,
    sign: f64,
    family: Vec<VertexSet>,
    counts: Vec<Vec<f64>>,
    edges_in: f64,
}

impl<'a> Climb<'a> {
    fn new(h: &'a Hypergraph, p: f64, sign: f64, family: Vec<VertexSet>) -> Self {
        let counts = (0..h.k()).map(|i| position_counts(h, &family, i)).collect();
        let edges_in = h.multipartite_count(&family) as f64;
        Climb {
            h,
            p,
            sign,
            family,
            counts,
            edges_in,
        }
    }

    fn value(&self) -> f64 {
        let prod: f64 = self.family.iter().map(|x| x.len() as f64).product();
        self.sign * (self.p * prod - self.edges_in)
    }

    fn gain(&self, i: usize, v: u32) -> f64 {
        let rest: f64 = (0..self.family.len())
            .filter(|&j| j != i)
            .map(|j| self.family[j].len() as f64)
            .product();
        let dir = if self.family[i].contains(v) {
            -1.0
        } else {
            1.0
        };
        self.sign * dir * (self.p * rest - self.counts[i][v as usize])
    }

    fn toggle(&mut self, i: usize, v: u32) {
        let dir = if self.family[i].contains(v) {
            -1.0
        } else {
            1.0
        };
        self.edges_in += dir * self.counts[i][v as usize];
        self.family[i].toggle(v);
        if self.h.k() == 3 {
            // only the counts at the other two positions depend on X_i
            for j in 0..3 {
                if j == i {
                    continue;
                }
                let other = 3 - i - j;
                for w in self.h.active() {
                    if w != v {
                        let delta = self
                            .h
                            .pair_neighbors(v, w)
                            .intersection_len(&self.family[other]);
                        self.counts[j][w as usize] += dir * delta as f64;
                    }
                }
            }
        } else {
            for j in 0..self.h.k() {
                if j != i {
                    self.counts[j] = position_counts(self.h, &self.family, j);
                }
            }
        }
    }

    /// Best-improvement single-vertex toggles until no move helps.
    fn run(&mut self, max_moves: usize) {
        let verts = self.h.active().to_vec();
        for _ in 0..max_moves {
            let mut best = (1e-9, usize::MAX, 0u32);
            for i in 0..self.family.len() {
                for &v in &verts {
                    let g = self.gain(i, v);
                    if g > best.0 {
                        best = (g, i, v);
                    }
                }
            }
            if best.1 == usize::MAX {
                return;
            }
            self.toggle(best.1, best.2);
        }
    }
}

fn better(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then(b.1.cmp(&a.1))
}

/// Searches for a family `X_1..X_k` maximizing `p·Π|X_i| − e(X_1..X_k)`.
///
/// Exhaustive when `n·k` is at most the exact threshold; otherwise random
/// families at several densities followed by hill climbing, which yields a
/// lower bound on the true defect.
pub fn density_defect(h: &Hypergraph, p: f64, opts: &DefectOptions) -> Result<DefectEstimate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "target density {p} outside (0, 1)"
        )));
    }
    let n = h.vertex_count();
    let k = h.k();
    let signs: &[f64] = if opts.symmetric { &[1.0, -1.0] } else { &[1.0] };
    let (best, method, restarts) = if n * k <= opts.exact_threshold {
        let best = signs
            .iter()
            .map(|&s| exhaustive(h, p, s))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal))
            .expect("at least one sign");
        (best, DefectMethod::Exact, 0)
    } else {
        let restarts = (opts.budget / (n * k).max(1)).max(1);
        let verts = h.active().to_vec();
        let runs: Vec<(f64, Vec<VertexSet>)> = (0..restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = indexed_rng(opts.seed, "density_defect", r as u64);
                let level = LEVELS[r % LEVELS.len()];
                let sign = signs[(r / LEVELS.len()) % signs.len()];
                let family: Vec<VertexSet> = (0..k)
                    .map(|_| {
                        VertexSet::from_members(
                            h.n(),
                            verts.iter().copied().filter(|_| rng.random_bool(level)),
                        )
                    })
                    .collect();
                let mut climb = Climb::new(h, p, sign, family);
                climb.run(4 * n * k);
                (climb.value(), climb.family)
            })
            .collect();
        let (idx, _) = runs
            .iter()
            .enumerate()
            .map(|(i, r)| (r.0, i))
            .max_by(better)
            .map(|(v, i)| (i, v))
            .expect("at least one restart");
        (
            runs[idx].clone(),
            DefectMethod::SampledLocalSearch,
            restarts,
        )
    };
    let (value, mut witness) = best;
    if value <= 0.0 {
        witness = vec![VertexSet::empty(h.n()); k];
    }
    let mu_hat = family_defect(h, p, &witness, opts.symmetric);
    Ok(DefectEstimate {
        mu_hat,
        witness,
        method,
        restarts,
    })
}

/// Enumerates `X_1..X_{k-1}` and chooses `X_k` optimally vertex by vertex.
fn exhaustive(h: &Hypergraph, p: f64, sign: f64) -> (f64, Vec<VertexSet>) {
    let k = h.k();
    let verts = h.active().to_vec();
    let n = verts.len();
    let total_bits = n * (k - 1);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for code in 0u64..(1u64 << total_bits) {
        let mut family: Vec<VertexSet> = (0..k - 1)
            .map(|i| {
                VertexSet::from_members(
                    h.n(),
                    (0..n)
                        .filter(|&b| code >> (i * n + b) & 1 == 1)
                        .map(|b| verts[b]),
                )
            })
            .collect();
        family.push(VertexSet::empty(h.n()));
        let rest: f64 = family[..k - 1].iter().map(|x| x.len() as f64).product();
        let counts = position_counts(h, &family, k - 1);
        let mut value = 0.0;
        for &v in &verts {
            let contrib = sign * (p * rest - counts[v as usize]);
            if contrib > 0.0 {
                family[k - 1].insert(v);
                value += contrib;
            }
        }
        if value > best.0 {
            best = (value, family);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub min_degree: usize,
    /// Minimum and maximum pair degree; absent for graphs (k = 2).
    pub min_codegree: Option<usize>,
    pub max_codegree: Option<usize>,
    /// `δ_1 / C(n-1, k-1)`.
    pub alpha_hat: f64,
}

pub fn degree_report(h: &Hypergraph) -> DegreeReport {
    let n = h.vertex_count();
    let k = h.k();
    let min_degree = h.active().iter().map(|v| h.degree(v)).min().unwrap_or(0);
    let (min_codegree, max_codegree) = if k >= 3 {
        let p = h
            .min_degree_profile(2)
            .expect("level 2 is valid for k >= 3");
        (Some(p.min), Some(p.max))
    } else {
        (None, None)
    };
    let denom = binomial_f64(n.saturating_sub(1), k - 1);
    let alpha_hat = if denom > 0.0 {
        min_degree as f64 / denom
    } else {
        0.0
    };
    DegreeReport {
        min_degree,
        min_codegree,
        max_codegree,
        alpha_hat,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityResult {
    pub pairing: Option<Vec<(u32, u32)>>,
    pub zeta: f64,
    /// Pair degree of every chosen pair, in pairing order.
    pub codegrees: Vec<usize>,
}

/// Largest set size for which pairings are searched by backtracking.
pub const EXHAUSTIVE_PAIRING_LIMIT: usize = 16;

/// Splits `b` into pairs each of pair degree at least `ζ·n`, if possible.
pub fn separable_partition(h: &Hypergraph, b: &VertexSet, zeta: f64) -> Result<SeparabilityResult> {
    if h.k() != 3 {
        return Err(Error::UniformityUnsupported {
            expected: 3,
            found: h.k(),
        });
    }
    if b.len() % 2 == 1 {
        return Err(Error::OddSetSize(b.len()));
    }
    let threshold = zeta * h.vertex_count() as f64;
    let members = b.to_vec();
    let ok = |u: u32, v: u32| h.codegree(u, v) as f64 >= threshold;
    let pairing = if members.len() <= EXHAUSTIVE_PAIRING_LIMIT {
        let mut used = vec![false; members.len()];
        let mut pairs = Vec::new();
        backtrack_pairs(&members, &ok, &mut used, &mut pairs).then_some(pairs)
    } else {
        let mut g = UnGraph::<u32, ()>::new_undirected();
        let nodes: Vec<_> = members.iter().map(|&v| g.add_node(v)).collect();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if ok(members[i], members[j]) {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let m = maximum_matching(&g);
        m.is_perfect().then(|| {
            let mut pairs: Vec<(u32, u32)> = m
                .edges()
                .map(|(a, b)| {
                    let (x, y) = (g[a], g[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            pairs.sort_unstable();
            pairs
        })
    };
    let codegrees = pairing
        .iter()
        .flatten()
        .map(|&(u, v)| h.codegree(u, v))
        .collect();
    Ok(SeparabilityResult {
        pairing,
        zeta,
        codegrees,
    })
}

fn backtrack_pairs(
    members: &[u32],
    ok: &impl Fn(u32, u32) -> bool,
    used: &mut [bool],
    pairs: &mut Vec<(u32, u32)>,
) -> bool {
    let Some(i) = used.iter().position(|&u| !u) else {
        return true;
    };
    used[i] = true;
    for j in i + 1..members.len() {
        if !used[j] && ok(members[i], members[j]) {
            used[j] = true;
            pairs.push((members[i], members[j]));
            if backtrack_pairs(members, ok, used, pairs) {
                return true;
            }
            pairs.pop();
            used[j] = false;
        }
    }
    used[i] = false;
    false
}

/// Edge density `|H| / C(n, k)`.
pub fn edge_density(h: &Hypergraph) -> f64 {
    let total = binomial_f64(h.vertex_count(), h.k());
    if total == 0.0 {
        0.0
    } else {
        h.edge_count() as f64 / total
    }
}

/// Ordered-tuple density `k!·|H| / n^k`.
pub fn tuple_density(h: &Hypergraph) -> f64 {
    let n = h.vertex_count() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let fact: f64 = (1..=h.k()).map(|i| i as f64).product();
    fact * h.edge_count() as f64 / n.powi(h.k() as i32)
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    /// Target density for the defect search; defaults to the tuple density.
    pub p: Option<f64>,
    /// Separability threshold; defaults to `min(p/4, α/4)`.
    pub zeta: Option<f64>,
    pub budget: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            p: None,
            zeta: None,
            budget: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema: String,
    pub n: usize,
    pub k: usize,
    pub edges: usize,
    pub p_hat: f64,
    pub tuple_density: f64,
    pub p_target: f64,
    pub mu_hat: f64,
    pub mu_witness: Vec<Vec<u32>>,
    pub method: Option<DefectMethod>,
    pub restarts: usize,
    pub degrees: DegreeReport,
    pub zeta: f64,
}

/// Collects density, defect and degree statistics in one report.
pub fn audit(h: &Hypergraph, config: &AuditConfig) -> Result<AuditReport> {
    let p_hat = edge_density(h);
    let td = tuple_density(h);
    let p_target = config.p.unwrap_or(td);
    let degrees = degree_report(h);
    let zeta = config.zeta.unwrap_or(p_hat.min(degrees.alpha_hat) / 4.0);
    let (mu_hat, mu_witness, method, restarts) = if p_target > 0.0 && p_target < 1.0 {
        let est = density_defect(h, p_target, &DefectOptions::new(config.budget, config.seed))?;
        let witness = est.witness.iter().map(VertexSet::to_vec).collect();
        (est.mu_hat, witness, Some(est.method), est.restarts)
    } else {
        // p = 0 has no deficit; p = 1 is only met by complete graphs, reported as unmeasured
        (0.0, Vec::new(), None, 0)
    };
    Ok(AuditReport {
        schema: "audit/1".into(),
        n: h.vertex_count(),
        k: h.k(),
        edges: h.edge_count(),
        p_hat,
        tuple_density: td,
        p_target,
        mu_hat,
        mu_witness,
        method,
        restarts,
        degrees,
        zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Hypergraph {
        crate::generators::random_uniform(n, 3, 1.0, 0).unwrap()
    }

    #[test]
    fn empty_graph_full_family_defect() {
        let h = Hypergraph::build(6, 3, Vec::<Vec<u32>>::new()).unwrap();
        let v = VertexSet::full(6);
        assert_eq!(
            family_defect(&h, 0.5, &[v.clone(), v.clone(), v], false),
            0.5
        );
        let est = density_defect(&h, 0.5, &DefectOptions::new(1000, 1)).unwrap();
        assert_eq!(est.mu_hat, 0.5);
    }

    #[test]
    fn complete_graph_still_has_a_degenerate_deficit() {
        let h = complete(8);
        let v = VertexSet::from_members(8, [0]);
        let single = family_defect(&h, 0.5, &[v.clone(), v.clone(), v], false);
        assert_eq!(single, 0.5 / 512.0);
        let est = density_defect(&h, 0.5, &DefectOptions::new(5000, 0)).unwrap();
        assert!(est.mu_hat >= single);
    }

    #[test]
    fn degree_reports() {
        let k4 = complete(4);
        let r = degree_report(&k4);
        assert_eq!((r.min_degree, r.alpha_hat), (3, 1.0));
        let cherry = Hypergraph::build(4, 3, [[0, 1, 2], [0, 1, 3]]).unwrap();
        let r = degree_report(&cherry);
        assert_eq!(r.min_degree, 1);
        assert!((r.alpha_hat - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn separability_cases() {
        let h = complete(8);
        let b = VertexSet::from_members(8, [0, 3, 5, 6]);
        let r = separable_partition(&h, &b, 0.25).unwrap();
        assert_eq!(r.pairing.unwrap().len(), 2);
        assert!(r.codegrees.iter().all(|&c| c == 6));
        let cherry = Hypergraph::build(4, 3, [[0, 1, 2], [0, 1, 3]]).unwrap();
        let r = separable_partition(&cherry, &VertexSet::from_members(4, [2, 3]), 0.1).unwrap();
        assert!(r.pairing.is_none());
        let r = separable_partition(&cherry, &VertexSet::from_members(4, [0, 1]), 0.1).unwrap();
        assert_eq!(r.pairing, Some(vec![(0, 1)]));
        assert!(matches!(
            separable_partition(&cherry, &VertexSet::from_members(4, [0]), 0.1),
            Err(Error::OddSetSize(1))
        ));
    }

    #[test]
    fn audit_of_small_graphs() {
        let empty = Hypergraph::build(6, 3, Vec::<Vec<u32>>::new()).unwrap();
        let r = audit(&empty, &AuditConfig::default()).unwrap();
        assert_eq!((r.p_hat, r.degrees.alpha_hat), (0.0, 0.0));
        let r = audit(&complete(6), &AuditConfig::default()).unwrap();
        assert_eq!(r.p_hat, 1.0);
        assert_eq!(r.schema, "audit/1");
    }
}
