use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::absorbers::{find_absorbers, verify_absorbs, AbsorberSearch};
use super::{default_zeta, Strategy};
use crate::audit::separable_partition;
use crate::certificate::Block;
use crate::combinatorics::{binomial, binomial_f64};
use crate::error::{Error, Result};
use crate::generators::Pattern;
use crate::hypergraph::Hypergraph;
use crate::oracle::{oracle_perfect_packing, Verdict, DEFAULT_BUDGET};
use crate::rng::{derive_indexed, stage_rng, StageRng};
use crate::vertex_set::VertexSet;

/// How the selection probability and capacity are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMode {
    /// `q = ℓ n^{-2a+1} / 8`, capacity `⌊ℓ² n^{-2a+1} / 64⌋`, and every probe
    /// must keep at least `qℓ/8` absorbing members.
    Asymptotic,
    /// Expected number of sampled sets `1/π`, where `π` is the chance two
    /// random `a`-sets meet; capacity `b` per member; the family must be nonempty.
    Calibrated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOptions {
    pub strategy: Strategy,
    pub mode: FamilyMode,
    /// Overrides the selection probability.
    pub q: Option<f64>,
    pub probes: usize,
    /// Per-probe cap on counted absorbers.
    pub probe_limit: usize,
    pub retries: usize,
    pub zeta: Option<f64>,
    /// Skips measurement and uses this `ℓ` with the given probe sets.
    pub ell: Option<(f64, Vec<Vec<u32>>)>,
}

impl FamilyOptions {
    pub fn new(strategy: Strategy, mode: FamilyMode) -> Self {
        FamilyOptions {
            strategy,
            mode,
            q: None,
            probes: 50,
            probe_limit: 64,
            retries: 5,
            zeta: None,
            ell: None,
        }
    }
}

/// A member: an absorbing set with a perfect packing of itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub vertices: Vec<u32>,
    pub inner: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDiagnostics {
    pub mode: FamilyMode,
    pub attempts: usize,
    pub sampled: usize,
    pub intersecting_pairs: usize,
    pub discarded_overlap: usize,
    pub discarded_useless: usize,
    pub probes: usize,
    /// Fewest absorbing members over the probes, in the accepted selection.
    pub min_probe_coverage: usize,
    pub asymptotic_q: f64,
    pub asymptotic_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorberFamily {
    pub a: usize,
    pub b: usize,
    pub members: Vec<FamilyMember>,
    pub capacity: usize,
    pub ell: f64,
    pub q: f64,
    pub selection_seed: u64,
    pub diagnostics: FamilyDiagnostics,
}

impl AbsorberFamily {
    pub fn covered(&self, universe: usize) -> VertexSet {
        VertexSet::from_members(
            universe,
            self.members.iter().flat_map(|m| m.vertices.iter().copied()),
        )
    }
}

/// `q = ℓ n^{-2a+1} / 8`.
pub fn asymptotic_q(ell: f64, n: usize, a: usize) -> f64 {
    ell * (n as f64).powi(1 - 2 * a as i32) / 8.0
}

/// `ℓ² n^{-2a+1} / 64`.
pub fn asymptotic_capacity(ell: f64, n: usize, a: usize) -> f64 {
    ell * ell * (n as f64).powi(1 - 2 * a as i32) / 64.0
}

/// Random absorbee: a uniform `b`-set, redrawn until separable when the strategy needs it.
fn draw_probe(h: &Hypergraph, b: usize, separable: Option<f64>, seed: u64) -> Option<Vec<u32>> {
    let verts = h.active().to_vec();
    if verts.len() < b {
        return None;
    }
    let mut rng = stage_rng(seed, "probe");
    for _ in 0..200 {
        let mut pick: Vec<u32> = sample(&mut rng, verts.len(), b)
            .into_iter()
            .map(|i| verts[i])
            .collect();
        pick.sort_unstable();
        match separable {
            None => return Some(pick),
            Some(zeta) => {
                let set = VertexSet::from_members(h.n(), pick.iter().copied());
                if separable_partition(h, &set, zeta).ok()?.pairing.is_some() {
                    return Some(pick);
                }
            }
        }
    }
    None
}

/// Samples probe absorbees and returns the 10th-percentile absorber count
/// (each count capped at `probe_limit`) together with the probes.
pub fn measure_ell(
    h: &Hypergraph,
    pattern: &Pattern,
    strategy: Strategy,
    probes: usize,
    probe_limit: usize,
    zeta: Option<f64>,
    seed: u64,
) -> Result<(f64, Vec<Vec<u32>>)> {
    let (_, b) = strategy.sizes(pattern);
    let zeta = zeta.unwrap_or_else(|| default_zeta(h));
    let separable = strategy.separable().then_some(zeta);
    let results: Vec<Option<(usize, Vec<u32>)>> = (0..probes as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_indexed(seed, "ell_probe", i);
            let probe = draw_probe(h, b, separable, s)?;
            let search = AbsorberSearch {
                zeta: Some(zeta),
                ..AbsorberSearch::new(strategy, Some(probe_limit), s)
            };
            Some(find_absorbers(h, pattern, &probe, &search).map(|v| (v.len(), probe)))
        })
        .map(|r| r.transpose())
        .collect::<Result<_>>()?;
    let mut counted: Vec<(usize, Vec<u32>)> = results.into_iter().flatten().collect();
    if counted.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let mut counts: Vec<usize> = counted.iter().map(|c| c.0).collect();
    counts.sort_unstable();
    let rank = ((counts.len() as f64 * 0.1).ceil() as usize).max(1) - 1;
    let ell = counts[rank] as f64;
    Ok((ell, counted.drain(..).map(|c| c.1).collect()))
}

/// Randomly selected pairwise disjoint absorbing sets.
pub fn build_absorber_family(
    h: &Hypergraph,
    pattern: &Pattern,
    opts: &FamilyOptions,
    seed: u64,
) -> Result<AbsorberFamily> {
    let strategy = opts.strategy;
    strategy.check(pattern)?;
    let (a, b) = strategy.sizes(pattern);
    let n = h.vertex_count();
    let (ell, probes) = match &opts.ell {
        Some(given) => given.clone(),
        None => measure_ell(
            h,
            pattern,
            strategy,
            opts.probes,
            opts.probe_limit,
            opts.zeta,
            seed,
        )?,
    };
    let pq = asymptotic_q(ell, n, a);
    let pcap = asymptotic_capacity(ell, n, a);
    let total = binomial_f64(n, a);
    let q = opts.q.unwrap_or_else(|| match opts.mode {
        FamilyMode::Asymptotic => pq,
        FamilyMode::Calibrated => {
            let meet = 1.0 - binomial_f64(n.saturating_sub(a), a) / total;
            if meet > 0.0 && total > 0.0 {
                (1.0 / meet / total).min(1.0)
            } else {
                1.0
            }
        }
    });
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameters(format!(
            "selection probability {q} outside [0, 1]"
        )));
    }
    let threshold = q * ell / 8.0;
    let mut last_reason = String::new();
    for attempt in 0..opts.retries.max(1) {
        let selection_seed = derive_indexed(seed, "absorber_selection", attempt as u64);
        let sampled = sample_a_sets(h, a, q, selection_seed);
        let sets: Vec<VertexSet> = sampled
            .iter()
            .map(|s| VertexSet::from_members(h.n(), s.iter().copied()))
            .collect();
        let (clash, intersecting_pairs) = clashes(&sets);
        let discarded_overlap = clash.iter().filter(|&&c| c).count();
        let kept: Vec<usize> = (0..sets.len()).filter(|&i| !clash[i]).collect();
        // a set that absorbs no probe is useless
        let checked: Vec<(usize, Option<Vec<Block>>, Vec<bool>)> = kept
            .par_iter()
            .map(|&i| {
                let inner =
                    match oracle_perfect_packing(&h.induced(&sets[i]), pattern, DEFAULT_BUDGET)
                        .verdict
                    {
                        Verdict::Exists(c) => Some(c.blocks),
                        _ => None,
                    };
                let absorbs = probes
                    .iter()
                    .map(|p| {
                        let bset = VertexSet::from_members(h.n(), p.iter().copied());
                        inner.is_some()
                            && bset.is_disjoint(&sets[i])
                            && verify_absorbs(h, pattern, &sets[i], &bset)
                                .map(|c| c.absorbs)
                                .unwrap_or(false)
                    })
                    .collect();
                (i, inner, absorbs)
            })
            .collect();
        let mut members = Vec::new();
        let mut coverage = vec![0usize; probes.len()];
        let mut discarded_useless = 0;
        for (i, inner, absorbs) in checked {
            match inner {
                Some(inner) if absorbs.iter().any(|&x| x) => {
                    for (c, &x) in coverage.iter_mut().zip(&absorbs) {
                        *c += x as usize;
                    }
                    members.push(FamilyMember {
                        vertices: sampled[i].clone(),
                        inner,
                    });
                }
                _ => discarded_useless += 1,
            }
        }
        let min_probe_coverage = coverage.iter().copied().min().unwrap_or(0);
        let passed = match opts.mode {
            FamilyMode::Asymptotic => {
                probes.is_empty() || coverage.iter().all(|&c| c as f64 >= threshold)
            }
            FamilyMode::Calibrated => !members.is_empty(),
        };
        if passed {
            let capacity = match opts.mode {
                FamilyMode::Asymptotic => pcap.floor() as usize,
                FamilyMode::Calibrated => b * members.len(),
            };
            return Ok(AbsorberFamily {
                a,
                b,
                members,
                capacity,
                ell,
                q,
                selection_seed,
                diagnostics: FamilyDiagnostics {
                    mode: opts.mode,
                    attempts: attempt + 1,
                    sampled: sampled.len(),
                    intersecting_pairs,
                    discarded_overlap,
                    discarded_useless,
                    probes: probes.len(),
                    min_probe_coverage,
                    asymptotic_q: pq,
                    asymptotic_capacity: pcap,
                },
            });
        }
        last_reason = match opts.mode {
            FamilyMode::Asymptotic => format!(
                "q = {q:.3e}, ℓ = {ell}: {} sampled, {} kept; some probe has {min_probe_coverage} absorbing members, need {threshold:.3e}",
                sampled.len(),
                members.len()
            ),
            FamilyMode::Calibrated => format!("q = {q:.3e}: {} sampled, no usable member", sampled.len()),
        };
    }
    Err(Error::SelectionFailed {
        attempts: opts.retries.max(1),
        reason: last_reason,
    })
}

/// Candidate `a`-sets: `Binomial(C(n, a), q)` many distinct uniform `a`-sets of active vertices.
pub fn sample_a_sets(h: &Hypergraph, a: usize, q: f64, seed: u64) -> Vec<Vec<u32>> {
    let verts = h.active().to_vec();
    let n = verts.len();
    let mut rng = StageRng::seed_from_u64(seed);
    let k = draw_count(&mut rng, n, a, binomial_f64(n, a), q);
    let mut sampled: Vec<Vec<u32>> = Vec::with_capacity(k);
    let mut seen = HashSet::new();
    let mut tries = 0;
    while sampled.len() < k && n >= a && tries < 100 * k {
        tries += 1;
        let mut s: Vec<u32> = sample(&mut rng, n, a)
            .into_iter()
            .map(|i| verts[i])
            .collect();
        s.sort_unstable();
        if seen.insert(s.clone()) {
            sampled.push(s);
        }
    }
    sampled
}

/// Which sets meet another one, and how many intersecting pairs there are.
pub fn clashes(sets: &[VertexSet]) -> (Vec<bool>, usize) {
    let mut clash = vec![false; sets.len()];
    let mut pairs = 0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !sets[i].is_disjoint(&sets[j]) {
                pairs += 1;
                clash[i] = true;
                clash[j] = true;
            }
        }
    }
    (clash, pairs)
}

/// Number of sampled sets: `Binomial(C(n, a), q)`, or Poisson when `C(n, a)` overflows.
fn draw_count(rng: &mut impl Rng, n: usize, a: usize, total: f64, q: f64) -> usize {
    if q <= 0.0 || total == 0.0 {
        return 0;
    }
    let exact = binomial(n, a);
    if exact < u64::MAX {
        Binomial::new(exact, q)
            .map(|d| d.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        Poisson::new(total * q)
            .map(|d| d.sample(rng) as usize)
            .unwrap_or(0)
    }
}
