//! Desk-scale regression experiments. Each returns a deterministic report:
//! timings are left out so that re-runs are byte-identical.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use hyperpack_core::audit::{density_defect, tuple_density, DefectMethod, DefectOptions};
use hyperpack_core::certificate::{verify_certificate, Block};
use hyperpack_core::combinatorics::{binomial_f64, for_each_combination};
use hyperpack_core::embedding::{count_rooted_copies, is_copy, RootedQuery};
use hyperpack_core::generators::{
    edge, grid_cell, grid_pattern, grid_pattern_unchecked, parity_construction, pattern_library,
    random_uniform, Pattern,
};
use hyperpack_core::oracle::{oracle_perfect_packing, parity_predicts_no_packing, DEFAULT_BUDGET};
use hyperpack_core::packing::{
    find_absorbers, grid_absorbers, perfect_matching_sparse, perfect_packing, verify_absorbs,
    AbsorberSearch, PipelineConfig, PipelineFailure, PipelineOutcome, Stage, Strategy,
};
use hyperpack_core::rng::indexed_rng;
use hyperpack_core::spectral::{spectral_report, SpectralOptions};
use hyperpack_core::{Hypergraph, VertexSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub criterion: u8,
    pub title: String,
    pub seeds: Vec<u64>,
    pub passed: bool,
    pub details: serde_json::Value,
}

pub const TITLES: [&str; 8] = [
    "parity hosts have no K222 packing",
    "parity host edge and degree statistics",
    "parity host density defect",
    "mixing inequality with the certified bound",
    "cherry absorber search is complete",
    "pipeline success rates",
    "grid absorber structure",
    "rooted copy lower bound",
];

pub fn run(criterion: u8, seed: u64) -> anyhow::Result<BenchReport> {
    let (seeds, passed, details) = match criterion {
        1 => pack(counterexample(seed)?),
        2 => pack(parity_statistics(seed)?),
        3 => pack(parity_defect(seed)?),
        4 => pack(mixing(seed)?),
        5 => pack(absorber_completeness(seed)?),
        6 => pack(pipeline_rates(seed)?),
        7 => pack(grid_structure()?),
        8 => pack(embedding_bound(seed)?),
        _ => anyhow::bail!("no experiment {criterion}"),
    };
    Ok(BenchReport {
        schema: "bench/1".into(),
        criterion,
        title: TITLES[criterion as usize - 1].into(),
        seeds,
        passed,
        details: details?,
    })
}

pub trait Outcome: Serialize {
    fn seeds(&self) -> Vec<u64>;
    fn passed(&self) -> bool;
}

fn pack<T: Outcome>(t: T) -> (Vec<u64>, bool, serde_json::Result<serde_json::Value>) {
    (t.seeds(), t.passed(), serde_json::to_value(&t))
}

fn seed_range(base: u64, count: u64) -> Vec<u64> {
    (base..base + count).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityRun {
    pub n: usize,
    pub seed: u64,
    pub edges: usize,
    pub x_size: usize,
    pub verdict: String,
    pub nodes_explored: u64,
    /// No `x ∈ X`, `y ∈ Y` share a link pair.
    pub invariant_holds: bool,
    pub parity_predicts: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub runs: Vec<ParityRun>,
}

impl Outcome for Counterexample {
    fn seeds(&self) -> Vec<u64> {
        self.runs
            .iter()
            .map(|r| r.seed)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
    fn passed(&self) -> bool {
        self.runs
            .iter()
            .all(|r| r.verdict == "not_exists" && r.invariant_holds && r.parity_predicts)
    }
}

pub fn counterexample(base: u64) -> anyhow::Result<Counterexample> {
    let k222 = pattern_library("k222")?;
    let jobs: Vec<(usize, u64)> = [12usize, 18]
        .iter()
        .flat_map(|&n| seed_range(base, 20).into_iter().map(move |s| (n, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let pc = parity_construction(n, seed)?;
            let v = oracle_perfect_packing(&pc.hypergraph, &k222, DEFAULT_BUDGET);
            Ok(ParityRun {
                n,
                seed,
                edges: pc.hypergraph.edge_count(),
                x_size: pc.x.len(),
                verdict: v.report(&k222, n).verdict,
                nodes_explored: v.nodes_explored,
                invariant_holds: pc.common_link_violation().is_none(),
                parity_predicts: parity_predicts_no_packing(&pc, &k222),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Counterexample { runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityStatRun {
    pub seed: u64,
    pub edges: usize,
    pub min_degree: usize,
    /// `|H| / C(n, 3)`.
    pub density: f64,
    /// `δ_1 / C(n, 2)`.
    pub degree_ratio: f64,
    /// `δ_1 / C(n − 1, 2)`, the fraction of the largest possible degree.
    pub degree_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityStatistics {
    pub n: usize,
    pub density_target: f64,
    pub density_tolerance: f64,
    pub degree_floor: f64,
    pub runs: Vec<ParityStatRun>,
}

impl Outcome for ParityStatistics {
    fn seeds(&self) -> Vec<u64> {
        self.runs.iter().map(|r| r.seed).collect()
    }
    fn passed(&self) -> bool {
        self.runs.iter().all(|r| {
            (r.density - self.density_target).abs() <= self.density_tolerance
                && r.degree_ratio >= self.degree_floor
        })
    }
}

pub fn parity_statistics(base: u64) -> anyhow::Result<ParityStatistics> {
    let n = 60;
    let runs = seed_range(base, 20)
        .par_iter()
        .map(|&seed| {
            let h = parity_construction(n, seed)?.hypergraph;
            let min_degree = h.active().iter().map(|v| h.degree(v)).min().unwrap_or(0);
            Ok(ParityStatRun {
                seed,
                edges: h.edge_count(),
                min_degree,
                density: h.edge_count() as f64 / binomial_f64(n, 3),
                degree_ratio: min_degree as f64 / binomial_f64(n, 2),
                degree_fraction: min_degree as f64 / binomial_f64(n - 1, 2),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ParityStatistics {
        n,
        density_target: 0.125,
        density_tolerance: 0.02,
        degree_floor: 0.125 - 0.03,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityDefect {
    pub n: usize,
    pub seed: u64,
    pub budget: usize,
    pub p: f64,
    pub mu_hat: f64,
    pub bound: f64,
    pub method: DefectMethod,
    pub restarts: usize,
    pub witness: Vec<Vec<u32>>,
}

impl Outcome for ParityDefect {
    fn seeds(&self) -> Vec<u64> {
        vec![self.seed]
    }
    fn passed(&self) -> bool {
        self.mu_hat <= self.bound
    }
}

pub fn parity_defect(seed: u64) -> anyhow::Result<ParityDefect> {
    let (n, budget) = (60, 100_000);
    let h = parity_construction(n, seed)?.hypergraph;
    let p = tuple_density(&h);
    let est = density_defect(&h, p, &DefectOptions::new(budget, seed))?;
    Ok(ParityDefect {
        n,
        seed,
        budget,
        p,
        mu_hat: est.mu_hat,
        bound: 0.05,
        method: est.method,
        restarts: est.restarts,
        witness: est.witness.iter().map(VertexSet::to_vec).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingHost {
    pub host: String,
    pub n: usize,
    pub lambda2_upper: f64,
    pub samples: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixing {
    pub seed: u64,
    pub hosts: Vec<MixingHost>,
}

impl Outcome for Mixing {
    fn seeds(&self) -> Vec<u64> {
        vec![self.seed]
    }
    fn passed(&self) -> bool {
        self.hosts.iter().all(|h| h.max_residual <= 0.0)
    }
}

pub fn mixing(seed: u64) -> anyhow::Result<Mixing> {
    let mut hosts: Vec<(String, Hypergraph)> = Vec::new();
    for p in [0.3, 0.5, 0.8] {
        hosts.push((format!("random(24, {p})"), random_uniform(24, 3, p, seed)?));
    }
    hosts.push((
        "parity(24)".into(),
        parity_construction(24, seed)?.hypergraph,
    ));
    hosts.push(("complete(12)".into(), random_uniform(12, 3, 1.0, seed)?));
    let opts = SpectralOptions {
        seed,
        ..SpectralOptions::default()
    };
    let hosts = hosts
        .into_iter()
        .map(|(name, h)| {
            let r = spectral_report(&h, &opts, 10_000)?;
            Ok(MixingHost {
                host: name,
                n: h.n(),
                lambda2_upper: r.lambda2_upper,
                samples: r.mixing_samples,
                max_residual: r.mixing_max_residual,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Mixing { seed, hosts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessHost {
    pub host: String,
    pub seed: u64,
    pub b: Vec<u32>,
    pub found: usize,
    pub enumerated: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorberCompleteness {
    pub hosts: Vec<CompletenessHost>,
}

impl Outcome for AbsorberCompleteness {
    fn seeds(&self) -> Vec<u64> {
        self.hosts
            .iter()
            .map(|h| h.seed)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
    fn passed(&self) -> bool {
        self.hosts.iter().all(|h| h.equal)
    }
}

fn completeness_on(
    name: String,
    seed: u64,
    h: &Hypergraph,
    b: Vec<u32>,
) -> anyhow::Result<CompletenessHost> {
    let n = h.n();
    let cherry = pattern_library("cherry")?;
    let found: BTreeSet<Vec<u32>> = find_absorbers(
        h,
        &cherry,
        &b,
        &AbsorberSearch::new(Strategy::Cherry, None, seed),
    )?
    .into_iter()
    .map(|a| a.vertices)
    .collect();
    let bset = VertexSet::from_members(n, b.iter().copied());
    let rest: Vec<u32> = (0..n as u32).filter(|v| !bset.contains(*v)).collect();
    let mut enumerated = BTreeSet::new();
    let mut err = None;
    for_each_combination(&rest, 4, |a| {
        let aset = VertexSet::from_members(n, a.iter().copied());
        match verify_absorbs(h, &cherry, &aset, &bset) {
            Ok(c) if c.absorbs => {
                enumerated.insert(a.to_vec());
            }
            Ok(_) => {}
            Err(e) => {
                err = Some(e);
                return false;
            }
        }
        true
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(CompletenessHost {
        host: name,
        seed,
        b,
        found: found.len(),
        enumerated: enumerated.len(),
        equal: found == enumerated,
    })
}

pub fn absorber_completeness(base: u64) -> anyhow::Result<AbsorberCompleteness> {
    let mut jobs: Vec<(String, u64, Hypergraph)> = Vec::new();
    for n in [8usize, 10, 12] {
        jobs.push((
            format!("complete({n})"),
            base,
            random_uniform(n, 3, 1.0, base)?,
        ));
    }
    for seed in seed_range(base, 6) {
        for n in [10usize, 12] {
            jobs.push((
                format!("random({n}, 0.7)"),
                seed,
                random_uniform(n, 3, 0.7, seed)?,
            ));
        }
    }
    let hosts = jobs
        .into_par_iter()
        .map(|(name, seed, h)| {
            // a random 4-set so that both separable and non-separable B occur
            let mut rng = indexed_rng(seed, "bench_absorbee", h.n() as u64);
            let mut b: Vec<u32> = rand::seq::index::sample(&mut rng, h.n(), 4)
                .into_iter()
                .map(|v| v as u32)
                .collect();
            b.sort_unstable();
            completeness_on(name, seed, &h, b)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(AbsorberCompleteness { hosts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub seed: u64,
    pub n: usize,
    pub success: bool,
    pub failed_stage: Option<Stage>,
    pub attempts: usize,
    /// Present on success; re-checkable against the regenerated host.
    pub blocks: Vec<Block>,
    pub verified: bool,
    pub companion_n: usize,
    pub companion_success: bool,
    /// Oracle verdict on the companion host when its pipeline succeeded.
    pub companion_oracle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRates {
    pub cherry: Vec<PipelineRun>,
    pub matching: Vec<PipelineRun>,
    pub cherry_required: usize,
    pub matching_required: usize,
}

impl PipelineRates {
    pub fn successes(runs: &[PipelineRun]) -> usize {
        runs.iter().filter(|r| r.success).count()
    }
}

impl Outcome for PipelineRates {
    fn seeds(&self) -> Vec<u64> {
        self.cherry.iter().map(|r| r.seed).collect()
    }
    fn passed(&self) -> bool {
        let sound = |runs: &[PipelineRun]| {
            runs.iter().all(|r| {
                (!r.success || r.verified)
                    && (!r.companion_success || r.companion_oracle.as_deref() == Some("exists"))
            })
        };
        Self::successes(&self.cherry) >= self.cherry_required
            && Self::successes(&self.matching) >= self.matching_required
            && sound(&self.cherry)
            && sound(&self.matching)
    }
}

fn pipeline_run(
    seed: u64,
    pattern: &Pattern,
    (n, companion_n): (usize, usize),
    solve: impl Fn(&Hypergraph) -> Result<PipelineOutcome, PipelineFailure>,
) -> anyhow::Result<PipelineRun> {
    let h = random_uniform(n, 3, 0.5, seed)?;
    let result = solve(&h);
    let (success, failed_stage, attempts, blocks, verified) = match result {
        Ok(out) => {
            let verified = verify_certificate(&h, pattern, &out.certificate).is_ok();
            (
                true,
                None,
                out.diagnostics.attempts.len(),
                out.certificate.blocks,
                verified,
            )
        }
        Err(fail) => (
            false,
            Some(fail.stage),
            fail.diagnostics.attempts.len(),
            Vec::new(),
            false,
        ),
    };
    let small = random_uniform(companion_n, 3, 0.5, seed)?;
    let companion_success = solve(&small).is_ok();
    let companion_oracle = companion_success.then(|| {
        oracle_perfect_packing(&small, pattern, DEFAULT_BUDGET)
            .report(pattern, companion_n)
            .verdict
    });
    Ok(PipelineRun {
        seed,
        n,
        success,
        failed_stage,
        attempts,
        blocks,
        verified,
        companion_n,
        companion_success,
        companion_oracle,
    })
}

pub fn pipeline_rates(base: u64) -> anyhow::Result<PipelineRates> {
    let cherry = pattern_library("cherry")?;
    let e = edge(3)?;
    let config = PipelineConfig::default();
    let seeds = seed_range(base, 50);
    let cherry_runs = seeds
        .par_iter()
        .map(|&s| {
            pipeline_run(s, &cherry, (28, 12), |h| {
                perfect_packing(h, &cherry, &config, s)
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let matching_runs = seeds
        .par_iter()
        .map(|&s| pipeline_run(s, &e, (30, 15), |h| perfect_matching_sparse(h, &config, s)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(PipelineRates {
        cherry: cherry_runs,
        matching: matching_runs,
        cherry_required: 45,
        matching_required: 48,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub pattern: String,
    pub f: usize,
    pub linear: bool,
    pub grid_edges: usize,
    /// `(2f − 1)·|F|`: one image per non-root row and per column.
    pub expected_edges: usize,
    pub rows_are_copies: bool,
    pub columns_are_copies: bool,
    pub host_n: usize,
    pub b: Vec<u32>,
    pub absorber: Option<Vec<u32>>,
    pub blocks_are_copies: bool,
    pub absorbs: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStructure {
    pub cases: Vec<GridCase>,
}

impl Outcome for GridStructure {
    fn seeds(&self) -> Vec<u64> {
        Vec::new()
    }
    fn passed(&self) -> bool {
        self.cases.iter().all(|c| {
            c.grid_edges == c.expected_edges
                && c.rows_are_copies
                && c.columns_are_copies
                && c.blocks_are_copies
                && c.absorbs
        })
    }
}

pub fn grid_structure() -> anyhow::Result<GridStructure> {
    let mut cases = Vec::new();
    for f_pat in [edge(3)?, pattern_library("cherry")?] {
        let f = f_pat.f();
        let linear = f_pat.is_linear();
        // the grid of a non-linear pattern is still well defined
        let grid = if linear {
            grid_pattern(&f_pat)?
        } else {
            grid_pattern_unchecked(&f_pat)?
        };
        let image = |cell: &dyn Fn(usize) -> u32| -> Vec<u32> { (0..f).map(cell).collect() };
        let rows_are_copies = (1..f).all(|i| {
            let map = image(&|t| grid_cell(i, (t + f - i) % f, f));
            is_copy(grid.graph(), &f_pat, &map)
        });
        let columns_are_copies = (0..f).all(|j| {
            let map = image(&|t| grid_cell((t + f - j) % f, j, f));
            is_copy(grid.graph(), &f_pat, &map)
        });
        let n = f * f;
        let h = random_uniform(n, 3, 1.0, 0)?;
        let b: Vec<u32> = (0..f as u32).collect();
        let found = grid_absorbers(&h, &f_pat, &grid, &b, Some(1))?;
        let (absorber, blocks_are_copies, absorbs) = match found.first() {
            Some(a) => {
                let copies = a
                    .inner
                    .iter()
                    .chain(&a.outer)
                    .all(|bl| is_copy(&h, &f_pat, &bl.witness));
                let chk = verify_absorbs(
                    &h,
                    &f_pat,
                    &VertexSet::from_members(n, a.vertices.iter().copied()),
                    &VertexSet::from_members(n, b.iter().copied()),
                )?;
                (Some(a.vertices.clone()), copies, chk.absorbs)
            }
            None => (None, false, false),
        };
        cases.push(GridCase {
            pattern: f_pat.name().unwrap_or("F").into(),
            f,
            linear,
            grid_edges: grid.edge_count(),
            expected_edges: (2 * f - 1) * f_pat.edge_count(),
            rows_are_copies,
            columns_are_copies,
            host_n: n,
            b,
            absorber,
            blocks_are_copies,
            absorbs,
        });
    }
    Ok(GridStructure { cases })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTrial {
    pub seed: u64,
    pub ranges: Vec<Vec<u32>>,
    pub count: u64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingBound {
    pub n: usize,
    pub p: f64,
    pub slack: f64,
    pub trials: Vec<EmbeddingTrial>,
}

impl Outcome for EmbeddingBound {
    fn seeds(&self) -> Vec<u64> {
        self.trials
            .iter()
            .map(|t| t.seed)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
    fn passed(&self) -> bool {
        self.trials.iter().all(|t| t.count as f64 >= t.bound)
    }
}

pub fn embedding_bound(base: u64) -> anyhow::Result<EmbeddingBound> {
    let (n, p, slack) = (24usize, 0.5, 0.15);
    let cherry = pattern_library("cherry")?;
    let f = cherry.f();
    let jobs: Vec<(u64, u64)> = seed_range(base, 5)
        .into_iter()
        .flat_map(|s| (0..20).map(move |t| (s, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(seed, t)| {
            let h = random_uniform(n, 3, p, seed)?;
            let mut rng = indexed_rng(seed, "bench_ranges", t);
            let ranges: Vec<Vec<u32>> = (0..f)
                .map(|_| {
                    let size = rng.random_range(n / 2..=n);
                    let mut r: Vec<u32> = rand::seq::index::sample(&mut rng, n, size)
                        .into_iter()
                        .map(|v| v as u32)
                        .collect();
                    r.sort_unstable();
                    r
                })
                .collect();
            let mut q = RootedQuery::new();
            for (w, r) in ranges.iter().enumerate() {
                q = q.range(w as u32, VertexSet::from_members(n, r.iter().copied()));
            }
            let count = count_rooted_copies(&h, &cherry, &q, None)?.count;
            let product: f64 = ranges.iter().map(|r| r.len() as f64).product();
            let bound =
                p.powi(cherry.edge_count() as i32) * product - slack * (n as f64).powi(f as i32);
            Ok(EmbeddingTrial {
                seed,
                ranges,
                count,
                bound,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(EmbeddingBound {
        n,
        p,
        slack,
        trials,
    })
}
