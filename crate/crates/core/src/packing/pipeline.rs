use std::fmt;

use serde::{Deserialize, Serialize};

use super::absorbers::verify_absorbs;
use super::family::{
    asymptotic_capacity, build_absorber_family, measure_ell, AbsorberFamily, FamilyMode,
    FamilyOptions,
};
use super::greedy::{greedy_pack, GreedyMode};
use super::{default_zeta, Strategy};
use crate::audit::{degree_report, edge_density, separable_partition, tuple_density};
use crate::certificate::{verify_certificate, Block, PackingCertificate};
use crate::error::{Error, Result};
use crate::generators::{edge, Pattern};
use crate::hypergraph::Hypergraph;
use crate::rng::{derive, derive_indexed};
use crate::spectral::{lambda_bounds, Form, SpectralOptions};
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// `None` picks the construction from the pattern.
    pub strategy: Option<Strategy>,
    /// Whole-pipeline attempts, each with a fresh seed.
    pub attempts: usize,
    /// Retry cap inside the family and greedy stages.
    pub retries: usize,
    pub family_mode: FamilyMode,
    pub probes: usize,
    pub probe_limit: usize,
    pub zeta: Option<f64>,
    pub q: Option<f64>,
    /// Compute the spectral precondition for sparse matchings.
    pub advisory: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            strategy: None,
            attempts: 5,
            retries: 5,
            family_mode: FamilyMode::Calibrated,
            probes: 50,
            probe_limit: 64,
            zeta: None,
            q: None,
            advisory: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    Strategy,
    Family,
    Greedy,
    Capacity,
    Absorption,
    Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub seed: u64,
    /// Stage that failed, or `None` on success.
    pub failed_stage: Option<Stage>,
    pub error: Option<String>,
    pub family_size: usize,
    pub capacity: usize,
    pub greedy_blocks: usize,
    pub leftover: usize,
    pub absorbed: usize,
}

/// Sparse matching conditions, reported but never enforced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseAdvisory {
    /// `6|H| / n³`.
    pub p: f64,
    /// `δ_2 / (p n)`.
    pub alpha: f64,
    /// `2^{-22} α^{12}`.
    pub gamma: f64,
    pub lambda2_upper: Option<f64>,
    /// `γ p^{16} n^{3/2}`.
    pub lambda2_bound: f64,
    pub spectral_condition: Option<bool>,
    /// `α⁴ p⁵ n⁶ / 16`.
    pub ell_target: f64,
    /// `α⁸ p^{10} n / 2^{14}`.
    pub capacity_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub strategy: Option<Strategy>,
    pub a: usize,
    pub b: usize,
    pub zeta: f64,
    pub ell: f64,
    pub ell_probes: usize,
    pub attempts: Vec<AttemptRecord>,
    pub family: Option<AbsorberFamily>,
    pub sparse: Option<SparseAdvisory>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub certificate: PackingCertificate,
    pub diagnostics: PipelineDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineFailure {
    pub stage: Stage,
    pub error: Error,
    pub diagnostics: PipelineDiagnostics,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pipeline failed at {:?} after {} attempts: {}",
            self.stage,
            self.diagnostics.attempts.len(),
            self.error
        )
    }
}

impl std::error::Error for PipelineFailure {}

fn empty_diagnostics() -> PipelineDiagnostics {
    PipelineDiagnostics {
        strategy: None,
        a: 0,
        b: 0,
        zeta: 0.0,
        ell: 0.0,
        ell_probes: 0,
        attempts: Vec::new(),
        family: None,
        sparse: None,
    }
}

/// Perfect packing by absorbers: random absorber family, greedy packing of
/// the rest, then each leftover `b`-set absorbed by its own member.
pub fn perfect_packing(
    h: &Hypergraph,
    pattern: &Pattern,
    config: &PipelineConfig,
    seed: u64,
) -> std::result::Result<PipelineOutcome, PipelineFailure> {
    let mut diagnostics = empty_diagnostics();
    let fail = |stage, error, diagnostics| {
        Err(PipelineFailure {
            stage,
            error,
            diagnostics,
        })
    };
    let n = h.vertex_count();
    let f = pattern.f();
    if h.k() != pattern.k() {
        return fail(
            Stage::Input,
            Error::UniformityUnsupported {
                expected: pattern.k(),
                found: h.k(),
            },
            diagnostics,
        );
    }
    if !n.is_multiple_of(f) {
        return fail(
            Stage::Input,
            Error::DivisibilityViolation(format!("{f} does not divide n = {n}")),
            diagnostics,
        );
    }
    let strategy = match config
        .strategy
        .map_or_else(|| Strategy::auto(pattern), |s| s.check(pattern).map(|_| s))
    {
        Ok(s) => s,
        Err(e) => return fail(Stage::Strategy, e, diagnostics),
    };
    let (a, b) = strategy.sizes(pattern);
    let zeta = config.zeta.unwrap_or_else(|| default_zeta(h));
    diagnostics.strategy = Some(strategy);
    diagnostics.a = a;
    diagnostics.b = b;
    diagnostics.zeta = zeta;
    let probes = match measure_ell(
        h,
        pattern,
        strategy,
        config.probes,
        config.probe_limit,
        Some(zeta),
        derive(seed, "ell"),
    ) {
        Ok(m) => m,
        Err(e) => return fail(Stage::Family, e, diagnostics),
    };
    diagnostics.ell = probes.0;
    diagnostics.ell_probes = probes.1.len();
    let mut last = (
        Stage::Family,
        Error::SelectionFailed {
            attempts: 0,
            reason: "no attempts made".into(),
        },
    );
    for attempt in 0..config.attempts.max(1) {
        let s = derive_indexed(seed, "pipeline_attempt", attempt as u64);
        let mut record = AttemptRecord {
            attempt,
            seed: s,
            failed_stage: None,
            error: None,
            family_size: 0,
            capacity: 0,
            greedy_blocks: 0,
            leftover: 0,
            absorbed: 0,
        };
        match attempt_once(h, pattern, strategy, config, zeta, &probes, s, &mut record) {
            Ok((certificate, family)) => {
                diagnostics.attempts.push(record);
                diagnostics.family = Some(family);
                return Ok(PipelineOutcome {
                    certificate,
                    diagnostics,
                });
            }
            Err((stage, error)) => {
                record.failed_stage = Some(stage);
                record.error = Some(error.to_string());
                diagnostics.attempts.push(record);
                last = (stage, error);
            }
        }
    }
    fail(last.0, last.1, diagnostics)
}

#[allow(clippy::too_many_arguments)]
fn attempt_once(
    h: &Hypergraph,
    pattern: &Pattern,
    strategy: Strategy,
    config: &PipelineConfig,
    zeta: f64,
    probes: &(f64, Vec<Vec<u32>>),
    seed: u64,
    record: &mut AttemptRecord,
) -> std::result::Result<(PackingCertificate, AbsorberFamily), (Stage, Error)> {
    let n = h.vertex_count();
    let f = pattern.f();
    let mut fopts = FamilyOptions::new(strategy, config.family_mode);
    fopts.q = config.q;
    fopts.retries = config.retries;
    fopts.zeta = Some(zeta);
    fopts.ell = Some(probes.clone());
    let family = build_absorber_family(h, pattern, &fopts, derive(seed, "family"))
        .map_err(|e| (Stage::Family, e))?;
    let b = family.b;
    record.family_size = family.members.len();
    record.capacity = family.capacity;
    let covered = family.covered(h.n());
    let rest = h.active().difference(&covered);
    let omega = family.capacity as f64 / n.max(1) as f64;
    let (mut blocks, leftover, pairing) = if rest.len() <= family.capacity {
        (Vec::new(), rest.to_vec(), None)
    } else {
        let mode = if strategy.separable() {
            let p = edge_density(h);
            let alpha = degree_report(h).alpha_hat;
            let phi = (omega / 8.0).min(alpha / 4.0).min(p / 4.0);
            GreedyMode::Separable {
                zeta,
                b,
                phi,
                retries: config.retries,
            }
        } else {
            GreedyMode::Plain { b }
        };
        let out = greedy_pack(h, pattern, &covered, &mode, derive(seed, "greedy"))
            .map_err(|e| (Stage::Greedy, e))?;
        (out.blocks, out.leftover, out.pairing)
    };
    record.greedy_blocks = blocks.len();
    record.leftover = leftover.len();
    if leftover.len() > family.capacity {
        return Err((
            Stage::Capacity,
            Error::LeftoverTooLarge {
                size: leftover.len(),
                capacity: family.capacity,
            },
        ));
    }
    if leftover.len() % b != 0 || leftover.len() % f != 0 {
        return Err((
            Stage::Capacity,
            Error::DivisibilityViolation(format!(
                "leftover of {} vertices is not a multiple of {b}",
                leftover.len()
            )),
        ));
    }
    let groups: Vec<Vec<u32>> = if strategy.separable() {
        let pairing = match pairing {
            Some(p) => p,
            None => {
                let set = VertexSet::from_members(h.n(), leftover.iter().copied());
                separable_partition(h, &set, zeta)
                    .map_err(|e| (Stage::Absorption, e))?
                    .pairing
                    .ok_or((Stage::Absorption, Error::NotSeparable))?
            }
        };
        pairing
            .chunks(b / 2)
            .map(|ch| ch.iter().flat_map(|&(u, v)| [u, v]).collect())
            .collect()
    } else {
        leftover.chunks(b).map(<[u32]>::to_vec).collect()
    };
    let assignment = assign(h, pattern, &family, &groups).map_err(|e| (Stage::Absorption, e))?;
    record.absorbed = groups.len();
    let mut used = vec![None; family.members.len()];
    for (g, (m, outer)) in assignment.into_iter().enumerate() {
        used[m] = Some((g, outer));
    }
    for (m, member) in family.members.iter().enumerate() {
        match used[m].take() {
            Some((_, outer)) => blocks.extend(outer),
            None => blocks.extend(member.inner.iter().cloned()),
        }
    }
    let certificate = PackingCertificate::new(pattern, h.n(), blocks);
    verify_certificate(h, pattern, &certificate).map_err(|v| {
        (
            Stage::Verification,
            Error::InvalidParameters(format!("certificate rejected: {v}")),
        )
    })?;
    Ok((certificate, family))
}

/// Matches every group to a distinct member absorbing it, returning the
/// member index and the packing of member plus group.
fn assign(
    h: &Hypergraph,
    pattern: &Pattern,
    family: &AbsorberFamily,
    groups: &[Vec<u32>],
) -> Result<Vec<(usize, Vec<Block>)>> {
    let members: Vec<VertexSet> = family
        .members
        .iter()
        .map(|m| VertexSet::from_members(h.n(), m.vertices.iter().copied()))
        .collect();
    let mut packings: Vec<Vec<Option<Vec<Block>>>> = Vec::with_capacity(groups.len());
    for g in groups {
        let gset = VertexSet::from_members(h.n(), g.iter().copied());
        let row = members
            .iter()
            .map(|m| {
                let chk = verify_absorbs(h, pattern, m, &gset)?;
                Ok(chk.absorbs.then_some(chk.outer).flatten())
            })
            .collect::<Result<Vec<_>>>()?;
        packings.push(row);
    }
    // augmenting paths
    let mut owner: Vec<Option<usize>> = vec![None; members.len()];
    fn augment(
        g: usize,
        adj: &[Vec<Option<Vec<Block>>>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for m in 0..owner.len() {
            if adj[g][m].is_some() && !seen[m] {
                seen[m] = true;
                if owner[m].is_none_or(|o| augment(o, adj, owner, seen)) {
                    owner[m] = Some(g);
                    return true;
                }
            }
        }
        false
    }
    for g in 0..groups.len() {
        let mut seen = vec![false; members.len()];
        if !augment(g, &packings, &mut owner, &mut seen) {
            return Err(Error::AbsorptionFailed(groups[g].clone()));
        }
    }
    let mut out: Vec<Option<(usize, Vec<Block>)>> = vec![None; groups.len()];
    for (m, o) in owner.iter().enumerate() {
        if let Some(g) = *o {
            out[g] = Some((m, packings[g][m].take().expect("matched pair absorbs")));
        }
    }
    Ok(out
        .into_iter()
        .map(|x| x.expect("every group matched"))
        .collect())
}

/// Sparse perfect matching of a 3-graph with matching absorbers. The
/// spectral precondition is reported in the diagnostics only.
pub fn perfect_matching_sparse(
    h: &Hypergraph,
    config: &PipelineConfig,
    seed: u64,
) -> std::result::Result<PipelineOutcome, PipelineFailure> {
    let advisory = if h.k() == 3 {
        Some(sparse_advisory(h, config.advisory, seed))
    } else {
        None
    };
    let pattern = edge(3).expect("3-edge");
    let config = PipelineConfig {
        strategy: Some(Strategy::Matching),
        ..config.clone()
    };
    match perfect_packing(h, &pattern, &config, seed) {
        Ok(mut out) => {
            out.diagnostics.sparse = advisory;
            Ok(out)
        }
        Err(mut fail) => {
            fail.diagnostics.sparse = advisory;
            Err(fail)
        }
    }
}

fn sparse_advisory(h: &Hypergraph, spectral: bool, seed: u64) -> SparseAdvisory {
    let n = h.vertex_count() as f64;
    let p = tuple_density(h);
    let delta2 = degree_report(h).min_codegree.unwrap_or(0) as f64;
    let alpha = if p > 0.0 { delta2 / (p * n) } else { 0.0 };
    let gamma = 2f64.powi(-22) * alpha.powi(12);
    let lambda2_bound = gamma * p.powi(16) * n.powf(1.5);
    let lambda2_upper = spectral
        .then(|| {
            let opts = SpectralOptions {
                seed: derive(seed, "advisory"),
                ..SpectralOptions::default()
            };
            lambda_bounds(h, Form::Deviation, &opts)
                .ok()
                .map(|l| l.upper)
        })
        .flatten();
    let ell_target = alpha.powi(4) * p.powi(5) * n.powi(6) / 16.0;
    SparseAdvisory {
        p,
        alpha,
        gamma,
        lambda2_upper,
        lambda2_bound,
        spectral_condition: lambda2_upper.map(|l| l <= lambda2_bound),
        ell_target,
        capacity_target: asymptotic_capacity(ell_target, h.vertex_count(), 6),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{pattern_library, random_uniform};

    #[test]
    fn complete_host_cherry() {
        let h = random_uniform(12, 3, 1.0, 0).unwrap();
        let cherry = pattern_library("cherry").unwrap();
        let out = perfect_packing(&h, &cherry, &PipelineConfig::default(), 3).unwrap();
        assert_eq!(out.certificate.blocks.len(), 3);
        assert!(verify_certificate(&h, &cherry, &out.certificate).is_ok());
    }

    #[test]
    fn complete_host_matching() {
        let h = random_uniform(9, 3, 1.0, 0).unwrap();
        let out = perfect_matching_sparse(&h, &PipelineConfig::default(), 1).unwrap();
        assert_eq!(out.certificate.blocks.len(), 3);
        let adv = out.diagnostics.sparse.unwrap();
        assert!(adv.lambda2_upper.is_some());
    }

    #[test]
    fn divisibility_and_strategy_failures() {
        let h = random_uniform(10, 3, 1.0, 0).unwrap();
        let cherry = pattern_library("cherry").unwrap();
        let err = perfect_packing(&h, &cherry, &PipelineConfig::default(), 0).unwrap_err();
        assert_eq!(err.stage, Stage::Input);
        let h = random_uniform(12, 3, 1.0, 0).unwrap();
        let k222 = pattern_library("k222").unwrap();
        let err = perfect_packing(&h, &k222, &PipelineConfig::default(), 0).unwrap_err();
        assert_eq!(err.stage, Stage::Strategy);
    }

    #[test]
    fn isolated_vertex_blocks_matching() {
        let mut edges = Vec::new();
        for a in 1..9u32 {
            for b in a + 1..9 {
                for c in b + 1..9 {
                    edges.push([a, b, c]);
                }
            }
        }
        let h = Hypergraph::build(9, 3, edges).unwrap();
        let config = PipelineConfig {
            probes: 5,
            ..PipelineConfig::default()
        };
        assert!(perfect_matching_sparse(&h, &config, 0).is_err());
    }
}
