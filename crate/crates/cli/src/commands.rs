use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use hyperpack_core::audit::{
    audit, separable_partition, AuditConfig, AuditReport, SeparabilityResult,
};
use hyperpack_core::certificate::Block;
use hyperpack_core::embedding::{count_rooted_copies, RootedQuery};
use hyperpack_core::generators::{
    grid_pattern, parity_construction, pattern_library, random_uniform, Pattern,
};
use hyperpack_core::io::{read_hypergraph, read_pattern, write_hypergraph, write_pattern};
use hyperpack_core::oracle::{oracle_perfect_packing, Verdict};
use hyperpack_core::packing::{
    perfect_matching_sparse, perfect_packing, FamilyMode, PipelineConfig, PipelineDiagnostics,
    PipelineFailure, PipelineOutcome, Stage, Strategy,
};
use hyperpack_core::spectral::{spectral_report, SpectralOptions};
use hyperpack_core::{Hypergraph, VertexSet};

use crate::{
    bench, Command, FamilyArg, GenKind, PipelineArgs, StrategyArg, EXIT_FAILURE, EXIT_SUCCESS,
    EXIT_TIMEOUT,
};

/// Result of running one command: its exit code, the files it wrote and the seeds it used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Executed {
    pub code: i32,
    pub outputs: Vec<PathBuf>,
    pub seeds: Vec<u64>,
}

fn read_host(path: &Path) -> anyhow::Result<Hypergraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_hypergraph(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A pattern given by library name or by file.
fn load_pattern(spec: &str) -> anyhow::Result<Pattern> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        let p = read_pattern(&text).with_context(|| format!("parsing {spec}"))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        return Ok(p.named(name));
    }
    Ok(pattern_library(spec)?)
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn absolute(p: &Path) -> anyhow::Result<PathBuf> {
    p.canonicalize()
        .with_context(|| format!("input {} not found", p.display()))
}

/// Makes input paths absolute and returns the files to digest.
pub(crate) fn absolutize_inputs(cmd: &mut Command) -> anyhow::Result<Vec<PathBuf>> {
    let (file, pattern) = match cmd {
        Command::Audit(a) => (Some(&mut a.file), None),
        Command::Spectral(a) => (Some(&mut a.file), None),
        Command::Count(a) => (Some(&mut a.file), Some(&mut a.pattern)),
        Command::Pack(a) => (Some(&mut a.file), Some(&mut a.pattern)),
        Command::Match(a) => (Some(&mut a.file), None),
        Command::Oracle(a) => (Some(&mut a.file), Some(&mut a.pattern)),
        Command::Gen(_) | Command::Bench(_) | Command::Repro(_) => (None, None),
    };
    let mut inputs = Vec::new();
    if let Some(f) = file {
        *f = absolute(f)?;
        inputs.push(f.clone());
    }
    if let Some(p) = pattern {
        if Path::new(p.as_str()).is_file() {
            let abs = absolute(Path::new(p.as_str()))?;
            *p = abs.to_string_lossy().into_owned();
            inputs.push(abs);
        }
    }
    Ok(inputs)
}

fn outputs_mut(cmd: &mut Command) -> Vec<&mut PathBuf> {
    match cmd {
        Command::Gen(a) => vec![&mut a.out],
        Command::Audit(a) => vec![&mut a.json],
        Command::Spectral(a) => vec![&mut a.json],
        Command::Count(a) => a.json.iter_mut().collect(),
        Command::Pack(a) => vec![&mut a.pipeline.cert],
        Command::Match(a) => vec![&mut a.pipeline.cert],
        Command::Oracle(a) => vec![&mut a.json],
        Command::Bench(a) => vec![&mut a.json],
        Command::Repro(_) => Vec::new(),
    }
}

/// Points every output into `dir` and returns the new paths in order.
pub(crate) fn redirect_outputs(cmd: &mut Command, dir: &Path) -> Vec<PathBuf> {
    outputs_mut(cmd)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let name = p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".into());
            *p = dir.join(format!("{i}-{name}"));
            p.clone()
        })
        .collect()
}

#[derive(Serialize)]
struct AuditDocument {
    #[serde(flatten)]
    report: AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    separability: Option<SeparabilityResult>,
}

#[derive(Serialize)]
struct CountDocument {
    schema: &'static str,
    pattern: String,
    n: usize,
    roots: Vec<(u32, u32)>,
    limit: Option<u64>,
    count: u64,
    truncated: bool,
}

#[derive(Serialize)]
struct FailureInfo {
    stage: Stage,
    error: String,
}

/// Certificate plus pipeline diagnostics; `blocks` is empty on failure.
#[derive(Serialize)]
struct PackDocument {
    schema: &'static str,
    status: &'static str,
    pattern: String,
    n: usize,
    seed: u64,
    blocks: Vec<Block>,
    failure: Option<FailureInfo>,
    diagnostics: PipelineDiagnostics,
}

fn pack_document(
    pattern: &Pattern,
    n: usize,
    seed: u64,
    result: Result<PipelineOutcome, PipelineFailure>,
) -> (PackDocument, i32) {
    let name = pattern.name().unwrap_or("custom").to_string();
    match result {
        Ok(out) => (
            PackDocument {
                schema: "pack/1",
                status: "success",
                pattern: name,
                n: out.certificate.n,
                seed,
                blocks: out.certificate.blocks,
                failure: None,
                diagnostics: out.diagnostics,
            },
            EXIT_SUCCESS,
        ),
        Err(fail) => (
            PackDocument {
                schema: "pack/1",
                status: "failure",
                pattern: name,
                n,
                seed,
                blocks: Vec::new(),
                failure: Some(FailureInfo {
                    stage: fail.stage,
                    error: fail.error.to_string(),
                }),
                diagnostics: fail.diagnostics,
            },
            EXIT_FAILURE,
        ),
    }
}

fn pipeline_config(args: &PipelineArgs, strategy: Option<Strategy>) -> PipelineConfig {
    PipelineConfig {
        strategy,
        attempts: args.attempts,
        family_mode: match args.family {
            FamilyArg::Calibrated => FamilyMode::Calibrated,
            FamilyArg::Asymptotic => FamilyMode::Asymptotic,
        },
        zeta: args.zeta,
        ..PipelineConfig::default()
    }
}

fn parse_roots(roots: &[String]) -> anyhow::Result<Vec<(u32, u32)>> {
    roots
        .iter()
        .map(|r| {
            let (w, x) = r
                .split_once('=')
                .ok_or_else(|| anyhow!("root `{r}` is not of the form w=x"))?;
            Ok((w.trim().parse()?, x.trim().parse()?))
        })
        .collect()
}

pub fn execute(cmd: &Command) -> anyhow::Result<Executed> {
    let done = |code, out: &Path, seeds| Executed {
        code,
        outputs: vec![out.to_path_buf()],
        seeds,
    };
    match cmd {
        Command::Gen(a) => {
            let text = match a.kind {
                GenKind::Random => write_hypergraph(&random_uniform(a.n, a.k, a.p, a.seed)?),
                GenKind::Parity => {
                    let pc = parity_construction(a.n, a.seed)?;
                    let x: Vec<String> = pc.x.iter().map(|v| v.to_string()).collect();
                    format!(
                        "# parity n={} seed={} x={}\n{}",
                        a.n,
                        a.seed,
                        x.join(","),
                        write_hypergraph(&pc.hypergraph)
                    )
                }
                GenKind::Pattern => {
                    let p = pattern_library(&a.name)?;
                    write_pattern(&if a.grid { grid_pattern(&p)? } else { p })
                }
            };
            fs::write(&a.out, text).with_context(|| format!("writing {}", a.out.display()))?;
            Ok(done(EXIT_SUCCESS, &a.out, vec![a.seed]))
        }
        Command::Audit(a) => {
            let h = read_host(&a.file)?;
            let config = AuditConfig {
                p: a.p,
                zeta: a.zeta,
                budget: a.budget,
                seed: a.seed,
            };
            let report = audit(&h, &config)?;
            let separability = match &a.set {
                Some(set) => {
                    if let Some(&v) = set.iter().find(|&&v| v as usize >= h.n()) {
                        bail!("vertex {v} outside the host");
                    }
                    let b = VertexSet::from_members(h.n(), set.iter().copied());
                    Some(separable_partition(&h, &b, report.zeta)?)
                }
                None => None,
            };
            write_json(
                &a.json,
                &AuditDocument {
                    report,
                    separability,
                },
            )?;
            Ok(done(EXIT_SUCCESS, &a.json, vec![a.seed]))
        }
        Command::Spectral(a) => {
            let h = read_host(&a.file)?;
            let opts = SpectralOptions {
                starts: a.starts,
                iters: a.iters,
                seed: a.seed,
            };
            write_json(&a.json, &spectral_report(&h, &opts, a.samples)?)?;
            Ok(done(EXIT_SUCCESS, &a.json, vec![a.seed]))
        }
        Command::Count(a) => {
            let h = read_host(&a.file)?;
            let pattern = load_pattern(&a.pattern)?;
            let roots = parse_roots(&a.roots)?;
            let mut q = RootedQuery::new();
            for &(w, x) in &roots {
                q = q.root(w, x);
            }
            let c = count_rooted_copies(&h, &pattern, &q, a.limit)?;
            let doc = CountDocument {
                schema: "count/1",
                pattern: pattern.name().unwrap_or("custom").to_string(),
                n: h.n(),
                roots,
                limit: a.limit,
                count: c.count,
                truncated: c.truncated,
            };
            println!("{}", serde_json::to_string(&doc)?);
            match &a.json {
                Some(out) => {
                    write_json(out, &doc)?;
                    Ok(done(EXIT_SUCCESS, out, Vec::new()))
                }
                None => Ok(Executed {
                    code: EXIT_SUCCESS,
                    outputs: Vec::new(),
                    seeds: Vec::new(),
                }),
            }
        }
        Command::Pack(a) => {
            let h = read_host(&a.file)?;
            let pattern = load_pattern(&a.pattern)?;
            let strategy = match a.strategy {
                StrategyArg::Auto => None,
                StrategyArg::Cherry => Some(Strategy::Cherry),
                StrategyArg::C4 => Some(Strategy::C4),
                StrategyArg::Linear => Some(Strategy::LinearGrid),
                StrategyArg::Matching => Some(Strategy::Matching),
            };
            let seed = a.pipeline.seed;
            let result =
                perfect_packing(&h, &pattern, &pipeline_config(&a.pipeline, strategy), seed);
            let (doc, code) = pack_document(&pattern, h.n(), seed, result);
            write_json(&a.pipeline.cert, &doc)?;
            Ok(done(code, &a.pipeline.cert, vec![seed]))
        }
        Command::Match(a) => {
            let h = read_host(&a.file)?;
            let seed = a.pipeline.seed;
            let config = PipelineConfig {
                advisory: !a.no_advisory,
                ..pipeline_config(&a.pipeline, None)
            };
            let result = perfect_matching_sparse(&h, &config, seed);
            let edge = pattern_library("edge")?;
            let (doc, code) = pack_document(&edge, h.n(), seed, result);
            write_json(&a.pipeline.cert, &doc)?;
            Ok(done(code, &a.pipeline.cert, vec![seed]))
        }
        Command::Oracle(a) => {
            let h = read_host(&a.file)?;
            let pattern = load_pattern(&a.pattern)?;
            let v = oracle_perfect_packing(&h, &pattern, a.budget);
            let code = match v.verdict {
                Verdict::Exists(_) => EXIT_SUCCESS,
                Verdict::NotExists => EXIT_FAILURE,
                Verdict::Timeout => EXIT_TIMEOUT,
            };
            let report = v.report(&pattern, h.n());
            println!("{}", report.verdict);
            write_json(&a.json, &report)?;
            Ok(done(code, &a.json, Vec::new()))
        }
        Command::Bench(a) => {
            let report = bench::run(a.criterion, a.seed)?;
            println!(
                "criterion {}: {}",
                report.criterion,
                if report.passed { "pass" } else { "fail" }
            );
            write_json(&a.json, &report)?;
            let code = if report.passed {
                EXIT_SUCCESS
            } else {
                EXIT_FAILURE
            };
            Ok(done(code, &a.json, report.seeds.clone()))
        }
        Command::Repro(_) => bail!("repro cannot be nested"),
    }
}
