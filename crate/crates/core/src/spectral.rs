//! Norm bounds for the adjacency and deviation forms of a 3-graph.
//!
//! The adjacency form is `A(x, y, z) = Σ x_u y_v z_w` over ordered triples
//! whose underlying set is an edge. The deviation form is `D = A − p·J` with
//! `p = 6|H| / n³` and `J` the all-ones form over every ordered triple,
//! degenerate ones included, so that `D(1_S, 1_T, 1_U) = e(S, T, U) − p|S||T||U|`.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::{indexed_rng, stage_rng};
use crate::vertex_set::VertexSet;

const REL_TOL: f64 = 1e-10;
const SQUARINGS: usize = 12;
const UPPER_MARGIN: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Adjacency,
    Deviation,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            starts: 32,
            iters: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaBounds {
    /// Best `|T(x, y, z)|` over unit vectors found by alternating maximization.
    pub lower: f64,
    /// Certified bound on the spectral norm of the mode-1 unfolding.
    pub upper: f64,
    /// Power-iteration estimate of the same unfolding norm.
    pub unfolding_estimate: f64,
    pub iterations: usize,
}

/// Edges re-indexed to `0..n` over the active vertices.
struct Dense {
    n: usize,
    edges: Vec<[usize; 3]>,
    p: f64,
}

impl Dense {
    fn new(h: &Hypergraph) -> Result<Self> {
        if h.k() != 3 {
            return Err(Error::UniformityUnsupported {
                expected: 3,
                found: h.k(),
            });
        }
        let mut index = vec![usize::MAX; h.n()];
        for (i, v) in h.active().iter().enumerate() {
            index[v as usize] = i;
        }
        let edges: Vec<[usize; 3]> = h
            .edges()
            .map(|e| {
                [
                    index[e[0] as usize],
                    index[e[1] as usize],
                    index[e[2] as usize],
                ]
            })
            .collect();
        let n = h.vertex_count();
        let p = if n == 0 {
            0.0
        } else {
            6.0 * edges.len() as f64 / (n as f64).powi(3)
        };
        Ok(Dense { n, edges, p })
    }

    /// `g_u = Σ_{v,w} T_{uvw} y_v z_w` for the chosen form.
    fn contract(&self, form: Form, y: &[f64], z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        for &[a, b, c] in &self.edges {
            out[a] += y[b] * z[c] + y[c] * z[b];
            out[b] += y[a] * z[c] + y[c] * z[a];
            out[c] += y[a] * z[b] + y[b] * z[a];
        }
        if form == Form::Deviation {
            let shift = self.p * y.iter().sum::<f64>() * z.iter().sum::<f64>();
            out.iter_mut().for_each(|g| *g -= shift);
        }
    }

    /// Gram matrix `M Mᵀ` of the mode-1 unfolding, row-major.
    fn gram(&self, form: Form, pair_completions: &[Vec<usize>]) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for list in pair_completions {
            for &x in list {
                for &x2 in list {
                    g[x * n + x2] += 2.0;
                }
            }
        }
        if form == Form::Deviation {
            let deg: Vec<f64> = (0..n).map(|u| g[u * n + u]).collect();
            let p = self.p;
            let nn = (n * n) as f64;
            for u in 0..n {
                for v in 0..n {
                    g[u * n + v] += p * p * nn - p * (deg[u] + deg[v]);
                }
            }
        }
        g
    }

    fn pair_completions(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut lists = vec![Vec::new(); n * (n.max(1) - 1) / 2 + 1];
        let idx = |a: usize, b: usize| {
            let (a, b) = (a.min(b), a.max(b));
            b * (b - 1) / 2 + a
        };
        for &[a, b, c] in &self.edges {
            lists[idx(a, b)].push(c);
            lists[idx(a, c)].push(b);
            lists[idx(b, c)].push(a);
        }
        lists
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, row)| {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik != 0.0 {
                    let brow = &b[k * n..(k + 1) * n];
                    for (o, &bkj) in row.iter_mut().zip(brow) {
                        *o += aik * bkj;
                    }
                }
            }
        });
    out
}

/// Upper bound on the top eigenvalue of a symmetric PSD matrix via
/// `λ_max ≤ tr(G^{2^j})^{1/2^j}`, computed with rescaled repeated squaring.
fn top_eigenvalue_upper(g: &[f64], n: usize) -> f64 {
    let frob = |m: &[f64]| m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let c0 = frob(g);
    if c0 == 0.0 {
        return 0.0;
    }
    let mut b: Vec<f64> = g.iter().map(|x| x / c0).collect();
    // log tr(G^{2^j}) = Σ_i 2^{j-i} log c_i + log tr(B_j)
    let mut log_scale = c0.ln();
    let mut power = 1.0f64;
    for _ in 0..SQUARINGS {
        let sq = matmul(&b, &b, n);
        let c = frob(&sq);
        if c == 0.0 {
            return 0.0;
        }
        b = sq.iter().map(|x| x / c).collect();
        log_scale = 2.0 * log_scale + c.ln();
        power *= 2.0;
    }
    let trace: f64 = (0..n).map(|i| b[i * n + i]).sum();
    ((log_scale + trace.ln()) / power).exp() * UPPER_MARGIN
}

fn top_eigenvalue_estimate(g: &[f64], n: usize, iters: usize) -> f64 {
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    // a slight tilt avoids starting orthogonal to the top eigenvector
    for (i, x) in v.iter_mut().enumerate() {
        *x += 1e-3 * ((i % 7) as f64 - 3.0);
    }
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| g[i * n + j] * v[j]).sum())
            .collect();
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = w;
        if normalize(&mut v) == 0.0 {
            return 0.0;
        }
        if (next - lambda).abs() <= REL_TOL * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0)
}

/// Alternating rank-1 maximization from one start; returns (value, sweeps).
fn alternate(
    d: &Dense,
    form: Form,
    x: &mut [f64],
    y: &mut [f64],
    z: &mut [f64],
    iters: usize,
) -> (f64, usize) {
    let mut buf = vec![0.0; d.n];
    let mut value = 0.0f64;
    for sweep in 1..=iters {
        d.contract(form, y, z, &mut buf);
        let vx = normalize(&mut buf);
        if vx == 0.0 {
            return (value, sweep);
        }
        x.copy_from_slice(&buf);
        d.contract(form, x, z, &mut buf);
        normalize(&mut buf);
        y.copy_from_slice(&buf);
        d.contract(form, x, y, &mut buf);
        let vz = normalize(&mut buf);
        z.copy_from_slice(&buf);
        let improved = vz - value;
        value = vz;
        if improved <= REL_TOL * value.abs() {
            return (value, sweep);
        }
    }
    (value, iters)
}

fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);
    v
}

/// Lower and upper bounds on the norm of the adjacency or deviation form.
pub fn lambda_bounds(h: &Hypergraph, form: Form, opts: &SpectralOptions) -> Result<LambdaBounds> {
    let d = Dense::new(h)?;
    let n = d.n;
    if n == 0 {
        return Ok(LambdaBounds {
            lower: 0.0,
            upper: 0.0,
            unfolding_estimate: 0.0,
            iterations: 0,
        });
    }
    let label = match form {
        Form::Adjacency => "lambda1",
        Form::Deviation => "lambda2",
    };
    let runs: Vec<(f64, usize)> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = indexed_rng(opts.seed, label, s as u64);
            let mut x = random_unit(n, &mut rng);
            let mut y = random_unit(n, &mut rng);
            let mut z = random_unit(n, &mut rng);
            alternate(&d, form, &mut x, &mut y, &mut z, opts.iters.max(1))
        })
        .collect();
    let lower = runs
        .iter()
        .map(|r| r.0)
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .unwrap_or(0.0);
    let iterations = runs.iter().map(|r| r.1).sum();
    let gram = d.gram(form, &d.pair_completions());
    let upper = top_eigenvalue_upper(&gram, n).sqrt();
    let unfolding_estimate = top_eigenvalue_estimate(&gram, n, opts.iters.max(1) * 4).sqrt();
    Ok(LambdaBounds {
        lower,
        upper,
        unfolding_estimate,
        iterations,
    })
}

/// Value of the form at `(x, y, z)`.
pub fn form_value(h: &Hypergraph, form: Form, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let d = Dense::new(h)?;
    let mut buf = vec![0.0; d.n];
    d.contract(form, y, z, &mut buf);
    Ok(buf.iter().zip(x).map(|(a, b)| a * b).sum())
}

/// `6|H| / n³`.
pub fn spectral_density(h: &Hypergraph) -> Result<f64> {
    Dense::new(h).map(|d| d.p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub samples: usize,
    /// Largest `|e(S1,S2,S3) − p|S1||S2||S3|| − λ·√(|S1||S2||S3|)`; never positive for a valid λ.
    pub max_residual: f64,
    pub worst_sizes: [usize; 3],
}

/// Checks the mixing inequality with `lambda` on `(V, V, V)` and `samples`
/// random set triples.
pub fn mixing_residual(
    h: &Hypergraph,
    lambda: f64,
    samples: usize,
    seed: u64,
) -> Result<MixingReport> {
    let p = spectral_density(h)?;
    let verts = h.active().to_vec();
    let residual = |sets: &[VertexSet; 3]| {
        let prod: f64 = sets.iter().map(|s| s.len() as f64).product();
        let e = h.multipartite_count(sets) as f64;
        (e - p * prod).abs() - lambda * prod.sqrt()
    };
    let full = VertexSet::from_members(h.n(), verts.iter().copied());
    let mut best = (
        residual(&[full.clone(), full.clone(), full]),
        [verts.len(); 3],
    );
    let mut rng = stage_rng(seed, "mixing");
    let draws: Vec<[VertexSet; 3]> = (0..samples)
        .map(|_| {
            // empty sets give a residual of exactly zero, so they are redrawn
            std::array::from_fn(|_| loop {
                let level: f64 = rng.random();
                let s = VertexSet::from_members(
                    h.n(),
                    verts.iter().copied().filter(|_| rng.random_bool(level)),
                );
                if !s.is_empty() || verts.is_empty() {
                    break s;
                }
            })
        })
        .collect();
    let scored: Vec<(f64, [usize; 3])> = draws
        .par_iter()
        .map(|s| (residual(s), [s[0].len(), s[1].len(), s[2].len()]))
        .collect();
    for s in scored {
        if s.0 > best.0 {
            best = s;
        }
    }
    Ok(MixingReport {
        samples,
        max_residual: best.0,
        worst_sizes: best.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub schema: String,
    pub n: usize,
    pub edges: usize,
    pub p: f64,
    pub lambda1_lower: f64,
    pub lambda1_upper: f64,
    pub lambda1_estimate: f64,
    pub lambda2_lower: f64,
    pub lambda2_upper: f64,
    pub lambda2_estimate: f64,
    pub starts: usize,
    pub iterations: usize,
    pub mixing_samples: usize,
    pub mixing_max_residual: f64,
}

pub fn spectral_report(
    h: &Hypergraph,
    opts: &SpectralOptions,
    samples: usize,
) -> Result<SpectralReport> {
    let l1 = lambda_bounds(h, Form::Adjacency, opts)?;
    let l2 = lambda_bounds(h, Form::Deviation, opts)?;
    let mixing = mixing_residual(h, l2.upper, samples, opts.seed)?;
    Ok(SpectralReport {
        schema: "spectral/1".into(),
        n: h.vertex_count(),
        edges: h.edge_count(),
        p: spectral_density(h)?,
        lambda1_lower: l1.lower,
        lambda1_upper: l1.upper,
        lambda1_estimate: l1.unfolding_estimate,
        lambda2_lower: l2.lower,
        lambda2_upper: l2.upper,
        lambda2_estimate: l2.unfolding_estimate,
        starts: opts.starts,
        iterations: l1.iterations + l2.iterations,
        mixing_samples: mixing.samples,
        mixing_max_residual: mixing.max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lambda1Check {
    /// `λ1_upper / (p·n^{3/2})`.
    pub ratio: f64,
    pub c_prime: f64,
    pub passed: bool,
    /// Whether `Δ_2 ≤ c·p·n` actually holds for this host.
    pub codegree_condition: bool,
}

/// Compares the adjacency bound with `c'·p·n^{3/2}`, `c' = 10·max(1, c)`.
pub fn codegree_lambda1_check(
    h: &Hypergraph,
    c: f64,
    opts: &SpectralOptions,
) -> Result<Lambda1Check> {
    let p = spectral_density(h)?;
    if p == 0.0 {
        return Err(Error::DegenerateDensity);
    }
    let n = h.vertex_count() as f64;
    let l1 = lambda_bounds(h, Form::Adjacency, opts)?;
    let ratio = l1.upper / (p * n.powf(1.5));
    let c_prime = 10.0 * c.max(1.0);
    let max_codegree = h.min_degree_profile(2)?.max as f64;
    Ok(Lambda1Check {
        ratio,
        c_prime,
        passed: ratio <= c_prime,
        codegree_condition: max_codegree <= c * p * n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_forms_vanish() {
        let h = Hypergraph::build(6, 3, Vec::<Vec<u32>>::new()).unwrap();
        let b = lambda_bounds(&h, Form::Deviation, &SpectralOptions::default()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert!(matches!(
            codegree_lambda1_check(&h, 1.0, &SpectralOptions::default()),
            Err(Error::DegenerateDensity)
        ));
    }

    #[test]
    fn single_edge_uniform_vector() {
        let h = Hypergraph::build(3, 3, [[0, 1, 2]]).unwrap();
        let u = vec![1.0 / 3f64.sqrt(); 3];
        let v = form_value(&h, Form::Adjacency, &u, &u, &u).unwrap();
        assert!((v - 6.0 / 27f64.sqrt()).abs() < 1e-12);
        let b = lambda_bounds(&h, Form::Adjacency, &SpectralOptions::default()).unwrap();
        assert!(b.lower >= v - 1e-9);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn deviation_kills_constants() {
        let h = crate::generators::random_uniform(10, 3, 0.4, 3).unwrap();
        let ones = vec![1.0; 10];
        let v = form_value(&h, Form::Deviation, &ones, &ones, &ones).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn trace_bound_dominates_power_estimate() {
        let g = vec![2.0, 1.0, 1.0, 3.0];
        let top = (5.0 + 5f64.sqrt()) / 2.0;
        let upper = top_eigenvalue_upper(&g, 2);
        assert!(upper >= top && upper < top * 1.001);
        assert!((top_eigenvalue_estimate(&g, 2, 200) - top).abs() < 1e-6);
    }
}
