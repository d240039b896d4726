//! Named hypergraph constructions.

mod grid;
mod parity;
mod pattern;

pub use grid::{grid_cell, grid_pattern, grid_pattern_unchecked};
pub use parity::{parity_construction, parity_part_size, ParityConstruction};
pub use pattern::{complete_partite, edge, pattern_library, Pattern};

use rand::Rng;

use crate::combinatorics::for_each_combination;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::stage_rng;

/// Binomial random k-graph: every k-subset of `0..n` is an edge independently with probability `p`.
pub fn random_uniform(n: usize, k: usize, p: f64, seed: u64) -> Result<Hypergraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameters(format!(
            "density {p} outside [0, 1]"
        )));
    }
    if k < 2 || n < k {
        return Err(Error::InvalidParameters(format!(
            "need n >= k >= 2, got n = {n}, k = {k}"
        )));
    }
    let mut rng = stage_rng(seed, "random_uniform");
    let verts: Vec<u32> = (0..n as u32).collect();
    let mut edges = Vec::new();
    for_each_combination(&verts, k, |e| {
        if rng.random::<f64>() < p {
            edges.push(e.to_vec());
        }
        true
    });
    Hypergraph::build(n, k, edges)
}

/// Partition of the triples of `Z_n` into `n` classes by `a + b + c mod n`.
///
/// Within one class two vertices determine the third, so any two triples of a
/// class share at most one vertex.
pub fn triple_sum_partition(n: usize) -> Result<Vec<Vec<[u32; 3]>>> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    let mut classes = vec![Vec::new(); n];
    let n32 = n as u32;
    for a in 0..n32 {
        for b in a + 1..n32 {
            for c in b + 1..n32 {
                classes[((a + b + c) % n32) as usize].push([a, b, c]);
            }
        }
    }
    Ok(classes)
}
