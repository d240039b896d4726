use std::collections::HashMap;

use hyperpack_core::certificate::verify_certificate;
use hyperpack_core::generators::{parity_construction, pattern_library, random_uniform, Pattern};
use hyperpack_core::oracle::{
    oracle_perfect_packing, parity_predicts_no_packing, Verdict, DEFAULT_BUDGET,
};
use hyperpack_core::Hypergraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Whether the vertices of `block` carry a copy of `pattern`, trying every bijection.
fn carries(h: &Hypergraph, pattern: &Pattern, block: &[u32]) -> bool {
    let mut perm: Vec<usize> = (0..block.len()).collect();
    loop {
        let ok = pattern.edges().all(|e| {
            h.contains_edge(
                &e.iter()
                    .map(|&l| block[perm[l as usize]])
                    .collect::<Vec<_>>(),
            )
        });
        if ok {
            return true;
        }
        // next lexicographic permutation
        let Some(i) = (0..perm.len().saturating_sub(1))
            .rev()
            .find(|&i| perm[i] < perm[i + 1])
        else {
            return false;
        };
        let j = (i + 1..perm.len())
            .rev()
            .find(|&j| perm[j] > perm[i])
            .unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// Brute force over set partitions: the lowest uncovered vertex picks its block mates.
fn brute_force(h: &Hypergraph, pattern: &Pattern) -> bool {
    let n = h.n();
    let f = pattern.f();
    if !n.is_multiple_of(f) {
        return false;
    }
    fn go(
        h: &Hypergraph,
        pattern: &Pattern,
        free: u32,
        memo: &mut HashMap<u32, bool>,
        cache: &mut HashMap<u32, bool>,
    ) -> bool {
        if free == 0 {
            return true;
        }
        if let Some(&r) = memo.get(&free) {
            return r;
        }
        let v = free.trailing_zeros();
        let rest: Vec<u32> = (0..32).filter(|&u| u != v && free >> u & 1 == 1).collect();
        let mut found = false;
        let mut pick = Vec::new();
        fn choose(
            h: &Hypergraph,
            pattern: &Pattern,
            v: u32,
            rest: &[u32],
            from: usize,
            pick: &mut Vec<u32>,
            free: u32,
            memo: &mut HashMap<u32, bool>,
            cache: &mut HashMap<u32, bool>,
        ) -> bool {
            if pick.len() == pattern.f() - 1 {
                let mut block = pick.clone();
                block.push(v);
                let mask = block.iter().fold(0u32, |m, &u| m | 1 << u);
                let ok = *cache
                    .entry(mask)
                    .or_insert_with(|| carries(h, pattern, &block));
                return ok && go(h, pattern, free & !mask, memo, cache);
            }
            for i in from..rest.len() {
                pick.push(rest[i]);
                if choose(h, pattern, v, rest, i + 1, pick, free, memo, cache) {
                    return true;
                }
                pick.pop();
            }
            false
        }
        if choose(h, pattern, v, &rest, 0, &mut pick, free, memo, cache) {
            found = true;
        }
        memo.insert(free, found);
        found
    }
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    go(h, pattern, all, &mut HashMap::new(), &mut HashMap::new())
}

#[test]
fn oracle_agrees_with_set_partition_brute_force() {
    let patterns: Vec<Pattern> = ["edge", "cherry", "c4_2plus1", "k222"]
        .iter()
        .map(|n| pattern_library(n).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut exists = 0;
    for instance in 0..500 {
        let pattern = &patterns[instance % patterns.len()];
        let f = pattern.f();
        let n = match f {
            3 => [6, 9, 12, 15][rng.random_range(0..4)],
            4 => [8, 12, 13][rng.random_range(0..3)],
            _ => [6, 12][rng.random_range(0..2)],
        };
        let p = match f {
            3 => rng.random_range(0.02..0.25),
            4 => rng.random_range(0.1..0.5),
            _ => rng.random_range(0.4..0.95),
        };
        let h = random_uniform(n, 3, p, rng.random()).unwrap();
        let verdict = oracle_perfect_packing(&h, pattern, DEFAULT_BUDGET);
        let truth = brute_force(&h, pattern);
        match verdict.verdict {
            Verdict::Exists(cert) => {
                assert!(
                    truth,
                    "instance {instance}: oracle found a packing brute force missed"
                );
                assert_eq!(verify_certificate(&h, pattern, &cert), Ok(()));
                exists += 1;
            }
            Verdict::NotExists => assert!(!truth, "instance {instance}: oracle missed a packing"),
            Verdict::Timeout => panic!("instance {instance} timed out"),
        }
    }
    // both verdicts must be exercised for the comparison to mean anything
    assert!(exists > 50 && exists < 450, "{exists} positive instances");
}

#[test]
fn parity_hosts_match_the_parity_prediction() {
    let k222 = pattern_library("k222").unwrap();
    let cc = pattern_library("cherry_4cycle").unwrap();
    for n in [12usize, 16] {
        for seed in 0..4 {
            let pc = parity_construction(n, seed).unwrap();
            for pattern in [&k222, &cc] {
                if n % pattern.f() != 0 {
                    continue;
                }
                let predicted = parity_predicts_no_packing(&pc, pattern);
                let verdict =
                    oracle_perfect_packing(&pc.hypergraph, pattern, DEFAULT_BUDGET).verdict;
                assert!(predicted, "n = {n}, seed {seed}");
                assert_eq!(verdict, Verdict::NotExists, "n = {n}, seed {seed}");
            }
        }
    }
}
