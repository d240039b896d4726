use hyperpack_core::embedding::{count_rooted_copies, is_copy, RootedQuery};
use hyperpack_core::generators::{edge, pattern_library, random_uniform, Pattern};
use hyperpack_core::{Hypergraph, VertexSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Injective maps respecting roots and ranges, by trying every image tuple.
fn brute_count(
    h: &Hypergraph,
    pattern: &Pattern,
    roots: &[(u32, u32)],
    ranges: &[(u32, VertexSet)],
) -> u64 {
    let f = pattern.f();
    let allowed: Vec<Vec<u32>> = (0..f as u32)
        .map(|w| {
            if let Some(&(_, x)) = roots.iter().find(|r| r.0 == w) {
                vec![x]
            } else if let Some((_, s)) = ranges.iter().find(|r| r.0 == w) {
                s.to_vec()
            } else {
                (0..h.n() as u32).collect()
            }
        })
        .collect();
    fn go(h: &Hypergraph, pattern: &Pattern, allowed: &[Vec<u32>], map: &mut Vec<u32>) -> u64 {
        if map.len() == allowed.len() {
            return is_copy(h, pattern, map) as u64;
        }
        let mut total = 0;
        for &x in &allowed[map.len()] {
            if !map.contains(&x) {
                map.push(x);
                total += go(h, pattern, allowed, map);
                map.pop();
            }
        }
        total
    }
    go(h, pattern, &allowed, &mut Vec::new())
}

fn subset(n: usize, mask: u64) -> VertexSet {
    VertexSet::from_members(n, (0..n as u32).filter(|&v| mask >> v & 1 == 1))
}

fn small_patterns() -> Vec<Pattern> {
    vec![
        edge(3).unwrap(),
        pattern_library("cherry").unwrap(),
        Pattern::new(5, 3, [[0, 1, 2], [2, 3, 4]]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_match_enumeration(
        n in 5usize..9,
        p in 0.2f64..0.9,
        s in any::<u64>(),
        which in 0usize..3,
        masks in prop::collection::vec(any::<u64>(), 5),
        root_image in 0u32..5,
    ) {
        let h = random_uniform(n, 3, p, s).unwrap();
        let pattern = &small_patterns()[which];
        let roots = vec![(0u32, root_image)];
        let ranges: Vec<(u32, VertexSet)> = (1..pattern.f() as u32)
            .map(|w| (w, subset(n, masks[w as usize])))
            .collect();
        let mut q = RootedQuery::new().root(0, root_image);
        for (w, set) in &ranges {
            q = q.range(*w, set.clone());
        }
        let got = count_rooted_copies(&h, pattern, &q, None).unwrap();
        prop_assert!(!got.truncated);
        prop_assert_eq!(got.count, brute_count(&h, pattern, &roots, &ranges));
    }

    #[test]
    fn single_edge_count_is_multipartite_count(
        n in 4usize..12,
        p in 0.0f64..1.0,
        s in any::<u64>(),
        masks in prop::collection::vec(any::<u64>(), 3),
    ) {
        let h = random_uniform(n, 3, p, s).unwrap();
        let parts: Vec<VertexSet> = masks.iter().map(|&m| subset(n, m)).collect();
        let mut q = RootedQuery::new();
        for (i, set) in parts.iter().enumerate() {
            q = q.range(i as u32, set.clone());
        }
        let got = count_rooted_copies(&h, &edge(3).unwrap(), &q, None).unwrap();
        prop_assert_eq!(got.count, h.multipartite_count(&parts));
    }

    #[test]
    fn limits_truncate(n in 6usize..10, s in any::<u64>(), limit in 0u64..20) {
        let h = random_uniform(n, 3, 0.6, s).unwrap();
        let cherry = pattern_library("cherry").unwrap();
        let full = count_rooted_copies(&h, &cherry, &RootedQuery::new(), None).unwrap().count;
        let capped = count_rooted_copies(&h, &cherry, &RootedQuery::new(), Some(limit)).unwrap();
        prop_assert_eq!(capped.count, full.min(limit));
        prop_assert_eq!(capped.truncated, full > limit);
    }
}

#[test]
fn self_counts_are_automorphism_counts() {
    let cases = [
        ("cherry", 4u64),
        ("edge", 6),
        ("c4_2plus1", 16),
        ("k222", 48),
    ];
    for (name, aut) in cases {
        let p = pattern_library(name).unwrap();
        let got = count_rooted_copies(p.graph(), &p, &RootedQuery::new(), None).unwrap();
        assert_eq!(got.count, aut, "{name}");
    }
}

/// Rooted copies in `random_uniform(24, 3, 0.5)` meet `p^{|F|} Π|Z_i| − 0.15 n^f`.
#[test]
fn embedding_lower_bound_at_desk_scale() {
    let n = 24usize;
    let patterns = [
        pattern_library("cherry").unwrap(),
        edge(3).unwrap(),
        Pattern::new(5, 3, [[0, 1, 2], [2, 3, 4]]).unwrap(),
    ];
    for seed in 0..5u64 {
        let h = random_uniform(n, 3, 0.5, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for pattern in &patterns {
            let f = pattern.f();
            for _ in 0..8 {
                let ranges: Vec<VertexSet> = (0..f)
                    .map(|_| {
                        let size = rng.random_range(n / 2..=n);
                        let mut all: Vec<u32> = (0..n as u32).collect();
                        for i in 0..size {
                            let j = rng.random_range(i..n);
                            all.swap(i, j);
                        }
                        VertexSet::from_members(n, all[..size].iter().copied())
                    })
                    .collect();
                let mut q = RootedQuery::new();
                for (w, set) in ranges.iter().enumerate() {
                    q = q.range(w as u32, set.clone());
                }
                let count = count_rooted_copies(&h, pattern, &q, None).unwrap().count as f64;
                let product: f64 = ranges.iter().map(|s| s.len() as f64).product();
                let bound = 0.5f64.powi(pattern.edge_count() as i32) * product
                    - 0.15 * (n as f64).powi(f as i32);
                assert!(count >= bound, "seed {seed}: {count} < {bound}");
            }
        }
    }
}
