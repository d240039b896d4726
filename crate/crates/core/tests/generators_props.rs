use hyperpack_core::combinatorics::binomial_f64;
use hyperpack_core::generators::{
    edge, grid_cell, grid_pattern, grid_pattern_unchecked, parity_construction, parity_part_size,
    pattern_library, triple_sum_partition, Pattern,
};
use hyperpack_core::Hypergraph;
use proptest::prelude::*;

/// Every `x ∈ X`, `y ∈ Y` and pair `{u, v}`: not both `xuv` and `yuv` are edges.
fn no_shared_link_pair(h: &Hypergraph, x: &[u32], y: &[u32]) -> bool {
    let n = h.n() as u32;
    for u in 0..n {
        for v in u + 1..n {
            let in_x = x
                .iter()
                .any(|&a| a != u && a != v && h.contains_edge(&[a, u, v]));
            let in_y = y
                .iter()
                .any(|&b| b != u && b != v && h.contains_edge(&[b, u, v]));
            if in_x && in_y {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn parity_links_never_meet_across_parts(n in 6usize..31, s in any::<u64>()) {
        let pc = parity_construction(n, s).unwrap();
        prop_assert_eq!(pc.x.len(), parity_part_size(n));
        prop_assert_eq!(pc.x.len() + pc.y.len(), n);
        prop_assert!(no_shared_link_pair(&pc.hypergraph, &pc.x.to_vec(), &pc.y.to_vec()));
        prop_assert!(pc.common_link_violation().is_none());
    }

    #[test]
    fn triple_sum_classes_are_linear(n in 3usize..25) {
        let classes = triple_sum_partition(n).unwrap();
        prop_assert_eq!(classes.len(), n);
        let total: usize = classes.iter().map(Vec::len).sum();
        prop_assert_eq!(total as f64, binomial_f64(n, 3));
        for (i, class) in classes.iter().enumerate() {
            for t in class {
                prop_assert_eq!((t[0] + t[1] + t[2]) as usize % n, i);
            }
            for (j, a) in class.iter().enumerate() {
                for b in &class[j + 1..] {
                    prop_assert!(a.iter().filter(|v| b.contains(v)).count() <= 1);
                }
            }
        }
    }
}

#[test]
fn parity_edge_counts_concentrate() {
    let n = 60;
    let expected = binomial_f64(n, 3) / 8.0;
    for seed in 0..50 {
        let m = parity_construction(n, seed)
            .unwrap()
            .hypergraph
            .edge_count() as f64;
        assert!(
            (m - expected).abs() <= 0.02 * (n as f64).powi(3),
            "seed {seed}: {m}"
        );
    }
}

fn check_grid(f_pat: &Pattern, g: &Pattern) {
    let f = f_pat.f();
    let image = |map: &dyn Fn(usize) -> u32| -> bool {
        f_pat.edges().all(|e| {
            g.graph()
                .contains_edge(&e.iter().map(|&l| map(l as usize)).collect::<Vec<_>>())
        })
    };
    for i in 1..f {
        assert!(image(&|l| grid_cell(i, (l + f - i) % f, f)), "row {i}");
    }
    for j in 0..f {
        assert!(image(&|l| grid_cell((l + f - j) % f, j, f)), "column {j}");
    }
    assert_eq!(g.edge_count(), (2 * f - 1) * f_pat.edge_count());
    // a root only sees its own column copy
    for j in 0..f {
        let root = grid_cell(0, j, f);
        let l = j;
        assert_eq!(
            g.graph().degree(root),
            f_pat.graph().degree(l as u32),
            "root {j}"
        );
    }
}

#[test]
fn grid_anatomy() {
    let e = edge(3).unwrap();
    check_grid(&e, &grid_pattern(&e).unwrap());
    let lin = Pattern::new(5, 3, [[0, 1, 2], [2, 3, 4]]).unwrap();
    check_grid(&lin, &grid_pattern(&lin).unwrap());
    let cherry = pattern_library("cherry").unwrap();
    assert!(grid_pattern(&cherry).is_err());
    check_grid(&cherry, &grid_pattern_unchecked(&cherry).unwrap());
}
