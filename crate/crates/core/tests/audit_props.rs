use hyperpack_core::audit::{
    audit, density_defect, edge_density, family_defect, separable_partition, AuditConfig,
    DefectMethod, DefectOptions,
};
use hyperpack_core::generators::{parity_construction, random_uniform};
use hyperpack_core::{Hypergraph, VertexSet};
use proptest::prelude::*;

/// Whether `members` splits into pairs each with codegree at least `threshold`, by trying every pairing.
fn pairable(h: &Hypergraph, members: &[u32], threshold: f64) -> bool {
    let Some((&first, rest)) = members.split_first() else {
        return true;
    };
    (0..rest.len()).any(|i| {
        let mate = rest[i];
        let others: Vec<u32> = rest.iter().copied().filter(|&v| v != mate).collect();
        h.codegree(first, mate) as f64 >= threshold && pairable(h, &others, threshold)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn witness_recount_reproduces_mu(n in 6usize..12, p in 0.1f64..0.9, s in any::<u64>(), target in 0.1f64..0.9) {
        let h = random_uniform(n, 3, p, s).unwrap();
        let est = density_defect(&h, target, &DefectOptions::new(2_000, s)).unwrap();
        prop_assert_eq!(family_defect(&h, target, &est.witness, false), est.mu_hat);
        // raising p cannot lower the defect of a fixed family
        let higher = (target + 0.05).min(1.0);
        prop_assert!(family_defect(&h, higher, &est.witness, false) >= est.mu_hat);
    }

    #[test]
    fn separability_is_sound_and_complete(
        n in 8usize..14,
        p in 0.2f64..0.9,
        s in any::<u64>(),
        mask in any::<u16>(),
        zeta in 0.0f64..0.5,
    ) {
        let h = random_uniform(n, 3, p, s).unwrap();
        let mut members: Vec<u32> = (0..n as u32).filter(|&v| mask >> v & 1 == 1).take(8).collect();
        if members.len() % 2 == 1 {
            members.pop();
        }
        let b = VertexSet::from_members(n, members.iter().copied());
        let res = separable_partition(&h, &b, zeta).unwrap();
        let threshold = zeta * n as f64;
        prop_assert_eq!(res.pairing.is_some(), pairable(&h, &members, threshold));
        if let Some(pairs) = res.pairing {
            let mut covered: Vec<u32> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
            covered.sort_unstable();
            prop_assert_eq!(covered, members);
            for (i, &(u, v)) in pairs.iter().enumerate() {
                prop_assert!(h.codegree(u, v) as f64 >= threshold);
                prop_assert_eq!(res.codegrees[i], h.codegree(u, v));
            }
        }
    }
}

#[test]
fn exact_defect_on_tiny_hosts_is_the_true_maximum() {
    // n·k ≤ 21: every family is enumerated, so a single-vertex change cannot do better
    let h = random_uniform(7, 3, 0.5, 11).unwrap();
    let est = density_defect(&h, 0.5, &DefectOptions::new(1_000, 0)).unwrap();
    assert_eq!(est.method, DefectMethod::Exact);
    for i in 0..3 {
        for v in 0..7u32 {
            let mut fam = est.witness.clone();
            if fam.is_empty() {
                fam = vec![VertexSet::empty(7); 3];
            }
            fam[i].toggle(v);
            assert!(family_defect(&h, 0.5, &fam, false) <= est.mu_hat + 1e-15);
        }
    }
}

#[test]
fn default_zeta_is_quarter_of_min_density_and_degree() {
    for seed in 0..5 {
        let h = random_uniform(14, 3, 0.4, seed).unwrap();
        let r = audit(
            &h,
            &AuditConfig {
                budget: 500,
                ..AuditConfig::default()
            },
        )
        .unwrap();
        assert_eq!(r.zeta, r.p_hat.min(r.degrees.alpha_hat) / 4.0);
        assert_eq!(r.p_hat, edge_density(&h));
        assert_eq!(r.schema, "audit/1");
    }
}

#[test]
fn parity_host_densities() {
    let pc = parity_construction(24, 3).unwrap();
    let r = audit(
        &pc.hypergraph,
        &AuditConfig {
            budget: 2_000,
            ..AuditConfig::default()
        },
    )
    .unwrap();
    assert!((r.p_hat - 0.125).abs() < 0.05, "{}", r.p_hat);
}
