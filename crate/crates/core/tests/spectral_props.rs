use hyperpack_core::generators::{parity_construction, random_uniform};
use hyperpack_core::spectral::{
    form_value, lambda_bounds, mixing_residual, spectral_density, Form, SpectralOptions,
};
use hyperpack_core::Hypergraph;
use proptest::prelude::*;

fn opts(seed: u64) -> SpectralOptions {
    SpectralOptions {
        starts: 8,
        iters: 200,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounds_are_ordered(n in 5usize..16, p in 0.0f64..1.0, s in any::<u64>()) {
        let h = random_uniform(n, 3, p, s).unwrap();
        for form in [Form::Adjacency, Form::Deviation] {
            let b = lambda_bounds(&h, form, &opts(s)).unwrap();
            prop_assert!(b.lower <= b.upper * (1.0 + 1e-9) + 1e-9, "{:?}: {} > {}", form, b.lower, b.upper);
        }
    }

    #[test]
    fn deviation_form_vanishes_on_all_ones(n in 4usize..20, p in 0.0f64..1.0, s in any::<u64>()) {
        let h = random_uniform(n, 3, p, s).unwrap();
        let ones = vec![1.0; n];
        let v = form_value(&h, Form::Deviation, &ones, &ones, &ones).unwrap();
        let adj = form_value(&h, Form::Adjacency, &ones, &ones, &ones).unwrap();
        prop_assert!((adj - 6.0 * h.edge_count() as f64).abs() < 1e-9);
        prop_assert!(v.abs() < 1e-9 * (n as f64).powi(3), "{v}");
        prop_assert!((spectral_density(&h).unwrap() - 6.0 * h.edge_count() as f64 / (n as f64).powi(3)).abs() < 1e-15);
    }

    #[test]
    fn mixing_holds_with_certified_lambda(n in 6usize..14, p in 0.1f64..0.9, s in any::<u64>()) {
        let h = random_uniform(n, 3, p, s).unwrap();
        let l2 = lambda_bounds(&h, Form::Deviation, &opts(s)).unwrap().upper;
        let r = mixing_residual(&h, l2, 400, s).unwrap();
        prop_assert!(r.max_residual <= 0.0, "{}", r.max_residual);
    }
}

/// Deviation form evaluated from scratch over all ordered triples.
fn dense_deviation(h: &Hypergraph, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let n = h.n();
    let p = 6.0 * h.edge_count() as f64 / (n as f64).powi(3);
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let edge =
                    a != b && b != c && a != c && h.contains_edge(&[a as u32, b as u32, c as u32]);
                total += (edge as u8 as f64 - p) * x[a] * y[b] * z[c];
            }
        }
    }
    total
}

#[test]
fn form_matches_dense_evaluation() {
    let h = random_uniform(9, 3, 0.45, 3).unwrap();
    let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
    let y: Vec<f64> = (0..9).map(|i| (i as f64 * 1.3).cos()).collect();
    let z: Vec<f64> = (0..9).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let got = form_value(&h, Form::Deviation, &x, &y, &z).unwrap();
    assert!((got - dense_deviation(&h, &x, &y, &z)).abs() < 1e-9);
}

#[test]
fn unit_vector_values_stay_below_upper_bound() {
    let h = parity_construction(12, 1).unwrap().hypergraph;
    let b = lambda_bounds(&h, Form::Deviation, &opts(0)).unwrap();
    let e = |i: usize| (0..12).map(|j| (i == j) as u8 as f64).collect::<Vec<_>>();
    for a in 0..12 {
        for c in 0..12 {
            for d in 0..12 {
                let v = form_value(&h, Form::Deviation, &e(a), &e(c), &e(d)).unwrap();
                assert!(v.abs() <= b.upper);
            }
        }
    }
}
