//! Property-based invariants.

use boxcomp::eval::eval_recursive;
use boxcomp::lattice::Lattice;
use boxcomp::spline::DirectionMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The centered box spline only depends on the direction matrix up to
    /// column permutation and per-column sign: all derived analytics and the
    /// evaluated values must coincide.
    #[test]
    fn descriptor_invariant_under_signed_permutation(
        spec in prop::sample::select(vec!["cc2:11", "cc2:21", "hex:20", "cc3:101", "bcc:110"]),
        seed in any::<u64>(),
    ) {
        let xi = DirectionMatrix::parse_spec(spec).unwrap();
        let mut cols = xi.lattice_columns().to_vec();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        cols.shuffle(&mut r);
        for c in &mut cols {
            if r.gen_bool(0.5) {
                for x in c.iter_mut() {
                    *x = -*x;
                }
            }
        }
        let xi2 = DirectionMatrix::from_lattice_columns(xi.lattice().clone(), cols).unwrap();
        let a = xi.descriptor();
        let b = xi2.descriptor();
        prop_assert_eq!(a.m, b.m);
        prop_assert_eq!(a.degree, b.degree);
        prop_assert_eq!(a.r, b.r);
        prop_assert_eq!(a.stencil_size, b.stencil_size);
        prop_assert_eq!(a.unimodular, b.unimodular);
        prop_assert_eq!(a.symmetric, b.symmetric);
        for _ in 0..5 {
            let x: Vec<f64> = (0..xi.lattice().ambient_dim())
                .map(|_| r.gen_range(-1.5..1.5))
                .collect();
            let va = eval_recursive(&xi, &x);
            let vb = eval_recursive(&xi2, &x);
            prop_assert!((va - vb).abs() < 1e-10, "{} vs {}", va, vb);
        }
    }

    /// Shell enumeration is complete and ordered: strictly increasing norms,
    /// everything within the bound, and closed under negation.
    #[test]
    fn shells_sorted_and_within_bound(
        spec in prop::sample::select(vec!["cc2", "hex", "cc3", "fcc", "bcc", "Dn*:4"]),
        bound in 1.0f64..12.0,
    ) {
        let lat = Lattice::parse_spec(spec).unwrap();
        let shells = lat.shells(bound);
        let mut prev = 0.0;
        for s in &shells {
            prop_assert!(s.norm2 > prev);
            prop_assert!(s.norm2 <= bound + 1e-6);
            prev = s.norm2;
            for p in &s.points {
                let neg: Vec<i64> = p.iter().map(|&x| -x).collect();
                prop_assert!(s.points.contains(&neg));
            }
        }
    }

    /// The stencil count at generic points equals the exact stencil size.
    #[test]
    fn stencil_counts_match(
        spec in prop::sample::select(vec!["cc2:11", "cc2:21", "hex:20", "bcc:110"]),
        seed in any::<u64>(),
    ) {
        let xi = DirectionMatrix::parse_spec(spec).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..xi.dim()).map(|_| r.gen_range(-2.0..2.0)).collect();
        prop_assert_eq!(xi.stencil_shifts(&x).len() as i64, xi.stencil_size());
    }
}
