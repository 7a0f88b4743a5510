//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Tolerances and time limits are pinned in the asserts.

mod common;

use boxcomp::eval::{eval_recursive, graded_monomials, to_ppform, transform_check, FourierOracle};
use boxcomp::reconstruct::{
    derive_quasi_interpolant, equal_density_comparison, order_study, qi_reference_report, Signal,
    SplineField,
};
use boxcomp::spline::DirectionMatrix;
use boxcomp::tables;
use common::{random_outside_point, random_support_point, rng, sub};
use std::time::Instant;

const INVARIANT_SPLINES: &[&str] = &[
    "cc2:11", "cc2:21", "hex:20", "cc3:101", "bcc:110", "fcc:100", "bcc:200",
];

fn xi(spec: &str) -> DirectionMatrix {
    DirectionMatrix::parse_spec(spec).unwrap()
}

#[test]
fn criterion_01_symmetry_groups() {
    let t0 = Instant::now();
    let expected = [("cc2", 8), ("hex", 12), ("cc3", 48), ("fcc", 48), ("bcc", 48)];
    for (spec, order) in expected {
        let lat = boxcomp::Lattice::parse_spec(spec).unwrap();
        assert_eq!(lat.symmetry_group().unwrap().order(), order, "{spec}");
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, limit 5 s");
    println!("criterion 1: PASS — symmetry group orders (8, 12, 48, 48, 48) in {elapsed:?}");
}

#[test]
fn criterion_02_direction_sets() {
    let mut mismatches = Vec::new();
    let checked = tables::diff_direction_sets(&mut mismatches).unwrap();
    assert_eq!(checked, 20);
    assert!(mismatches.is_empty(), "{mismatches:?}");
    println!("criterion 2: PASS — all 20 direction sets match up to sign and order");
}

#[test]
fn criterion_03_datasheets() {
    let t0 = Instant::now();
    let mut mismatches = Vec::new();
    let rows3 = tables::bivariate_rows();
    let rows4 = tables::trivariate_rows();
    tables::diff_spline_rows("bivariate splines", &rows3, &mut mismatches).unwrap();
    tables::diff_spline_rows("trivariate splines", &rows4, &mut mismatches).unwrap();
    assert!(mismatches.is_empty(), "{mismatches:?}");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, limit 30 s");
    println!(
        "criterion 3: PASS — {} datasheet rows (degree, continuity, stencil) exact in {elapsed:?}",
        rows3.len() + rows4.len()
    );
}

#[test]
fn criterion_04_general_d_direction_sets() {
    let mut mismatches = Vec::new();
    let checked = tables::diff_family_tables(&mut mismatches).unwrap();
    assert!(mismatches.is_empty(), "{mismatches:?}");
    println!(
        "criterion 4: PASS — {checked} general-d rows at d = 4, 5 (including the Dn* d=4 count of 12)"
    );
}

#[test]
fn criterion_05_pointwise_invariants() {
    let t0 = Instant::now();
    for spec in INVARIANT_SPLINES {
        let xi = xi(spec);
        let lat = xi.lattice().clone();
        let group = lat.symmetry_group().unwrap();
        let mut r = rng(51);
        for _ in 0..100 {
            // partition of unity and non-negativity
            let x = random_support_point(&xi, &mut r);
            let mut total = 0.0;
            for j in xi.stencil_shifts(&x) {
                let v = eval_recursive(&xi, &sub(&x, &lat.to_ambient(&j)));
                assert!(v >= -1e-12, "{spec}: negative {v}");
                total += v;
            }
            assert!((total - 1.0).abs() < 1e-9, "{spec}: partition {total}");
            // symmetry invariance
            let v = eval_recursive(&xi, &x);
            for el in &group.elements {
                let vl = eval_recursive(&xi, &el.apply_ambient(&x));
                assert!((v - vl).abs() < 1e-9, "{spec}: symmetry {v} vs {vl}");
            }
            // support vanishing
            let outside = random_outside_point(&xi, &mut r, 1e-3);
            let v = eval_recursive(&xi, &outside);
            assert!(v.abs() <= 1e-12, "{spec}: {v} outside support");
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, limit 2 min");
    println!(
        "criterion 5: PASS — partition/positivity/symmetry/support at 100 points × {} splines in {elapsed:?}",
        INVARIANT_SPLINES.len()
    );
}

#[test]
fn criterion_06_oracle_equivalence() {
    let mut global_worst: f64 = 0.0;
    for spec in INVARIANT_SPLINES {
        let xi = xi(spec);
        let oracle = FourierOracle::new(&xi, 1e-4).unwrap();
        let mut r = rng(61);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let x = random_support_point(&xi, &mut r);
            let a = eval_recursive(&xi, &x);
            let b = oracle.eval(&x).unwrap_or_else(|e| panic!("{spec}: {e}"));
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-3, "{spec}: |recursive - oracle| = {worst}");
        global_worst = global_worst.max(worst);
    }
    println!(
        "criterion 6: PASS — recursive vs Fourier oracle within 1e-3 (worst {global_worst:.2e}) at 200 points × {} splines",
        INVARIANT_SPLINES.len()
    );
}

#[test]
fn criterion_07_ppform() {
    // integer scaling bounds from the published BB-nets
    let mut denoms = Vec::new();
    for (spec, bound) in [("cc2:11", 8u64), ("cc2:21", 192), ("hex:20", 24)] {
        let xi = xi(spec);
        let pp = to_ppform(&xi).unwrap();
        assert!(pp.is_rationalized(), "{spec}");
        assert!(
            bound % pp.denominator() == 0,
            "{spec}: q = {} must divide {bound}",
            pp.denominator()
        );
        denoms.push(pp.denominator());
        // agreement with the recursive evaluator at 1000 interior points
        let mut r = rng(71);
        for _ in 0..1000 {
            let x = random_support_point(&xi, &mut r);
            let diff = (pp.eval(&x) - eval_recursive(&xi, &x)).abs();
            assert!(diff < 1e-9, "{spec}: pp vs recursive differ by {diff}");
        }
        assert_eq!(pp.lookup_misses(), 0, "{spec}");
    }
    // linear-map identity spot checks
    let zp = xi("cc2:11");
    let mut r = rng(72);
    for l in [
        nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]),
        nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
        nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, -1.0]),
    ] {
        for _ in 0..30 {
            let x = random_support_point(&zp, &mut r);
            let (a, b) = transform_check(&zp, &l, &x);
            assert!((a - b).abs() < 1e-6, "transform: {a} vs {b}");
        }
    }
    println!(
        "criterion 7: PASS — pp denominators {denoms:?} divide (8, 192, 24); 1e-9 agreement at 10^3 points; linear-map checks at 1e-6"
    );
}

#[test]
fn criterion_08_quasi_interpolation() {
    use num::One;
    // exact constant reproduction for every derived weight pair
    let repro = [
        "cc2:11", "cc2:30", "cc2:21", "cc2:40", "hex:20", "cc3:101", "bcc:110", "fcc:100",
    ];
    for spec in repro {
        let xi = xi(spec);
        let qi = derive_quasi_interpolant(&xi).unwrap();
        let total = &qi.q0
            + boxcomp::linalg::rat_int(2 * qi.neighbors.len() as i64) * &qi.q1;
        assert!(total.is_one(), "{spec}: constant reproduction violated");
        // polynomial reproduction up to degree r-1
        let r_num = xi.smoothness_r();
        let d = xi.dim();
        let (lo, hi) = (vec![-1.0; d], vec![1.0; d]);
        let probes = boxcomp::reconstruct::probe_grid(&lo, &hi, if d == 2 { 9 } else { 5 });
        let pp = std::sync::Arc::new(to_ppform(&xi).unwrap());
        for mon in graded_monomials(d, r_num - 1) {
            let mon2 = mon.clone();
            let signal = move |x: &[f64]| {
                let mut v = 1.0;
                for (c, &e) in x.iter().zip(&mon2) {
                    v *= c.powi(e as i32);
                }
                v
            };
            let mut field = SplineField::from_signal(&xi, &qi, 1.0, (&lo, &hi), &signal).unwrap();
            field.set_ppform(pp.clone());
            for p in &probes {
                let err = (field.eval(p).unwrap() - signal(p)).abs();
                assert!(err < 1e-8, "{spec}: monomial {mon:?} error {err:.2e}");
            }
        }
    }
    // the reference-table cross-check report is generated (inconsistencies
    // are documented there, not asserted)
    let report = qi_reference_report().unwrap();
    assert!(report.contains("Mb110"));
    println!("criterion 8: PASS — exact constant reproduction; monomials up to degree r-1 within 1e-8; cross-check report below\n{report}");
}

#[test]
fn criterion_09_approximation_orders() {
    // ZP, r = 3, 2D, h = 1/4 .. 1/16 (sharp bump so the saturated order-3
    // term dominates; see the order-study tests for the regime analysis)
    let t0 = Instant::now();
    let zp = xi("cc2:11");
    let sig = Signal::Gaussian { sigma: 0.17 };
    let f = move |x: &[f64]| sig.eval(x);
    let study = order_study(&zp, &f, &[0.25, 0.125, 0.0625], &[-0.5; 2], &[0.5; 2], 33).unwrap();
    assert!(!study.at_floor);
    assert!(
        (study.slope_l2 - 3.0).abs() < 0.35 && (study.slope_linf - 3.0).abs() < 0.35,
        "ZP slopes: linf {:.3}, l2 {:.3}",
        study.slope_linf,
        study.slope_l2
    );
    let zp_elapsed = t0.elapsed();
    assert!(zp_elapsed.as_secs_f64() < 300.0, "ZP study {zp_elapsed:?}, limit 5 min");
    let zp_slopes = (study.slope_linf, study.slope_l2);

    // Mb110, r = 4, 3D, h = 1/2 .. 1/8 (wide bump, symbol-error regime)
    let t0 = Instant::now();
    let b110 = xi("bcc:110");
    let sig = Signal::Gaussian { sigma: 1.4 };
    let f = move |x: &[f64]| sig.eval(x);
    let study = order_study(&b110, &f, &[0.5, 0.25, 0.125], &[-0.5; 3], &[0.5; 3], 33).unwrap();
    assert!(!study.at_floor);
    assert!(
        (study.slope_l2 - 4.0).abs() < 0.35 && (study.slope_linf - 4.0).abs() < 0.35,
        "Mb110 slopes: linf {:.3}, l2 {:.3}",
        study.slope_linf,
        study.slope_l2
    );
    let b_elapsed = t0.elapsed();
    assert!(b_elapsed.as_secs_f64() < 300.0, "Mb110 study {b_elapsed:?}, limit 5 min");
    println!(
        "criterion 9: PASS — slopes ZP (linf {:.2}, l2 {:.2}) ≈ 3 in {zp_elapsed:?}; Mb110 (linf {:.2}, l2 {:.2}) ≈ 4 in {b_elapsed:?}",
        zp_slopes.0, zp_slopes.1, study.slope_linf, study.slope_l2
    );
}

#[test]
fn criterion_10_raycast_smoke_and_lattice_comparison() {
    // deterministic ray-cast smoke test: nonempty silhouette, stable bytes
    let b110 = xi("bcc:110");
    let qi = derive_quasi_interpolant(&b110).unwrap();
    let lo = [-1.0, -1.0, -1.0];
    let hi = [1.0, 1.0, 1.0];
    let sig = Signal::MarschnerLobb;
    let f = move |x: &[f64]| sig.eval(x);
    let render = || {
        let mut field = SplineField::from_signal(&b110, &qi, 0.12, (&lo, &hi), &f).unwrap();
        field.enable_fast_eval().unwrap();
        boxcomp::render::raycast(&field, 0.5, 48).unwrap()
    };
    let img1 = render();
    let img2 = render();
    assert!(!img1.is_blank(), "silhouette must be nonempty");
    assert_eq!(img1.to_pgm(), img2.to_pgm(), "render must be deterministic");
    let checksum = img1.checksum();

    // equal-density error comparison across the three 3D lattices
    // (values informative; no ranking asserted)
    let rows = equal_density_comparison(1000.0, 9).unwrap();
    assert_eq!(rows.len(), 3);
    let mut table = String::new();
    for r in &rows {
        assert!(r.l2.is_finite() && r.l2 > 0.0);
        table.push_str(&format!(
            "  {:<8} on {:<5} h = {:.4}: linf {:.4e}, l2 {:.4e}\n",
            r.spline, r.lattice, r.h, r.linf, r.l2
        ));
    }
    println!(
        "criterion 10: PASS — ray-cast smoke test (checksum {checksum:016x}, deterministic, nonempty); equal-density Marschner-Lobb table:\n{table}"
    );
}
