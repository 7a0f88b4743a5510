//! Shared helpers for the integration suites.
#![allow(dead_code)]

use boxcomp::DirectionMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Half-widths of the ambient bounding box of the support.
pub fn ambient_radius(xi: &DirectionMatrix) -> Vec<f64> {
    let a = xi.lattice().ambient_dim();
    let cols = xi.ambient_columns();
    (0..a)
        .map(|i| cols.iter().map(|c| c[i].abs()).sum::<f64>() / 2.0)
        .collect()
}

/// Rejection-sample an ambient point strictly inside the support.
pub fn random_support_point(xi: &DirectionMatrix, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = ambient_radius(xi);
    loop {
        let x: Vec<f64> = r.iter().map(|&ri| rng.gen_range(-ri..ri)).collect();
        let y = xi.lattice().to_lattice(&x);
        if xi.support_violation(&y) < -1e-3 {
            return x;
        }
    }
}

/// Sample an ambient point at least `margin` outside the support (measured
/// against the most violated support slab).
pub fn random_outside_point(xi: &DirectionMatrix, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    let r = ambient_radius(xi);
    loop {
        let x: Vec<f64> = r
            .iter()
            .map(|&ri| rng.gen_range(-1.5 * ri - 1.0..1.5 * ri + 1.0))
            .collect();
        let y = xi.lattice().to_lattice(&x);
        if xi.support_violation(&y) > margin {
            return x;
        }
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
