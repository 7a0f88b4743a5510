//! Knot-plane arrangement of a box spline support.
//!
//! The polynomial pieces are delineated by hyperplanes spanned by d-1
//! independent columns, translated to the offsets swept by the support
//! vertices. In lattice coordinates every normal is a primitive integer
//! vector and every offset is a half-integer, so planes are stored as
//! `(normal, doubled offset)` pairs and a region is identified by its sign
//! vector over all interior planes.
//!
//! Regions are discovered by sampling around arrangement vertices (complete
//! for d = 2, where the cells around a vertex are angular sectors) plus a
//! seeded Monte-Carlo sweep of the support. Every region keeps its
//! best-cleared interior representative; a region without a clear
//! representative is reported as degenerate.

use crate::spline::DirectionMatrix;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};

/// Sign-vector dead zone half-width (distance to a plane, normalized).
pub const DEAD_ZONE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ArrangementPlane {
    /// Primitive integer normal in lattice coordinates, canonical sign.
    pub normal: Vec<i64>,
    /// Interior knot offsets, doubled to stay integral, ascending.
    pub offsets_x2: Vec<i64>,
    /// Support slab width: the support satisfies |2⟨n,y⟩| ≤ width.
    pub width: i64,
    norm_len: f64,
}

#[derive(Clone, Debug)]
pub struct Region {
    pub key: Vec<u8>,
    pub rep: Vec<f64>,
    pub margin: f64,
}

pub struct KnotPlaneArrangement {
    d: usize,
    planes: Vec<ArrangementPlane>,
    regions: Vec<Region>,
    index: HashMap<Vec<u8>, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Outside,
    /// Within the dead zone of a knot plane or the support boundary.
    DeadZone,
    Interior(Vec<u8>),
}

impl KnotPlaneArrangement {
    pub fn build(xi: &DirectionMatrix) -> Result<KnotPlaneArrangement> {
        let d = xi.dim();
        if !(2..=3).contains(&d) {
            return Err(Error::Unsupported(format!(
                "knot-plane arrangements are limited to d = 2, 3 (got d = {d})"
            )));
        }
        let sup = xi.support();
        let mut planes: Vec<ArrangementPlane> = sup
            .normals
            .iter()
            .map(|nc| {
                // offsets swept by the support vertices: all half-sums of
                // signed column dots
                let mut sums: HashSet<i64> = [0].into_iter().collect();
                for &a in &nc.dots {
                    if a == 0 {
                        continue;
                    }
                    sums = sums
                        .iter()
                        .flat_map(|&s| [s + a, s - a])
                        .collect();
                }
                let mut offsets_x2: Vec<i64> =
                    sums.into_iter().filter(|&o| o.abs() < nc.width).collect();
                offsets_x2.sort_unstable();
                let norm_len = nc
                    .normal
                    .iter()
                    .map(|&x| (x * x) as f64)
                    .sum::<f64>()
                    .sqrt();
                ArrangementPlane {
                    normal: nc.normal.clone(),
                    offsets_x2,
                    width: nc.width,
                    norm_len,
                }
            })
            .collect();
        planes.sort_by(|a, b| a.normal.cmp(&b.normal));

        let mut arr = KnotPlaneArrangement {
            d,
            planes,
            regions: Vec::new(),
            index: HashMap::new(),
        };

        let mut best: HashMap<Vec<u8>, (Vec<f64>, f64)> = HashMap::new();
        let consider = |arr: &KnotPlaneArrangement, p: &[f64], best: &mut HashMap<Vec<u8>, (Vec<f64>, f64)>| {
            if let Classification::Interior(key) = arr.classify(p) {
                let margin = arr.clearance(p);
                match best.get_mut(&key) {
                    Some(entry) if entry.1 >= margin => {}
                    Some(entry) => *entry = (p.to_vec(), margin),
                    None => {
                        best.insert(key, (p.to_vec(), margin));
                    }
                }
            }
        };

        // vertex-neighborhood sampling
        let verts = arr.vertices();
        for v in &verts {
            let thru: Vec<Vec<f64>> = arr
                .planes
                .iter()
                .filter_map(|p| {
                    let dot2: f64 = 2.0 * p.normal.iter().zip(v).map(|(&n, &y)| n as f64 * y).sum::<f64>();
                    let near = p
                        .offsets_x2
                        .iter()
                        .map(|&o| (dot2 - o as f64).abs())
                        .chain([(dot2.abs() - p.width as f64).abs()])
                        .fold(f64::INFINITY, f64::min);
                    (near < 1e-7 * p.norm_len).then(|| {
                        p.normal
                            .iter()
                            .map(|&x| x as f64 / p.norm_len)
                            .collect::<Vec<f64>>()
                    })
                })
                .collect();
            for dir in local_directions(d, &thru) {
                for eps in [1e-2, 1e-3, 1e-4] {
                    let p: Vec<f64> = (0..d).map(|i| v[i] + eps * dir[i]).collect();
                    consider(&arr, &p, &mut best);
                }
            }
        }

        // seeded Monte-Carlo sweep of the support box
        let hw = &xi.support().half_width;
        let mut rng = ChaCha8Rng::seed_from_u64(0x426f_7853_706c_6e65);
        let tries = if d == 2 { 20_000 } else { 60_000 };
        for _ in 0..tries {
            let p: Vec<f64> = (0..d)
                .map(|i| rng.gen_range(-hw[i] - 0.05..hw[i] + 0.05))
                .collect();
            consider(&arr, &p, &mut best);
        }

        let mut keys: Vec<Vec<u8>> = best.keys().cloned().collect();
        keys.sort();
        for key in keys {
            let (rep, margin) = best.remove(&key).unwrap();
            if margin < 1e-6 {
                return Err(Error::Degenerate(format!(
                    "region {} of {} has no clear interior sample (margin {margin:.2e} at {rep:?})",
                    String::from_utf8_lossy(&key),
                    xi.name(),
                )));
            }
            arr.index.insert(key.clone(), arr.regions.len());
            arr.regions.push(Region { key, rep, margin });
        }
        if arr.regions.is_empty() {
            return Err(Error::Degenerate(format!(
                "no interior region found for {}",
                xi.name()
            )));
        }
        Ok(arr)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn planes(&self) -> &[ArrangementPlane] {
        &self.planes
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_index(&self, key: &[u8]) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Classify a point given in lattice coordinates.
    pub fn classify(&self, y: &[f64]) -> Classification {
        let mut key = Vec::with_capacity(self.planes.iter().map(|p| p.offsets_x2.len()).sum());
        let mut dead = false;
        for p in &self.planes {
            let dot2: f64 = 2.0 * p.normal.iter().zip(y).map(|(&n, &v)| n as f64 * v).sum::<f64>();
            let tol = 2.0 * DEAD_ZONE * p.norm_len;
            if dot2.abs() > p.width as f64 + tol {
                return Classification::Outside;
            }
            if (dot2.abs() - p.width as f64).abs() <= tol {
                dead = true;
            }
            for &o in &p.offsets_x2 {
                let diff = dot2 - o as f64;
                if diff.abs() <= tol {
                    dead = true;
                    key.push(b'0');
                } else {
                    key.push(if diff > 0.0 { b'+' } else { b'-' });
                }
            }
        }
        if dead {
            Classification::DeadZone
        } else {
            Classification::Interior(key)
        }
    }

    /// Distance (normalized by plane normal length) from `y` to the nearest
    /// knot plane or support facet.
    pub fn clearance(&self, y: &[f64]) -> f64 {
        let mut min = f64::INFINITY;
        for p in &self.planes {
            let dot2: f64 = 2.0 * p.normal.iter().zip(y).map(|(&n, &v)| n as f64 * v).sum::<f64>();
            for &o in &p.offsets_x2 {
                min = min.min((dot2 - o as f64).abs() / (2.0 * p.norm_len));
            }
            min = min.min((p.width as f64 - dot2.abs()).abs() / (2.0 * p.norm_len));
        }
        min
    }

    /// All intersections of d planes (interior or boundary) with independent
    /// normals that lie in the closed support.
    fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        let mut flat: Vec<(usize, f64)> = Vec::new();
        for (pi, p) in self.planes.iter().enumerate() {
            for &o in &p.offsets_x2 {
                flat.push((pi, o as f64));
            }
            flat.push((pi, p.width as f64));
            flat.push((pi, -(p.width as f64)));
        }
        let mut verts: Vec<Vec<f64>> = Vec::new();
        let n = flat.len();
        crate::linalg::for_each_subset(n, d, |subset| {
            // distinct plane classes only; parallel planes cannot meet
            for w in subset.windows(2) {
                if flat[w[0]].0 == flat[w[1]].0 {
                    return;
                }
            }
            let mut a = nalgebra::DMatrix::zeros(d, d);
            let mut b = nalgebra::DVector::zeros(d);
            for (r, &si) in subset.iter().enumerate() {
                let (pi, o) = flat[si];
                for c in 0..d {
                    a[(r, c)] = self.planes[pi].normal[c] as f64;
                }
                b[r] = o / 2.0;
            }
            let lu = a.lu();
            if let Some(sol) = lu.solve(&b) {
                if lu.determinant().abs() > 1e-9 {
                    let v: Vec<f64> = sol.iter().copied().collect();
                    let inside = self.planes.iter().all(|p| {
                        let dot2: f64 = 2.0
                            * p.normal
                                .iter()
                                .zip(&v)
                                .map(|(&nn, &y)| nn as f64 * y)
                                .sum::<f64>();
                        dot2.abs() <= p.width as f64 + 1e-7 * p.norm_len
                    });
                    if inside {
                        verts.push(v);
                    }
                }
            }
        });
        verts
    }
}

/// Probe directions into the cells around a vertex: angular-sector midpoints
/// in 2D (exhaustive), signed combinations of the local normals plus a
/// deterministic sphere covering in 3D.
fn local_directions(d: usize, normals: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if d == 2 {
        let mut angles: Vec<f64> = normals
            .iter()
            .flat_map(|n| {
                let t = f64::atan2(n[0], -n[1]); // tangent direction
                [t, t + std::f64::consts::PI]
            })
            .map(|t| t.rem_euclid(2.0 * std::f64::consts::PI))
            .collect();
        if angles.is_empty() {
            angles.push(0.0);
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let k = angles.len();
        (0..k)
            .map(|i| {
                let next = if i + 1 == k {
                    angles[0] + 2.0 * std::f64::consts::PI
                } else {
                    angles[i + 1]
                };
                let mid = (angles[i] + next) / 2.0;
                vec![mid.cos(), mid.sin()]
            })
            .collect()
    } else {
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        let q = normals.len().min(6);
        let mut c = vec![0i8; q];
        'outer: loop {
            let mut v = vec![0.0; d];
            for (i, &ci) in c.iter().enumerate() {
                for j in 0..d {
                    v[j] += ci as f64 * normals[i][j];
                }
            }
            let len: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > 1e-9 {
                dirs.push(v.iter().map(|x| x / len).collect());
            }
            for item in c.iter_mut() {
                *item += 1;
                if *item <= 1 {
                    continue 'outer;
                }
                *item = -1;
            }
            break;
        }
        // deterministic spherical covering
        let n = 48;
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        for i in 0..n {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            dirs.push(vec![r * phi.cos(), r * phi.sin(), z]);
        }
        dirs
    }
}
