//! Recursive evaluation by de Boor's recurrence, run in lattice coordinates.
//!
//! For a direction matrix with columns N and a particular solution t of
//! `N t = y`, the non-centered spline satisfies
//!
//! ```text
//! B_N(y) = 1/(m-d) · Σ_j [ t_j B_{N\j}(y) + (1 - t_j) B_{N\j}(y - N_j) ]
//! ```
//!
//! with the normalized box characteristic as base case. The centered spline
//! is `B` shifted by half the column sum. Every state visited is determined
//! by (removed columns, shifted columns), so the recursion is memoized over
//! those two bitmasks.
//!
//! The recurrence is unstable on knot planes. Arguments closer than 1e-9 to
//! any knot plane get a deterministic 1e-7 offset along a generic direction;
//! the proximity test is invariant under lattice shifts, so partition-of-unity
//! sums remain consistent term by term.

use std::collections::HashMap;

const NEAR_TOL: f64 = 1e-9;
const PERTURB: f64 = 1e-7;
// generic direction (1, 1/pi, 1/e, ...) used for the deterministic nudge
const GENERIC: [f64; 8] = [
    1.0,
    std::f64::consts::FRAC_1_PI,
    0.36787944117144233,
    std::f64::consts::FRAC_1_SQRT_2,
    0.5773502691896258,
    0.4472135954999579,
    0.3779644730092272,
    0.30151134457776363,
];

enum OffsetSet {
    /// Integer column dots: knot offsets lie on the half-integer grid
    /// (conservatively, both parities, which keeps the test shift-invariant).
    HalfIntegers,
    /// Explicit centered-spline offsets for real-valued columns.
    Explicit(Vec<f64>),
    /// Proximity checking disabled (too many columns to enumerate offsets).
    None,
}

struct ProximityPlane {
    normal: Vec<f64>,
    scale: f64,
    offsets: OffsetSet,
}

pub struct Evaluator {
    d: usize,
    m: usize,
    cols: Vec<Vec<f64>>,
    center: Vec<f64>,
    norm: f64,
    planes: Vec<ProximityPlane>,
}

impl Evaluator {
    /// Evaluator for integer lattice-coordinate columns; the base-case weight
    /// `|det G| / |det Ξ_S|` reduces to `1 / |det N_S|` in these coordinates.
    pub fn for_lattice_columns(cols: &[Vec<i64>]) -> Evaluator {
        let d = cols[0].len();
        let fcols: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| c.iter().map(|&x| x as f64).collect())
            .collect();
        let mut planes = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut dirs: Vec<Vec<i64>> = cols.iter().map(|c| crate::linalg::sign_canonical(c)).collect();
        dirs.sort();
        dirs.dedup();
        crate::linalg::for_each_subset(dirs.len(), d - 1, |subset| {
            let chosen: Vec<&[i64]> = subset.iter().map(|&i| dirs[i].as_slice()).collect();
            if let Some(n) = crate::linalg::primitive_canonical(&crate::linalg::generalized_cross(&chosen)) {
                if seen.insert(n.clone()) {
                    let scale = n.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
                    planes.push(ProximityPlane {
                        normal: n.iter().map(|&x| x as f64).collect(),
                        scale,
                        offsets: OffsetSet::HalfIntegers,
                    });
                }
            }
        });
        Self::assemble(fcols, 1.0, planes)
    }

    /// Evaluator for arbitrary real columns (used by the linear-map check);
    /// `norm` is the lattice normalization constant of the base case.
    pub fn for_raw_columns(cols: Vec<Vec<f64>>, norm: f64) -> Evaluator {
        let d = cols[0].len();
        let m = cols.len();
        let mut planes: Vec<ProximityPlane> = Vec::new();
        if d >= 1 && m <= 20 {
            let mut normals: Vec<Vec<f64>> = Vec::new();
            crate::linalg::for_each_subset(m, d - 1, |subset| {
                let chosen: Vec<&[f64]> = subset.iter().map(|&i| cols[i].as_slice()).collect();
                if let Some(n) = cross_f64(&chosen) {
                    if !normals
                        .iter()
                        .any(|e| e.iter().zip(&n).all(|(a, b)| (a - b).abs() < 1e-9))
                    {
                        normals.push(n);
                    }
                }
            });
            for n in normals {
                // centered-spline knot offsets: all half-sums of signed dots
                let dots: Vec<f64> = cols
                    .iter()
                    .map(|c| c.iter().zip(&n).map(|(a, b)| a * b).sum::<f64>())
                    .collect();
                let mut offs: Vec<f64> = vec![0.0];
                for &a in &dots {
                    if a.abs() < 1e-13 {
                        continue;
                    }
                    let mut next = Vec::with_capacity(offs.len() * 2);
                    for &o in &offs {
                        next.push(o + a / 2.0);
                        next.push(o - a / 2.0);
                    }
                    next.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    next.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
                    offs = next;
                    if offs.len() > 1 << 16 {
                        break;
                    }
                }
                let offsets = if offs.len() > 1 << 16 {
                    OffsetSet::None
                } else {
                    OffsetSet::Explicit(offs)
                };
                planes.push(ProximityPlane {
                    normal: n,
                    scale: 1.0,
                    offsets,
                });
            }
        }
        Self::assemble(cols, norm, planes)
    }

    fn assemble(cols: Vec<Vec<f64>>, norm: f64, planes: Vec<ProximityPlane>) -> Evaluator {
        let d = cols[0].len();
        let m = cols.len();
        assert!(m <= 30, "recursive evaluation supports at most 30 columns");
        let center: Vec<f64> = (0..d)
            .map(|i| cols.iter().map(|c| c[i]).sum::<f64>() / 2.0)
            .collect();
        Evaluator {
            d,
            m,
            cols,
            center,
            norm,
            planes,
        }
    }

    fn near_knot(&self, y: &[f64]) -> bool {
        for p in &self.planes {
            let dot: f64 = p.normal.iter().zip(y).map(|(a, b)| a * b).sum();
            match &p.offsets {
                OffsetSet::HalfIntegers => {
                    let t = 2.0 * dot;
                    if (t - t.round()).abs() < 2.0 * NEAR_TOL * p.scale {
                        return true;
                    }
                }
                OffsetSet::Explicit(offs) => {
                    let i = offs.partition_point(|&o| o < dot);
                    for j in [i.wrapping_sub(1), i] {
                        if let Some(&o) = offs.get(j) {
                            if (dot - o).abs() < NEAR_TOL * p.scale.max(1.0) {
                                return true;
                            }
                        }
                    }
                }
                OffsetSet::None => {}
            }
        }
        false
    }

    /// Value of the centered spline at `y` (same coordinate system as the
    /// columns).
    pub fn eval_centered(&self, y: &[f64]) -> f64 {
        let mut y = y.to_vec();
        let mut guard = 0;
        while guard < 3 && self.near_knot(&y) {
            // deterministic nudge off the knot planes
            let len: f64 = GENERIC[..self.d].iter().map(|u| u * u).sum::<f64>().sqrt();
            for i in 0..self.d {
                y[i] += PERTURB * GENERIC[i] / len;
            }
            guard += 1;
        }
        for i in 0..self.d {
            y[i] += self.center[i];
        }
        let mut memo: HashMap<u64, f64> = HashMap::with_capacity(64);
        // least-squares pinv per removed-column mask, shared across shifts
        let mut pinv: HashMap<u32, Option<Vec<f64>>> = HashMap::with_capacity(32);
        self.rec(0, 0, &y, &mut memo, &mut pinv)
    }

    fn rec(
        &self,
        removed: u32,
        shifts: u32,
        y0: &[f64],
        memo: &mut HashMap<u64, f64>,
        pinv: &mut HashMap<u32, Option<Vec<f64>>>,
    ) -> f64 {
        let key = (removed as u64) << 32 | shifts as u64;
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let d = self.d;
        let mut y = [0.0f64; 8];
        y[..d].copy_from_slice(y0);
        for j in 0..self.m {
            if shifts >> j & 1 == 1 {
                for i in 0..d {
                    y[i] -= self.cols[j][i];
                }
            }
        }
        let remaining: Vec<usize> = (0..self.m).filter(|&j| removed >> j & 1 == 0).collect();
        let k = remaining.len();
        let v = if k == d {
            self.base_case(&remaining, &y[..d])
        } else {
            let pv = pinv
                .entry(removed)
                .or_insert_with(|| self.pinv_rows(&remaining))
                .clone();
            match pv {
                None => 0.0, // remaining columns no longer span
                Some(pv) => {
                    let mut acc = 0.0;
                    for (pos, &j) in remaining.iter().enumerate() {
                        let mut tj = 0.0;
                        for r in 0..d {
                            tj += pv[pos * d + r] * y[r];
                        }
                        if tj != 0.0 {
                            acc += tj * self.rec(removed | 1 << j, shifts, y0, memo, pinv);
                        }
                        if tj != 1.0 {
                            acc += (1.0 - tj)
                                * self.rec(removed | 1 << j, shifts | 1 << j, y0, memo, pinv);
                        }
                    }
                    acc / (k - d) as f64
                }
            }
        };
        memo.insert(key, v);
        v
    }

    /// Normalized characteristic function of the (half-open) parallelepiped
    /// spanned by the last d columns: value norm/|det S| when S⁻¹y ∈ [0,1)^d.
    fn base_case(&self, idx: &[usize], y: &[f64]) -> f64 {
        let d = self.d;
        let mut a = [[0.0f64; 8]; 8];
        let mut b = [0.0f64; 8];
        for r in 0..d {
            for (c, &j) in idx.iter().enumerate() {
                a[r][c] = self.cols[j][r];
            }
            b[r] = y[r];
        }
        let det = gauss_solve(&mut a, &mut b, d);
        if det.abs() < 1e-12 {
            return 0.0;
        }
        for lam in b.iter().take(d) {
            if !(0.0..1.0).contains(lam) {
                return 0.0;
            }
        }
        self.norm / det.abs()
    }

    /// Row-major k×d pseudo-inverse Rᵀ(RRᵀ)⁻¹ of the remaining columns, so
    /// the particular solution of `R t = y` is a matrix-vector product.
    /// None when the columns have rank < d.
    fn pinv_rows(&self, idx: &[usize]) -> Option<Vec<f64>> {
        let d = self.d;
        let mut a = [[0.0f64; 8]; 8];
        for r in 0..d {
            for c in 0..d {
                let mut acc = 0.0;
                for &j in idx {
                    acc += self.cols[j][r] * self.cols[j][c];
                }
                a[r][c] = acc;
            }
        }
        // invert RRᵀ column by column
        let mut inv = [[0.0f64; 8]; 8];
        for c in 0..d {
            let mut a_copy = a;
            let mut e = [0.0f64; 8];
            e[c] = 1.0;
            let det = gauss_solve(&mut a_copy, &mut e, d);
            if det.abs() < 1e-9 {
                return None;
            }
            for r in 0..d {
                inv[r][c] = e[r];
            }
        }
        let mut out = Vec::with_capacity(idx.len() * d);
        for &j in idx {
            for c in 0..d {
                let mut acc = 0.0;
                for r in 0..d {
                    acc += self.cols[j][r] * inv[r][c];
                }
                out.push(acc);
            }
        }
        Some(out)
    }
}

/// In-place Gaussian elimination with partial pivoting for n ≤ 8; returns the
/// determinant and leaves the solution in `b`.
fn gauss_solve(a: &mut [[f64; 8]; 8], b: &mut [f64; 8], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-14 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col][c] * b[c];
        }
        b[col] = acc / a[col][col];
    }
    det
}

fn cross_f64(vecs: &[&[f64]]) -> Option<Vec<f64>> {
    let d = vecs[0].len();
    assert_eq!(vecs.len() + 1, d);
    let mut n = vec![0.0; d];
    for i in 0..d {
        // cofactor determinant with coordinate i removed
        let mut a = [[0.0f64; 8]; 8];
        let mut b = [0.0f64; 8];
        for (r, v) in vecs.iter().enumerate() {
            let mut cc = 0;
            for (j, &x) in v.iter().enumerate() {
                if j != i {
                    a[r][cc] = x;
                    cc += 1;
                }
            }
        }
        let det = gauss_solve(&mut a, &mut b, d - 1);
        n[i] = if i % 2 == 0 { det } else { -det };
    }
    let len: f64 = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len < 1e-12 {
        return None;
    }
    for x in n.iter_mut() {
        *x /= len;
    }
    // canonical sign
    if let Some(first) = n.iter().find(|x| x.abs() > 1e-9) {
        if *first < 0.0 {
            for x in n.iter_mut() {
                *x = -*x;
            }
        }
    }
    Some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_hat_values() {
        // directions {e1, e1} on Z^1 embedded as lattice columns in 1D is not
        // supported (d >= 2), so check the tensor hat on Z^2 instead.
        let ev = Evaluator::for_lattice_columns(&[vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]]);
        // M_c20(x, y) = hat(x) hat(y)
        let v = ev.eval_centered(&[0.25, -0.4]);
        assert!((v - 0.75 * 0.6).abs() < 1e-9, "{v}");
        let v = ev.eval_centered(&[0.0, 0.0]);
        assert!((v - 1.0).abs() < 1e-6, "{v}"); // on knot planes, perturbed
    }

    #[test]
    fn characteristic_box() {
        let ev = Evaluator::for_lattice_columns(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(ev.eval_centered(&[0.2, 0.3]), 1.0);
        assert_eq!(ev.eval_centered(&[0.75, 0.0]), 0.0);
    }

    #[test]
    fn knot_plane_nudge_is_finite() {
        let ev = Evaluator::for_lattice_columns(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]);
        // the origin lies on two knot lines of the ZP element
        let v = ev.eval_centered(&[0.0, 0.0]);
        assert!(v.is_finite() && v > 0.0);
    }
}
