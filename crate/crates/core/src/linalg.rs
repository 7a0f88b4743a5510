//! Exact integer and rational linear algebra for small matrices.
//!
//! Everything here operates on lattice coordinates, where direction vectors
//! are integers and Gram matrices are rational, so determinant and rank
//! statements are exact.

use num::{BigInt, BigRational, One, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Determinant of a square integer matrix (row-major) by fraction-free
/// Bareiss elimination.
pub fn det_int(mat: &[Vec<i128>]) -> i128 {
    let n = mat.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = mat.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Rank of a set of integer column vectors.
pub fn int_rank(cols: &[Vec<i64>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let d = cols[0].len();
    // work on the transpose: rows = vectors
    let mut rows: Vec<Vec<i128>> = cols
        .iter()
        .map(|c| c.iter().map(|&x| x as i128).collect())
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let (pivot_row, rest) = {
            let (a, b) = rows.split_at_mut(rank + 1);
            (&a[rank], b)
        };
        let pv = pivot_row[col];
        for r in rest.iter_mut() {
            if r[col] != 0 {
                let f = r[col];
                for j in 0..d {
                    r[j] = r[j] * pv - pivot_row[j] * f;
                }
                let g = r.iter().fold(0i128, |acc, &x| gcd_i128(acc, x));
                if g > 1 {
                    for x in r.iter_mut() {
                        *x /= g;
                    }
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Generalized cross product of d-1 integer vectors in Z^d: the vector of
/// signed cofactor determinants, orthogonal to all inputs. Zero iff the
/// inputs are linearly dependent.
pub fn generalized_cross(vecs: &[&[i64]]) -> Vec<i128> {
    let d = vecs.first().map_or(0, |v| v.len());
    assert_eq!(vecs.len() + 1, d, "need d-1 vectors in Z^d");
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        // minor obtained by deleting coordinate i
        let minor: Vec<Vec<i128>> = vecs
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &x)| x as i128)
                    .collect()
            })
            .collect();
        let c = det_int(&minor);
        out.push(if i % 2 == 0 { c } else { -c });
    }
    out
}

/// Reduce an integer vector to its primitive canonical representative:
/// divided by the gcd, sign chosen so the first nonzero entry is positive.
pub fn primitive_canonical(v: &[i128]) -> Option<Vec<i64>> {
    let g = v.iter().fold(0i128, |acc, &x| gcd_i128(acc, x));
    if g == 0 {
        return None;
    }
    let mut out: Vec<i64> = v.iter().map(|&x| (x / g) as i64).collect();
    if let Some(first) = out.iter().find(|&&x| x != 0) {
        if *first < 0 {
            for x in out.iter_mut() {
                *x = -*x;
            }
        }
    }
    Some(out)
}

/// Keep the lexicographically larger of {v, -v}.
pub fn sign_canonical(v: &[i64]) -> Vec<i64> {
    let neg: Vec<i64> = v.iter().map(|&x| -x).collect();
    if v >= &neg[..] {
        v.to_vec()
    } else {
        neg
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RatMat { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { Rat::one() } else { Rat::zero() })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Rat::zero())
    }

    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> RatMat {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn mul(&self, rhs: &RatMat) -> RatMat {
        assert_eq!(self.cols, rhs.rows);
        Self::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Rat::zero();
            for k in 0..self.cols {
                acc += self.at(r, k) * rhs.at(k, c);
            }
            acc
        })
    }

    pub fn scale(&self, s: &Rat) -> RatMat {
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c) * s)
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rat::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !a.at(r, k).is_zero()) else {
                return Rat::zero();
            };
            if p != k {
                for c in 0..n {
                    let tmp = a.at(p, c).clone();
                    a.set(p, c, a.at(k, c).clone());
                    a.set(k, c, tmp);
                }
                det = -det;
            }
            let pivot = a.at(k, k).clone();
            det *= pivot.clone();
            for r in k + 1..n {
                let f = a.at(r, k) / &pivot;
                for c in k..n {
                    let v = a.at(r, c) - &f * a.at(k, c);
                    a.set(r, c, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMat::identity(n);
        for k in 0..n {
            let p = (k..n).find(|&r| !a.at(r, k).is_zero())?;
            if p != k {
                for c in 0..n {
                    let tmp = a.at(p, c).clone();
                    a.set(p, c, a.at(k, c).clone());
                    a.set(k, c, tmp);
                    let tmp = inv.at(p, c).clone();
                    inv.set(p, c, inv.at(k, c).clone());
                    inv.set(k, c, tmp);
                }
            }
            let pivot = a.at(k, k).clone();
            for c in 0..n {
                a.set(k, c, a.at(k, c) / &pivot);
                inv.set(k, c, inv.at(k, c) / &pivot);
            }
            for r in 0..n {
                if r != k && !a.at(r, k).is_zero() {
                    let f = a.at(r, k).clone();
                    for c in 0..n {
                        let va = a.at(r, c) - &f * a.at(k, c);
                        a.set(r, c, va);
                        let vi = inv.at(r, c) - &f * inv.at(k, c);
                        inv.set(r, c, vi);
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| rat_to_f64(self.at(r, c)))
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // exact for everything this crate produces (small numerators/denominators)
    bigint_to_f64(num) / bigint_to_f64(den)
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    use num::ToPrimitive;
    b.to_f64().unwrap_or(f64::NAN)
}

/// Pairwise (cascade) summation: deterministic and more accurate than a
/// running sum for long series.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// All unordered k-subsets of 0..n, emitted in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
