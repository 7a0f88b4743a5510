//! Domain lattices, their symmetry groups and direction sets.
//!
//! A lattice is `G · Z^d` for a generator matrix `G` with full column rank.
//! The ambient dimension equals `d` except for the A-family, which is
//! generated inside the hyperplane `x_1 + ... + x_{d+1} = 0` of `R^{d+1}`.
//!
//! Exactness: the Gram matrix `GᵀG` is rational for every supported lattice
//! (the hexagonal `√3/2` squares away), so squared vector lengths, symmetry
//! checks and determinants are computed exactly in lattice coordinates. The
//! hexagonal generator itself is stored as floating point; this is the one
//! documented exception.

use crate::linalg::{rat, rat_int, sign_canonical, Rat, RatMat};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, OnceLock};

/// Highest direction-set shell supported on the five named lattices.
/// Beyond k = 4 a spherical shell may contain several direction sets
/// (on Z^2 this first happens at squared norm 25, where (5,0) and (4,3)
/// coincide), so no behavior is defined there.
pub const MAX_SHELL_NAMED: usize = 4;
/// Highest shell with a closed-form pattern for the general-d families.
pub const MAX_SHELL_FAMILY: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeName {
    Cc2,
    Hex,
    Cc3,
    Fcc,
    Bcc,
    /// Cartesian Z^d for d ≥ 4 (the 2D/3D cases keep their own names).
    Cc,
    An,
    AnDual,
    Dn,
    DnDual,
}

impl LatticeName {
    pub fn is_family(self) -> bool {
        matches!(
            self,
            LatticeName::An | LatticeName::AnDual | LatticeName::Dn | LatticeName::DnDual
        )
    }

    fn family_str(self) -> &'static str {
        match self {
            LatticeName::Cc2 => "cc2",
            LatticeName::Hex => "hex",
            LatticeName::Cc3 => "cc3",
            LatticeName::Fcc => "fcc",
            LatticeName::Bcc => "bcc",
            LatticeName::Cc => "cc",
            LatticeName::An => "An",
            LatticeName::AnDual => "An*",
            LatticeName::Dn => "Dn",
            LatticeName::DnDual => "Dn*",
        }
    }

    /// One-letter tag used in box-spline names (`Mc21`, `Mb110`, ...).
    pub fn spline_letter(self) -> Option<char> {
        match self {
            LatticeName::Cc2 | LatticeName::Cc3 => Some('c'),
            LatticeName::Hex => Some('h'),
            LatticeName::Fcc => Some('f'),
            LatticeName::Bcc => Some('b'),
            _ => None,
        }
    }

    fn needs_dim_suffix(self) -> bool {
        self.is_family() || matches!(self, LatticeName::Cc)
    }
}

/// A shell of lattice points sharing one squared length (both signs listed).
#[derive(Clone, Debug)]
pub struct Shell {
    pub norm2: f64,
    pub norm2_exact: Rat,
    /// Lattice coordinates, sorted lexicographically.
    pub points: Vec<Vec<i64>>,
}

/// A direction set `D^k`: one shell with exactly one of `{v, -v}` retained.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    pub k: usize,
    /// Lattice coordinates of the retained representatives, sorted.
    pub vectors: Vec<Vec<i64>>,
    /// Common squared length of the (true, unscaled) lattice vectors.
    pub norm2: f64,
    pub norm2_exact: Rat,
    /// Scale that turns a true lattice vector into the integer pattern
    /// used by the general-d tables: `d+1` for An*, `2` for Dn*, else 1.
    pub pattern_scale: i64,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// One orthogonal lattice symmetry, stored exactly in lattice coordinates.
#[derive(Clone, Debug)]
pub struct GroupElement {
    /// d×d integer matrix acting on lattice coordinates (row-major).
    pub m: Vec<Vec<i64>>,
    /// The same map as an ambient orthogonal matrix `L = G M G⁻¹`.
    pub l: DMatrix<f64>,
}

impl GroupElement {
    pub fn apply_lattice(&self, n: &[i64]) -> Vec<i64> {
        let d = self.m.len();
        (0..d)
            .map(|r| (0..d).map(|c| self.m[r][c] * n[c]).sum())
            .collect()
    }

    pub fn apply_ambient(&self, x: &[f64]) -> Vec<f64> {
        let a = self.l.nrows();
        (0..a)
            .map(|r| (0..a).map(|c| self.l[(r, c)] * x[c]).sum())
            .collect()
    }
}

/// The full orthogonal symmetry group of a lattice.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    pub elements: Vec<GroupElement>,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

pub struct Lattice {
    name: LatticeName,
    d: usize,
    a: usize,
    g: DMatrix<f64>,
    /// Exact generator; `None` only for the hexagonal lattice.
    g_rat: Option<RatMat>,
    gram: RatMat,
    gram_inv: RatMat,
    det_gram: Rat,
    det_g: f64,
    g_pinv: DMatrix<f64>,
    lambda_min: f64,
    sym: OnceLock<Result<Arc<SymmetryGroup>>>,
    dirsets: [OnceLock<Arc<DirectionSet>>; MAX_SHELL_NAMED],
}

impl std::fmt::Debug for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lattice({})", self.spec_string())
    }
}

impl Lattice {
    /// Construct one of the built-in lattices. The five named lattices fix
    /// their dimension (`d` may be omitted or must agree); the general-d
    /// families require an explicit dimension.
    pub fn builtin(name: &str, d: Option<usize>) -> Result<Arc<Lattice>> {
        if name == "cc" {
            return match d {
                Some(2) => Self::builtin("cc2", None),
                Some(3) => Self::builtin("cc3", None),
                Some(d) if (4..=12).contains(&d) => Ok(Arc::new(Self::build(LatticeName::Cc, d))),
                Some(d) => Err(Error::InvalidDimension {
                    family: "cc".into(),
                    d,
                }),
                None => Err(Error::Parse(
                    "lattice family `cc` needs a dimension, e.g. `cc:4`".into(),
                )),
            };
        }
        let (kind, fixed_d) = match name {
            "cc2" => (LatticeName::Cc2, Some(2)),
            "hex" => (LatticeName::Hex, Some(2)),
            "cc3" => (LatticeName::Cc3, Some(3)),
            "fcc" => (LatticeName::Fcc, Some(3)),
            "bcc" => (LatticeName::Bcc, Some(3)),
            "An" | "an" => (LatticeName::An, None),
            "An*" | "an*" => (LatticeName::AnDual, None),
            "Dn" | "dn" => (LatticeName::Dn, None),
            "Dn*" | "dn*" => (LatticeName::DnDual, None),
            other => return Err(Error::UnknownLattice(other.to_string())),
        };
        let d = match (fixed_d, d) {
            (Some(fd), None) => fd,
            (Some(fd), Some(d)) if d == fd => fd,
            (Some(_), Some(d)) => {
                return Err(Error::InvalidDimension {
                    family: name.to_string(),
                    d,
                })
            }
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::Parse(format!(
                    "lattice family `{name}` needs a dimension, e.g. `{name}:4`"
                )))
            }
        };
        let min_d = match kind {
            LatticeName::Dn => 3,
            _ => 2,
        };
        if d < min_d || d > 12 {
            return Err(Error::InvalidDimension {
                family: name.to_string(),
                d,
            });
        }
        Ok(Arc::new(Self::build(kind, d)))
    }

    /// Parse a lattice spec string `<name>[:d]`, e.g. `bcc` or `Dn*:4`.
    pub fn parse_spec(spec: &str) -> Result<Arc<Lattice>> {
        let (name, d) = match spec.split_once(':') {
            None => (spec, None),
            Some((n, ds)) => {
                let d: usize = ds
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dimension `{ds}` in `{spec}`")))?;
                (n, Some(d))
            }
        };
        Self::builtin(name, d)
    }

    fn build(kind: LatticeName, d: usize) -> Lattice {
        let g_rat: Option<RatMat> = match kind {
            LatticeName::Cc2 | LatticeName::Cc3 | LatticeName::Cc => Some(RatMat::identity(d)),
            LatticeName::Hex => None,
            LatticeName::Fcc => Some(RatMat::from_fn(3, 3, |r, c| {
                rat_int(if r == c { 0 } else { 1 })
            })),
            LatticeName::Bcc => Some(RatMat::from_fn(3, 3, |r, c| {
                rat_int(if r == c { -1 } else { 1 })
            })),
            LatticeName::An => Some(RatMat::from_fn(d + 1, d, |r, c| {
                rat_int(if r == c {
                    -1
                } else if r == c + 1 {
                    1
                } else {
                    0
                })
            })),
            LatticeName::AnDual => Some(RatMat::from_fn(d + 1, d, |r, c| {
                if r == d {
                    rat(-1, (d + 1) as i64)
                } else if r == c {
                    rat(d as i64, (d + 1) as i64)
                } else {
                    rat(-1, (d + 1) as i64)
                }
            })),
            LatticeName::Dn => Some(RatMat::from_fn(d, d, |r, c| {
                rat_int(if c == 0 {
                    if r <= 1 {
                        -1
                    } else {
                        0
                    }
                } else if r + 1 == c {
                    1
                } else if r == c {
                    -1
                } else {
                    0
                })
            })),
            LatticeName::DnDual => Some(RatMat::from_fn(d, d, |r, c| {
                if c == d - 1 {
                    rat(1, 2)
                } else if r == c {
                    rat_int(1)
                } else {
                    rat_int(0)
                }
            })),
        };
        let a = match kind {
            LatticeName::An | LatticeName::AnDual => d + 1,
            _ => d,
        };
        let (g, gram) = match &g_rat {
            Some(gr) => {
                let g = gr.to_f64();
                let gram = gr.transpose().mul(gr);
                (g, gram)
            }
            None => {
                // hexagonal: G = 1/2 [[1, 1], [-√3, √3]]
                let s = 3.0_f64.sqrt() / 2.0;
                let g = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, -s, s]);
                // exact Gram: columns are unit length at 120 degrees
                let gram = RatMat::from_fn(2, 2, |r, c| if r == c { rat_int(1) } else { rat(-1, 2) });
                (g, gram)
            }
        };
        let gram_inv = gram.inverse().expect("generator has full column rank");
        let det_gram = gram.det();
        let det_g = crate::linalg::rat_to_f64(&det_gram).sqrt();
        let gtg = g.transpose() * &g;
        let g_pinv = gtg
            .clone()
            .try_inverse()
            .expect("generator has full column rank")
            * g.transpose();
        let lambda_min = gtg
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        Lattice {
            name: kind,
            d,
            a,
            g,
            g_rat,
            gram,
            gram_inv,
            det_gram,
            det_g,
            g_pinv,
            lambda_min,
            sym: OnceLock::new(),
            dirsets: Default::default(),
        }
    }

    pub fn name(&self) -> LatticeName {
        self.name
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Ambient dimension (`dim + 1` for the A-family).
    pub fn ambient_dim(&self) -> usize {
        self.a
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn generator_exact(&self) -> Option<&RatMat> {
        self.g_rat.as_ref()
    }

    pub fn gram(&self) -> &RatMat {
        &self.gram
    }

    pub fn gram_inv(&self) -> &RatMat {
        &self.gram_inv
    }

    /// |det G| for square generators, sqrt(det GᵀG) otherwise.
    pub fn det_g(&self) -> f64 {
        self.det_g
    }

    pub fn det_gram_exact(&self) -> &Rat {
        &self.det_gram
    }

    pub fn spec_string(&self) -> String {
        if self.name.needs_dim_suffix() {
            format!("{}:{}", self.name.family_str(), self.d)
        } else {
            self.name.family_str().to_string()
        }
    }

    /// Ambient coordinates of the lattice point with integer coordinates `n`.
    pub fn to_ambient(&self, n: &[i64]) -> Vec<f64> {
        (0..self.a)
            .map(|r| (0..self.d).map(|c| self.g[(r, c)] * n[c] as f64).sum())
            .collect()
    }

    /// Exact ambient coordinates (None for the hexagonal lattice).
    pub fn to_ambient_exact(&self, n: &[i64]) -> Option<Vec<Rat>> {
        let gr = self.g_rat.as_ref()?;
        Some(
            (0..self.a)
                .map(|r| {
                    let mut acc = Rat::zero();
                    for c in 0..self.d {
                        acc += gr.at(r, c) * rat_int(n[c]);
                    }
                    acc
                })
                .collect(),
        )
    }

    /// Real lattice coordinates of an ambient point (least-squares for the
    /// A-family, where off-hyperplane components are projected out).
    pub fn to_lattice(&self, x: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|r| (0..self.a).map(|c| self.g_pinv[(r, c)] * x[c]).sum())
            .collect()
    }

    /// Exact squared ambient length of the lattice point `n`.
    pub fn norm2_exact(&self, n: &[i64]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.d {
            for j in 0..self.d {
                if n[i] != 0 && n[j] != 0 {
                    acc += self.gram.at(i, j) * rat_int(n[i] * n[j]);
                }
            }
        }
        acc
    }

    /// All lattice points with `0 < |v|² ≤ max_norm2`, grouped by squared
    /// length. Points carry both signs; direction sets reduce them.
    pub fn shells(&self, max_norm2: f64) -> Vec<Shell> {
        let bound = (max_norm2 / self.lambda_min).sqrt().floor() as i64 + 1;
        let max_exact = Rat::from_float(max_norm2 + 1e-9).unwrap();
        let mut by_norm: BTreeMap<Rat, Vec<Vec<i64>>> = BTreeMap::new();
        let mut n = vec![-bound; self.d];
        'outer: loop {
            if n.iter().any(|&x| x != 0) {
                let norm = self.norm2_exact(&n);
                if norm.is_positive() && norm <= max_exact {
                    by_norm.entry(norm).or_default().push(n.clone());
                }
            }
            // odometer increment
            for i in 0..self.d {
                n[i] += 1;
                if n[i] <= bound {
                    continue 'outer;
                }
                n[i] = -bound;
            }
            break;
        }
        by_norm
            .into_iter()
            .map(|(norm2_exact, mut points)| {
                points.sort();
                Shell {
                    norm2: crate::linalg::rat_to_f64(&norm2_exact),
                    norm2_exact,
                    points,
                }
            })
            .collect()
    }

    /// The k-th direction set. Shell-based for the five named lattices
    /// (k ≤ 4); closed-form patterns for the general-d families (k ≤ 2),
    /// with the An* patterns scaled by d+1 and the Dn* patterns by 2.
    pub fn direction_set(self: &Arc<Self>, k: usize) -> Result<Arc<DirectionSet>> {
        let max = if self.name.is_family() {
            MAX_SHELL_FAMILY
        } else {
            MAX_SHELL_NAMED
        };
        if k < 1 || k > max {
            return Err(Error::UnsupportedShell {
                lattice: self.spec_string(),
                k,
                max,
            });
        }
        if let Some(ds) = self.dirsets[k - 1].get() {
            return Ok(ds.clone());
        }
        let ds = Arc::new(if self.name.is_family() {
            self.family_direction_set(k)?
        } else {
            self.shell_direction_set(k)
        });
        let _ = self.dirsets[k - 1].set(ds.clone());
        Ok(self.dirsets[k - 1].get().unwrap().clone())
    }

    fn shell_direction_set(&self, k: usize) -> DirectionSet {
        let mut bound = 4.0 * k as f64 * crate::linalg::rat_to_f64(self.gram.at(0, 0)).max(1.0);
        loop {
            let shells = self.shells(bound);
            if shells.len() >= k {
                let shell = &shells[k - 1];
                let mut set: Vec<Vec<i64>> = shell
                    .points
                    .iter()
                    .map(|p| sign_canonical(p))
                    .collect::<HashSet<_>>()
                    .into_iter()
                    .collect();
                set.sort();
                return DirectionSet {
                    k,
                    vectors: set,
                    norm2: shell.norm2,
                    norm2_exact: shell.norm2_exact.clone(),
                    pattern_scale: 1,
                };
            }
            bound *= 2.0;
        }
    }

    fn family_direction_set(&self, k: usize) -> Result<DirectionSet> {
        let d = self.d;
        let scale: i64 = match self.name {
            LatticeName::AnDual => (d + 1) as i64,
            LatticeName::DnDual => 2,
            _ => 1,
        };
        let patterns: Vec<Pattern> = match (self.name, k, d) {
            // Cartesian handled by shells; only families reach here.
            (LatticeName::An, 1, 2) => vec![Pattern::fixed(&[1, -1, 0])],
            (LatticeName::An, 1, _) => vec![Pattern::fixed(&pad(&[1, -1], d + 1))],
            (LatticeName::An, 2, 2) => vec![Pattern::fixed_pm(&[2, -1, -1])],
            // two +1s and two -1s, remaining d-3 ambient entries zero
            (LatticeName::An, 2, _) => vec![Pattern::fixed(&pad(&[1, 1, -1, -1], d + 1))],
            (LatticeName::AnDual, 1, _) => {
                let mut e = vec![-1i64; d + 1];
                e[0] = d as i64;
                vec![Pattern::fixed_pm(&e)]
            }
            (LatticeName::AnDual, 2, _) => {
                let mut e = vec![-2i64; d + 1];
                e[0] = (d - 1) as i64;
                e[1] = (d - 1) as i64;
                vec![Pattern::fixed_pm(&e)]
            }
            (LatticeName::Dn, 1, 3) => vec![Pattern::signed(&[1, 1, 0])],
            (LatticeName::Dn, 2, 3) => vec![Pattern::signed(&[2, 0, 0])],
            (LatticeName::Dn, 1, _) => vec![Pattern::signed(&pad(&[1, 1], d))],
            (LatticeName::Dn, 2, _) => vec![
                Pattern::signed(&pad(&[2], d)),
                Pattern::signed(&pad(&[1, 1, 1, 1], d)),
            ],
            (LatticeName::DnDual, 1, 2..=3) => vec![Pattern::signed(&vec![1; d])],
            (LatticeName::DnDual, 2, 2..=3) => vec![Pattern::signed(&pad(&[2], d))],
            (LatticeName::DnDual, 1, 4) => {
                vec![Pattern::signed(&[1; 4]), Pattern::signed(&pad(&[2], 4))]
            }
            (LatticeName::DnDual, 2, 4) => vec![Pattern::signed(&pad(&[2, 2], 4))],
            (LatticeName::DnDual, 1, 5..=7) => vec![Pattern::signed(&pad(&[2], d))],
            (LatticeName::DnDual, 2, 5..=7) => vec![Pattern::signed(&vec![1; d])],
            (LatticeName::DnDual, 1, 8) => vec![Pattern::signed(&pad(&[2], 8))],
            (LatticeName::DnDual, 2, 8) => vec![
                Pattern::signed(&[1; 8]),
                Pattern::signed(&pad(&[2, 2], 8)),
            ],
            (LatticeName::DnDual, 1, _) => vec![Pattern::signed(&pad(&[2], d))],
            (LatticeName::DnDual, 2, _) => vec![Pattern::signed(&pad(&[2, 2], d))],
            _ => unreachable!("family shells validated by direction_set"),
        };
        let mut ambient: HashSet<Vec<i64>> = HashSet::new();
        for p in &patterns {
            for v in p.orbit() {
                ambient.insert(sign_canonical(&v));
            }
        }
        let mut vectors: Vec<Vec<i64>> = ambient
            .into_iter()
            .map(|v| {
                self.pattern_to_lattice(&v, scale).ok_or_else(|| {
                    Error::Numerical(format!(
                        "pattern vector {v:?} is not {scale} x a lattice point of {}",
                        self.spec_string()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(|n| sign_canonical(&n))
            .collect();
        vectors.sort();
        vectors.dedup();
        let norm2_exact = self.norm2_exact(&vectors[0]);
        for v in &vectors[1..] {
            debug_assert_eq!(self.norm2_exact(v), norm2_exact);
        }
        Ok(DirectionSet {
            k,
            norm2: crate::linalg::rat_to_f64(&norm2_exact),
            norm2_exact,
            vectors,
            pattern_scale: scale,
        })
    }

    /// Exact lattice coordinates of `ambient/scale`, if that is a lattice point.
    fn pattern_to_lattice(&self, ambient: &[i64], scale: i64) -> Option<Vec<i64>> {
        let gr = self.g_rat.as_ref()?;
        // n = (GᵀG)⁻¹ Gᵀ v / scale
        let gt = gr.transpose();
        let mut rhs = Vec::with_capacity(self.d);
        for r in 0..self.d {
            let mut acc = Rat::zero();
            for c in 0..self.a {
                acc += gt.at(r, c) * rat_int(ambient[c]);
            }
            rhs.push(acc / rat_int(scale));
        }
        let mut n = Vec::with_capacity(self.d);
        for r in 0..self.d {
            let mut acc = Rat::zero();
            for c in 0..self.d {
                acc += self.gram_inv.at(r, c) * &rhs[c];
            }
            if !acc.is_integer() {
                return None;
            }
            n.push(acc.to_integer().to_i64()?);
        }
        // verify G n == v / scale exactly
        let back = self.to_ambient_exact(&n)?;
        for (b, &v) in back.iter().zip(ambient) {
            if b * rat_int(scale) != rat_int(v) {
                return None;
            }
        }
        Some(n)
    }

    /// The full orthogonal symmetry group. Supported for the five named
    /// lattices; the general-d families are out of scope.
    pub fn symmetry_group(self: &Arc<Self>) -> Result<Arc<SymmetryGroup>> {
        match self.sym.get_or_init(|| self.compute_symmetry_group()) {
            Ok(g) => Ok(g.clone()),
            Err(e) => Err(clone_error(e)),
        }
    }

    fn compute_symmetry_group(&self) -> Result<Arc<SymmetryGroup>> {
        if self.name.is_family() || self.d > 3 {
            return Err(Error::Unsupported(format!(
                "symmetry group enumeration is only implemented for the five named lattices, not {}",
                self.spec_string()
            )));
        }
        let d = self.d;
        // integer-scaled Gram for exact orthogonality tests
        let mut den: BigInt = BigInt::one();
        for r in 0..d {
            for c in 0..d {
                den = num::integer::lcm(den.clone(), self.gram.at(r, c).denom().clone());
            }
        }
        let gram_scaled: Vec<Vec<i128>> = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let v = self.gram.at(r, c) * Rat::from(den.clone());
                        v.to_integer().to_i128().expect("small gram")
                    })
                    .collect()
            })
            .collect();
        // candidate images of generator column i: lattice points of equal norm
        let mut candidates: Vec<Vec<Vec<i64>>> = Vec::with_capacity(d);
        for i in 0..d {
            let norm = self.gram.at(i, i).clone();
            let bound = crate::linalg::rat_to_f64(&norm) + 1e-9;
            let shells = self.shells(bound);
            let shell = shells
                .iter()
                .find(|s| s.norm2_exact == norm)
                .expect("generator column lies in its own shell");
            candidates.push(shell.points.clone());
        }
        let preserves_gram = |m: &[Vec<i64>]| -> bool {
            // columns of the candidate map; need MᵀSM == S with S = scaled Gram
            for r in 0..d {
                for c in r..d {
                    let mut acc: i128 = 0;
                    for i in 0..d {
                        for j in 0..d {
                            let s = gram_scaled[i][j];
                            if s != 0 {
                                acc += m[r][i] as i128 * s * m[c][j] as i128;
                            }
                        }
                    }
                    if acc != gram_scaled[r][c] {
                        return false;
                    }
                }
            }
            true
        };
        let mut elements: Vec<Vec<Vec<i64>>> = Vec::new();
        let mut pick = vec![0usize; d];
        'outer: loop {
            let cols: Vec<Vec<i64>> = (0..d).map(|i| candidates[i][pick[i]].clone()).collect();
            if preserves_gram(&cols) {
                elements.push(cols);
            }
            for i in 0..d {
                pick[i] += 1;
                if pick[i] < candidates[i].len() {
                    continue 'outer;
                }
                pick[i] = 0;
            }
            break;
        }
        // closure and sanity checks (the candidate search is bounded, so an
        // incomplete result must abort rather than pass silently)
        let as_rows = |cols: &[Vec<i64>]| -> Vec<Vec<i64>> {
            (0..d)
                .map(|r| (0..d).map(|c| cols[c][r]).collect())
                .collect()
        };
        let rows: Vec<Vec<Vec<i64>>> = elements.iter().map(|e| as_rows(e)).collect();
        let index: HashSet<Vec<i64>> = rows.iter().map(|m| flatten(m)).collect();
        let ident: Vec<Vec<i64>> = (0..d)
            .map(|r| (0..d).map(|c| i64::from(r == c)).collect())
            .collect();
        let neg: Vec<Vec<i64>> = (0..d)
            .map(|r| (0..d).map(|c| -i64::from(r == c)).collect())
            .collect();
        if !index.contains(&flatten(&ident)) || !index.contains(&flatten(&neg)) {
            return Err(Error::Numerical(
                "symmetry group search lost identity or central inversion".into(),
            ));
        }
        for x in &rows {
            for y in &rows {
                let prod = mat_mul_i64(x, y);
                if !index.contains(&flatten(&prod)) {
                    return Err(Error::Numerical(
                        "symmetry group candidates are not closed under composition".into(),
                    ));
                }
            }
        }
        let g_inv = self
            .g
            .clone()
            .try_inverse()
            .expect("named lattices have square generators");
        let elements: Vec<GroupElement> = rows
            .into_iter()
            .map(|m| {
                let mf = DMatrix::from_fn(d, d, |r, c| m[r][c] as f64);
                let l = &self.g * mf * &g_inv;
                let err = (l.transpose() * &l - DMatrix::identity(d, d)).norm();
                assert!(err < 1e-12, "group element not orthogonal: {err}");
                GroupElement { m, l }
            })
            .collect();
        Ok(Arc::new(SymmetryGroup { elements }))
    }
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::Unsupported(s) => Error::Unsupported(s.clone()),
        Error::Numerical(s) => Error::Numerical(s.clone()),
        other => Error::Numerical(format!("{other}")),
    }
}

fn flatten(m: &[Vec<i64>]) -> Vec<i64> {
    m.iter().flatten().copied().collect()
}

fn mat_mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum())
                .collect()
        })
        .collect()
}

fn pad(head: &[i64], len: usize) -> Vec<i64> {
    let mut v = head.to_vec();
    assert!(v.len() <= len);
    v.resize(len, 0);
    v
}

/// A `{π(...)}` pattern from the direction-set tables: permutations of a
/// multiset of entries, optionally with independent signs on the nonzero
/// entries or a global ± orbit.
struct Pattern {
    entries: Vec<i64>,
    independent_signs: bool,
    global_pm: bool,
}

impl Pattern {
    fn signed(entries: &[i64]) -> Pattern {
        Pattern {
            entries: entries.to_vec(),
            independent_signs: true,
            global_pm: false,
        }
    }

    fn fixed(entries: &[i64]) -> Pattern {
        Pattern {
            entries: entries.to_vec(),
            independent_signs: false,
            global_pm: false,
        }
    }

    fn fixed_pm(entries: &[i64]) -> Pattern {
        Pattern {
            entries: entries.to_vec(),
            independent_signs: false,
            global_pm: true,
        }
    }

    fn orbit(&self) -> HashSet<Vec<i64>> {
        let mut perms: HashSet<Vec<i64>> = HashSet::new();
        let mut sorted = self.entries.clone();
        sorted.sort();
        permute_multiset(&mut sorted, 0, &mut perms);
        let mut out: HashSet<Vec<i64>> = HashSet::new();
        for p in perms {
            if self.independent_signs {
                let nz: Vec<usize> = (0..p.len()).filter(|&i| p[i] != 0).collect();
                for mask in 0..(1u32 << nz.len()) {
                    let mut v = p.clone();
                    for (bit, &i) in nz.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            v[i] = -v[i];
                        }
                    }
                    out.insert(v);
                }
            } else {
                if self.global_pm {
                    out.insert(p.iter().map(|&x| -x).collect());
                }
                out.insert(p);
            }
        }
        out
    }
}

fn permute_multiset(items: &mut Vec<i64>, start: usize, out: &mut HashSet<Vec<i64>>) {
    if start == items.len() {
        out.insert(items.clone());
        return;
    }
    let mut seen = HashSet::new();
    for i in start..items.len() {
        if seen.insert(items[i]) {
            items.swap(start, i);
            permute_multiset(items, start + 1, out);
            items.swap(start, i);
        }
    }
}
