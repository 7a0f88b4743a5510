//! Direction matrices and the analytic properties derived from them.
//!
//! A box spline is determined by an integer matrix `N` of lattice coordinates
//! whose columns select direction vectors; the ambient direction matrix is
//! `Ξ = G·N`. Degree, smoothness, support volume, stencil size, unimodularity
//! and symmetry all reduce to exact integer computations on `N`.

use crate::lattice::{DirectionSet, Lattice};
use crate::linalg::{
    det_int, for_each_subset, generalized_cross, int_rank, primitive_canonical, sign_canonical,
};
use crate::{Error, Result};
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock};

/// A direction matrix: repetition counts over direction sets, expanded into
/// explicit columns in lattice coordinates.
#[derive(Clone)]
pub struct DirectionMatrix {
    lattice: Arc<Lattice>,
    counts: Vec<u32>,
    cols: Vec<Vec<i64>>,
    name: String,
    support: OnceLock<Arc<SupportData>>,
    evaluator: OnceLock<Arc<crate::eval::Evaluator>>,
}

impl std::fmt::Debug for DirectionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DirectionMatrix({})", self.name)
    }
}

/// Zonotope support described as an intersection of slabs
/// `|⟨n, y⟩| ≤ width/2` over all hyperplane normals spanned by d-1 columns.
/// Everything is integer: `dots[j] = ⟨n, col_j⟩` and `width = Σ_j |dots[j]|`.
pub struct SupportData {
    pub normals: Vec<NormalClass>,
    /// Per-coordinate half-width of the support in lattice coordinates.
    pub half_width: Vec<f64>,
}

pub struct NormalClass {
    pub normal: Vec<i64>,
    pub dots: Vec<i64>,
    /// Σ |dots| = twice the support function of the zonotope at `normal`.
    pub width: i64,
}

impl DirectionMatrix {
    /// Build from per-shell repetition counts, e.g. `[1, 1]` on `cc2` for the
    /// Zwart-Powell element. Columns are ordered by (shell, canonical vector
    /// order) and the name is rendered as `M<letter><counts>`.
    pub fn from_counts(lattice: Arc<Lattice>, counts: &[u32]) -> Result<DirectionMatrix> {
        if counts.is_empty() || counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptySelection);
        }
        let mut cols: Vec<Vec<i64>> = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let ds: Arc<DirectionSet> = lattice.direction_set(i + 1)?;
            for _ in 0..c {
                cols.extend(ds.vectors.iter().cloned());
            }
        }
        let name = match lattice.name().spline_letter() {
            Some(letter) => {
                let digits: String = counts.iter().map(|c| c.to_string()).collect();
                format!("M{letter}{digits}")
            }
            None => {
                let digits: String = counts.iter().map(|c| c.to_string()).collect();
                format!("M[{}]{digits}", lattice.spec_string())
            }
        };
        Self::new(lattice, counts.to_vec(), cols, name)
    }

    /// Build from explicit lattice-coordinate columns. Used for the
    /// asymmetric counterexamples and for transformed direction sets.
    pub fn from_lattice_columns(
        lattice: Arc<Lattice>,
        cols: Vec<Vec<i64>>,
    ) -> Result<DirectionMatrix> {
        let name = format!("M[{}]custom{}", lattice.spec_string(), cols.len());
        Self::new(lattice, Vec::new(), cols, name)
    }

    fn new(
        lattice: Arc<Lattice>,
        counts: Vec<u32>,
        cols: Vec<Vec<i64>>,
        name: String,
    ) -> Result<DirectionMatrix> {
        if cols.is_empty() {
            return Err(Error::EmptySelection);
        }
        let d = lattice.dim();
        let rank = int_rank(&cols);
        if rank < d {
            return Err(Error::RankDeficient { rank, d });
        }
        Ok(DirectionMatrix {
            lattice,
            counts,
            cols,
            name,
            support: OnceLock::new(),
            evaluator: OnceLock::new(),
        })
    }

    /// Parse a spline spec `<lattice>:<n1><n2>...`, e.g. `cc3:101` or
    /// `Dn*:4:10`. The final segment holds one digit per shell.
    pub fn parse_spec(spec: &str) -> Result<DirectionMatrix> {
        let (lat_spec, digits) = spec
            .rsplit_once(':')
            .ok_or_else(|| Error::Parse(format!("spline spec `{spec}` needs `<lattice>:<counts>`")))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad repetition counts `{digits}` in `{spec}`")));
        }
        let lattice = Lattice::parse_spec(lat_spec)?;
        let counts: Vec<u32> = digits.bytes().map(|b| (b - b'0') as u32).collect();
        Self::from_counts(lattice, &counts)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Column count m.
    pub fn m(&self) -> usize {
        self.cols.len()
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    /// Lattice-coordinate columns of N (Ξ = G·N).
    pub fn lattice_columns(&self) -> &[Vec<i64>] {
        &self.cols
    }

    /// Ambient columns of Ξ.
    pub fn ambient_columns(&self) -> Vec<Vec<f64>> {
        self.cols.iter().map(|c| self.lattice.to_ambient(c)).collect()
    }

    /// Polynomial degree m - d.
    pub fn degree(&self) -> usize {
        self.m() - self.dim()
    }

    fn distinct_directions(&self) -> Vec<(Vec<i64>, i64)> {
        let mut mult: HashMap<Vec<i64>, i64> = HashMap::new();
        for c in &self.cols {
            *mult.entry(sign_canonical(c)).or_insert(0) += 1;
        }
        let mut v: Vec<(Vec<i64>, i64)> = mult.into_iter().collect();
        v.sort();
        v
    }

    /// Removal number r: the minimal number of columns whose deletion leaves
    /// a non-spanning set. The spline is C^{r-2} and its shift space has
    /// approximation order r. Computed exactly by enumerating hyperplanes
    /// spanned by d-1 independent columns and counting the columns they
    /// contain.
    pub fn smoothness_r(&self) -> usize {
        let d = self.dim();
        let dirs = self.distinct_directions();
        let mut max_in_hyperplane: i64 = 0;
        let refs: Vec<&[i64]> = dirs.iter().map(|(v, _)| v.as_slice()).collect();
        let mut normals: HashSet<Vec<i64>> = HashSet::new();
        for_each_subset(dirs.len(), d - 1, |subset| {
            let chosen: Vec<&[i64]> = subset.iter().map(|&i| refs[i]).collect();
            let cross = generalized_cross(&chosen);
            if let Some(n) = primitive_canonical(&cross) {
                normals.insert(n);
            }
        });
        for n in &normals {
            let mut count = 0i64;
            for (v, mult) in &dirs {
                let dot: i64 = v.iter().zip(n).map(|(&a, &b)| a * b).sum();
                if dot == 0 {
                    count += mult;
                }
            }
            max_in_hyperplane = max_in_hyperplane.max(count);
        }
        self.m() - max_in_hyperplane as usize
    }

    /// Support volume in lattice coordinates: Σ |det S| over all d-subsets
    /// of columns. Equals the stencil size; the ambient volume is this times
    /// |det G|.
    pub fn support_volume_lattice(&self) -> i64 {
        let d = self.dim();
        let dirs = self.distinct_directions();
        let mut total: i64 = 0;
        for_each_subset(dirs.len(), d, |subset| {
            let mat: Vec<Vec<i128>> = (0..d)
                .map(|r| subset.iter().map(|&i| dirs[i].0[r] as i128).collect())
                .collect();
            let det = det_int(&mat).abs();
            if det != 0 {
                let mult: i128 = subset.iter().map(|&i| dirs[i].1 as i128).product();
                total += (det * mult) as i64;
            }
        });
        total
    }

    /// Support volume in ambient measure.
    pub fn support_volume(&self) -> f64 {
        self.support_volume_lattice() as f64 * self.lattice.det_g()
    }

    /// Number of coefficients on the lattice needed to evaluate a spline
    /// value: support volume / |det G|, an exact integer.
    pub fn stencil_size(&self) -> i64 {
        self.support_volume_lattice()
    }

    /// True iff every nonsingular d×d submatrix of N has |det| = 1, i.e. the
    /// shifts of the spline are linearly independent.
    pub fn is_unimodular(&self) -> bool {
        let d = self.dim();
        let dirs = self.distinct_directions();
        let mut uni = true;
        for_each_subset(dirs.len(), d, |subset| {
            if !uni {
                return;
            }
            let mat: Vec<Vec<i128>> = (0..d)
                .map(|r| subset.iter().map(|&i| dirs[i].0[r] as i128).collect())
                .collect();
            let det = det_int(&mat).abs();
            if det > 1 {
                uni = false;
            }
        });
        uni
    }

    /// True iff for every lattice symmetry L the column multiset of L·Ξ
    /// equals that of Ξ up to per-column signs. Requires a lattice with a
    /// computed symmetry group.
    pub fn is_symmetric(&self) -> Result<bool> {
        let group = self.lattice.symmetry_group()?;
        let mut base: Vec<Vec<i64>> = self.cols.iter().map(|c| sign_canonical(c)).collect();
        base.sort();
        for el in &group.elements {
            let mut mapped: Vec<Vec<i64>> = self
                .cols
                .iter()
                .map(|c| sign_canonical(&el.apply_lattice(c)))
                .collect();
            mapped.sort();
            if mapped != base {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Zonotope support as integer slab data, cached.
    pub fn support(&self) -> Arc<SupportData> {
        self.support
            .get_or_init(|| {
                let d = self.dim();
                let dirs = self.distinct_directions();
                let refs: Vec<&[i64]> = dirs.iter().map(|(v, _)| v.as_slice()).collect();
                let mut seen: HashSet<Vec<i64>> = HashSet::new();
                let mut normals = Vec::new();
                for_each_subset(dirs.len(), d - 1, |subset| {
                    let chosen: Vec<&[i64]> = subset.iter().map(|&i| refs[i]).collect();
                    if let Some(n) = primitive_canonical(&generalized_cross(&chosen)) {
                        if seen.insert(n.clone()) {
                            normals.push(n);
                        }
                    }
                });
                normals.sort();
                let classes: Vec<NormalClass> = normals
                    .into_iter()
                    .map(|normal| {
                        let dots: Vec<i64> = self
                            .cols
                            .iter()
                            .map(|c| c.iter().zip(&normal).map(|(&a, &b)| a * b).sum())
                            .collect();
                        let width = dots.iter().map(|&x| x.abs()).sum();
                        NormalClass {
                            normal,
                            dots,
                            width,
                        }
                    })
                    .collect();
                let half_width: Vec<f64> = (0..d)
                    .map(|i| self.cols.iter().map(|c| c[i].abs() as f64).sum::<f64>() / 2.0)
                    .collect();
                Arc::new(SupportData {
                    normals: classes,
                    half_width,
                })
            })
            .clone()
    }

    /// Closed-support membership test in lattice coordinates.
    pub fn support_contains_lattice(&self, y: &[f64]) -> bool {
        let sup = self.support();
        sup.normals.iter().all(|nc| {
            let dot: f64 = nc.normal.iter().zip(y).map(|(&n, &v)| n as f64 * v).sum();
            2.0 * dot.abs() <= nc.width as f64 + 1e-9
        })
    }

    /// Signed distance proxy: most violated slab, in lattice coordinates,
    /// normalized per-plane. Negative inside.
    pub fn support_violation(&self, y: &[f64]) -> f64 {
        let sup = self.support();
        sup.normals
            .iter()
            .map(|nc| {
                let dot: f64 = nc.normal.iter().zip(y).map(|(&n, &v)| n as f64 * v).sum();
                let len: f64 = nc
                    .normal
                    .iter()
                    .map(|&n| (n * n) as f64)
                    .sum::<f64>()
                    .sqrt();
                (dot.abs() - nc.width as f64 / 2.0) / len
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// All lattice points j with x - j inside the closed support, i.e. the
    /// coefficient stencil of the ambient point x.
    pub fn stencil_shifts(&self, x: &[f64]) -> Vec<Vec<i64>> {
        let y = self.lattice.to_lattice(x);
        self.stencil_shifts_lattice(&y)
    }

    pub fn stencil_shifts_lattice(&self, y: &[f64]) -> Vec<Vec<i64>> {
        let d = self.dim();
        let sup = self.support();
        let lo: Vec<i64> = (0..d)
            .map(|i| (y[i] - sup.half_width[i] - 1e-9).ceil() as i64)
            .collect();
        let hi: Vec<i64> = (0..d)
            .map(|i| (y[i] + sup.half_width[i] + 1e-9).floor() as i64)
            .collect();
        let mut out = Vec::new();
        let mut z = lo.clone();
        'outer: loop {
            let rel: Vec<f64> = (0..d).map(|i| y[i] - z[i] as f64).collect();
            if self.support_contains_lattice(&rel) {
                out.push(z.clone());
            }
            for i in 0..d {
                z[i] += 1;
                if z[i] <= hi[i] {
                    continue 'outer;
                }
                z[i] = lo[i];
            }
            break;
        }
        out
    }

    pub(crate) fn evaluator(&self) -> Arc<crate::eval::Evaluator> {
        self.evaluator
            .get_or_init(|| Arc::new(crate::eval::Evaluator::for_lattice_columns(&self.cols)))
            .clone()
    }

    /// Assemble the full descriptor.
    pub fn descriptor(&self) -> BoxSplineDescriptor {
        let r = self.smoothness_r();
        BoxSplineDescriptor {
            name: self.name.clone(),
            lattice_spec: self.lattice.spec_string(),
            m: self.m(),
            d: self.dim(),
            degree: self.degree(),
            r,
            continuity: r as i64 - 2,
            stencil_size: self.stencil_size(),
            support_volume: self.support_volume(),
            unimodular: self.is_unimodular(),
            symmetric: self.is_symmetric().ok(),
        }
    }
}

/// Derived analytic data for one box spline.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSplineDescriptor {
    pub name: String,
    pub lattice_spec: String,
    pub m: usize,
    pub d: usize,
    pub degree: usize,
    pub r: usize,
    /// r - 2, i.e. the spline is C^{continuity}. Negative means discontinuous.
    pub continuity: i64,
    pub stencil_size: i64,
    pub support_volume: f64,
    pub unimodular: bool,
    /// None when the lattice has no computed symmetry group (general-d families).
    pub symmetric: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(spec: &str) -> DirectionMatrix {
        DirectionMatrix::parse_spec(spec).unwrap()
    }

    #[test]
    fn zp_element() {
        let zp = xi("cc2:11");
        assert_eq!(zp.name(), "Mc11");
        assert_eq!(zp.m(), 4);
        assert_eq!(zp.degree(), 2);
        assert_eq!(zp.smoothness_r(), 3);
        assert_eq!(zp.stencil_size(), 7);
        assert_eq!(zp.support_volume_lattice(), 7); // 1+1+1+1+1+2
        assert!(!zp.is_unimodular()); // submatrix ((1,1),(-1,1)) has det 2
        assert!(zp.is_symmetric().unwrap());
        let cols: HashSet<Vec<i64>> = zp.lattice_columns().iter().cloned().collect();
        let want: HashSet<Vec<i64>> =
            [vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]].into_iter().collect();
        assert_eq!(cols, want);
    }

    #[test]
    fn trivariate_examples() {
        let c101 = xi("cc3:101");
        assert_eq!(c101.m(), 7);
        assert_eq!(c101.degree(), 4);
        assert_eq!(c101.smoothness_r(), 4);
        assert_eq!(c101.stencil_size(), 53);

        let b110 = xi("bcc:110");
        assert_eq!(b110.m(), 7);
        assert_eq!(b110.degree(), 4);
        assert_eq!(b110.smoothness_r(), 4);
        assert_eq!(b110.stencil_size(), 30);
        assert_eq!(b110.support_volume_lattice() * 4, 120);
        assert!(b110.is_symmetric().unwrap());
    }

    #[test]
    fn hex_splines() {
        let h20 = xi("hex:20");
        assert_eq!(h20.degree(), 4);
        assert_eq!(h20.smoothness_r(), 4);
        assert_eq!(h20.stencil_size(), 12);
        let h10 = xi("hex:10");
        assert_eq!(h10.degree(), 1);
        assert_eq!(h10.smoothness_r(), 2);
        assert_eq!(h10.stencil_size(), 3);
    }

    #[test]
    fn unimodular_families() {
        assert!(xi("cc2:20").is_unimodular());
        assert!(xi("cc2:30").is_unimodular());
        assert!(xi("hex:20").is_unimodular());
        assert!(xi("fcc:100").is_unimodular());
        assert!(xi("bcc:100").is_unimodular());
        assert!(xi("cc3:200").is_unimodular());
        assert!(!xi("cc2:11").is_unimodular());
        assert!(!xi("cc3:101").is_unimodular());
        assert!(!xi("bcc:110").is_unimodular());
        assert!(!xi("hex:11").is_unimodular());
    }

    #[test]
    fn asymmetric_counterexample() {
        let lat = Lattice::parse_spec("cc2").unwrap();
        let m = DirectionMatrix::from_lattice_columns(lat, vec![vec![1, 0], vec![1, 1]]).unwrap();
        assert!(!m.is_symmetric().unwrap());
    }

    #[test]
    fn error_cases() {
        let lat = Lattice::parse_spec("cc2").unwrap();
        assert!(matches!(
            DirectionMatrix::from_counts(lat.clone(), &[0]),
            Err(Error::EmptySelection)
        ));
        assert!(matches!(
            DirectionMatrix::from_lattice_columns(lat.clone(), vec![vec![1, 0], vec![2, 0]]),
            Err(Error::RankDeficient { .. })
        ));
        assert!(DirectionMatrix::parse_spec("cc2:0").is_err());
        assert!(DirectionMatrix::parse_spec("cc2").is_err());
        assert!(DirectionMatrix::parse_spec("cc2:9x").is_err());
        // shell 5 of a named lattice is out of range
        assert!(DirectionMatrix::parse_spec("cc2:00001").is_err());
    }

    #[test]
    fn stencil_shift_counts() {
        let zp = xi("cc2:11");
        let shifts = zp.stencil_shifts(&[0.33, 0.17]);
        assert_eq!(shifts.len(), 7);
        let i2 = xi("cc2:10");
        let shifts = i2.stencil_shifts(&[0.1, 0.1]);
        assert_eq!(shifts, vec![vec![0, 0]]);
        let c21 = xi("cc2:21");
        assert_eq!(c21.stencil_shifts(&[0.33, 0.17]).len(), 14);
    }

    #[test]
    fn descriptor_roundup() {
        let d = xi("bcc:110").descriptor();
        assert_eq!(d.degree, 4);
        assert_eq!(d.continuity, 2);
        assert_eq!(d.stencil_size, 30);
        assert_eq!(d.symmetric, Some(true));
        // general-d family: no symmetry group, flag absent
        let an = xi("An:4:1").descriptor();
        assert_eq!(an.degree, 6); // d(d-1)/2
        assert_eq!(an.continuity, 2); // d-2
        assert_eq!(an.symmetric, None);
    }
}
