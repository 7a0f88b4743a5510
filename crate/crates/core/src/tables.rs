//! Embedded golden data for the lattice and spline datasheets, with
//! regeneration checks. This is the single auditable data file: lattice
//! symmetry orders, the direction sets of the five named lattices, the
//! bivariate/trivariate spline datasheets (parameterized families
//! instantiated at n = 1..4), and the general-d direction-set counts.

use crate::lattice::Lattice;
use crate::linalg::sign_canonical;
use crate::spline::DirectionMatrix;
use crate::Result;
use std::collections::HashSet;

/// The five named domain lattices.
pub struct LatticeRow {
    pub spec: &'static str,
    pub d: usize,
    pub symmetry_order: usize,
    /// det(GᵀG) as an exact fraction (num, den).
    pub det_gram: (i64, i64),
}

pub const LATTICES: &[LatticeRow] = &[
    LatticeRow { spec: "cc2", d: 2, symmetry_order: 8, det_gram: (1, 1) },
    LatticeRow { spec: "hex", d: 2, symmetry_order: 12, det_gram: (3, 4) },
    LatticeRow { spec: "cc3", d: 3, symmetry_order: 48, det_gram: (1, 1) },
    LatticeRow { spec: "fcc", d: 3, symmetry_order: 48, det_gram: (4, 1) },
    LatticeRow { spec: "bcc", d: 3, symmetry_order: 48, det_gram: (16, 1) },
];

/// Direction sets D^1..D^4 of the five named lattices.
/// Vectors are ambient integers except for hex, which lists lattice
/// coordinates (its ambient coordinates are irrational).
pub struct DirectionRow {
    pub spec: &'static str,
    pub in_lattice_coords: bool,
    pub sets: [&'static [[i64; 3]]; 4],
}

// 2D vectors are padded with a trailing zero that is ignored.
pub const DIRECTION_SETS: &[DirectionRow] = &[
    DirectionRow {
        spec: "cc2",
        in_lattice_coords: false,
        sets: [
            &[[1, 0, 0], [0, 1, 0]],
            &[[1, 1, 0], [-1, 1, 0]],
            &[[2, 0, 0], [0, 2, 0]],
            &[[2, 1, 0], [2, -1, 0], [1, 2, 0], [-1, 2, 0]],
        ],
    },
    DirectionRow {
        spec: "hex",
        in_lattice_coords: true,
        sets: [
            &[[1, 0, 0], [0, 1, 0], [-1, -1, 0]],
            &[[2, 1, 0], [-1, 1, 0], [-1, -2, 0]],
            &[[2, 0, 0], [0, 2, 0], [-2, -2, 0]],
            &[[1, 3, 0], [2, 3, 0], [3, 2, 0], [3, 1, 0], [2, -1, 0], [1, -2, 0]],
        ],
    },
    DirectionRow {
        spec: "cc3",
        in_lattice_coords: false,
        sets: [
            &[[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            &[[1, 1, 0], [-1, 1, 0], [1, 0, 1], [1, 0, -1], [0, 1, 1], [0, -1, 1]],
            &[[-1, 1, 1], [1, -1, 1], [1, 1, -1], [-1, -1, -1]],
            &[[2, 0, 0], [0, 2, 0], [0, 0, 2]],
        ],
    },
    DirectionRow {
        spec: "fcc",
        in_lattice_coords: false,
        sets: [
            &[[1, 1, 0], [-1, 1, 0], [1, 0, 1], [1, 0, -1], [0, 1, 1], [0, -1, 1]],
            &[[2, 0, 0], [0, 2, 0], [0, 0, 2]],
            &[
                [2, 1, 1], [2, 1, -1], [2, -1, 1], [2, -1, -1],
                [1, 2, 1], [1, 2, -1], [-1, 2, 1], [-1, 2, -1],
                [1, 1, 2], [1, -1, 2], [-1, 1, 2], [-1, -1, 2],
            ],
            &[[2, 2, 0], [-2, 2, 0], [2, 0, 2], [2, 0, -2], [0, 2, 2], [0, -2, 2]],
        ],
    },
    DirectionRow {
        spec: "bcc",
        in_lattice_coords: false,
        sets: [
            &[[-1, 1, 1], [1, -1, 1], [1, 1, -1], [-1, -1, -1]],
            &[[2, 0, 0], [0, 2, 0], [0, 0, 2]],
            &[[2, 2, 0], [-2, 2, 0], [2, 0, 2], [2, 0, -2], [0, 2, 2], [0, -2, 2]],
            &[
                [3, 1, 1], [3, 1, -1], [3, -1, 1], [3, -1, -1],
                [1, 3, 1], [1, 3, -1], [-1, 3, 1], [-1, 3, -1],
                [1, 1, 3], [1, -1, 3], [-1, 1, 3], [-1, -1, 3],
            ],
        ],
    },
];

/// Spline datasheet rows (degree, continuity r-2, stencil).
#[derive(Clone, Debug, PartialEq)]
pub struct SplineRow {
    pub spec: String,
    pub degree: i64,
    pub continuity: i64,
    pub stencil: i64,
}

fn row(spec: &str, degree: i64, continuity: i64, stencil: i64) -> SplineRow {
    SplineRow {
        spec: spec.to_string(),
        degree,
        continuity,
        stencil,
    }
}

/// Bivariate symmetric box splines up to degree 6, families at n = 1..4.
pub fn bivariate_rows() -> Vec<SplineRow> {
    let mut rows = Vec::new();
    for n in 1..=4i64 {
        // tensor-product B-splines
        rows.push(row(&format!("cc2:{n}0"), 2 * n - 2, n - 2, n * n));
    }
    rows.push(row("cc2:11", 2, 1, 7)); // Zwart-Powell element
    rows.push(row("cc2:21", 4, 2, 14)); // six-direction extension
    rows.push(row("cc2:31", 6, 3, 23));
    rows.push(row("cc2:22", 6, 4, 28));
    for n in 1..=4i64 {
        // hat-function family on the hexagonal lattice
        rows.push(row(&format!("hex:{n}0"), 3 * n - 2, 2 * n - 2, 3 * n * n));
    }
    rows.push(row("hex:11", 4, 3, 24));
    rows
}

/// Trivariate symmetric box splines up to degree 9, families at n = 1..4.
pub fn trivariate_rows() -> Vec<SplineRow> {
    let mut rows = Vec::new();
    for n in 1..=4i64 {
        rows.push(row(&format!("cc3:{n}00"), 3 * n - 3, n - 2, n * n * n));
    }
    rows.push(row("cc3:110", 6, 3, 87));
    rows.push(row("cc3:210", 9, 4, 172));
    rows.push(row("cc3:101", 4, 2, 53));
    rows.push(row("cc3:102", 8, 4, 249));
    rows.push(row("cc3:201", 7, 4, 120));
    for n in 1..=4i64 {
        rows.push(row(&format!("cc3:0{n}0"), 6 * n - 3, 3 * n - 2, 32 * n * n * n));
    }
    rows.push(row("cc3:011", 7, 5, 216));
    for n in 1..=4i64 {
        rows.push(row(&format!("cc3:00{n}"), 4 * n - 3, 2 * n - 2, 16 * n * n * n));
    }
    for n in 1..=4i64 {
        rows.push(row(&format!("fcc:{n}00"), 6 * n - 3, 3 * n - 2, 16 * n * n * n));
    }
    rows.push(row("fcc:110", 6, 3, 86));
    rows.push(row("fcc:120", 9, 4, 228));
    for n in 1..=4i64 {
        rows.push(row(&format!("fcc:0{n}0"), 3 * n - 3, n - 2, 4 * n * n * n));
    }
    rows.push(row("fcc:001", 9, 7, 784));
    for n in 1..=4i64 {
        rows.push(row(&format!("bcc:{n}00"), 4 * n - 3, 2 * n - 2, 4 * n * n * n));
    }
    rows.push(row("bcc:210", 8, 4, 106));
    rows.push(row("bcc:110", 4, 2, 30));
    rows.push(row("bcc:120", 7, 4, 92));
    rows.push(row("bcc:101", 7, 5, 200));
    for n in 1..=4i64 {
        rows.push(row(&format!("bcc:0{n}0"), 3 * n - 3, n - 2, 2 * n * n * n));
    }
    rows.push(row("bcc:011", 6, 3, 174));
    rows.push(row("bcc:021", 9, 4, 344));
    for n in 1..=4i64 {
        rows.push(row(&format!("bcc:00{n}"), 6 * n - 3, 3 * n - 2, 64 * n * n * n));
    }
    rows
}

/// First and second direction-set cardinalities of the general-d families,
/// checked at d = 4 and d = 5.
pub struct FamilyCountRow {
    pub spec: &'static str,
    pub k1: usize,
    pub k2: usize,
}

pub const FAMILY_COUNTS: &[FamilyCountRow] = &[
    FamilyCountRow { spec: "cc:4", k1: 4, k2: 12 },
    FamilyCountRow { spec: "cc:5", k1: 5, k2: 20 },
    FamilyCountRow { spec: "An:4", k1: 10, k2: 15 },
    FamilyCountRow { spec: "An:5", k1: 15, k2: 45 },
    FamilyCountRow { spec: "An*:4", k1: 5, k2: 10 },
    FamilyCountRow { spec: "An*:5", k1: 6, k2: 15 },
    FamilyCountRow { spec: "Dn:4", k1: 12, k2: 12 },
    FamilyCountRow { spec: "Dn:5", k1: 20, k2: 45 },
    // d = 4: 16/2 + 8/2 = 12 first directions (diagonals and doubled axes
    // share the shell)
    FamilyCountRow { spec: "Dn*:4", k1: 12, k2: 12 },
    FamilyCountRow { spec: "Dn*:5", k1: 5, k2: 16 },
];

/// Degree and continuity of the general-d spline classes, instantiated at
/// small d.
pub fn family_spline_rows() -> Vec<(String, i64, i64)> {
    let mut rows = Vec::new();
    // Z^d B-splines: degree d(n-1), continuity n-2
    for (d, n) in [(4i64, 2i64), (4, 3), (5, 2)] {
        rows.push((format!("cc:{d}:{n}0"), d * (n - 1), n - 2));
    }
    // A_n: degree d(d-1)/2, continuity d-2
    for d in [4i64, 5] {
        rows.push((format!("An:{d}:1"), d * (d - 1) / 2, d - 2));
    }
    // A_n*: degree (d+1)n - d, continuity 2(n-1)
    for (d, n) in [(4i64, 1i64), (4, 2), (5, 1)] {
        rows.push((format!("An*:{d}:{n}"), (d + 1) * n - d, 2 * (n - 1)));
    }
    // D_n (first shell once): degree d(d-2), continuity 2d-4
    for d in [4i64, 5] {
        rows.push((format!("Dn:{d}:1"), d * (d - 2), 2 * d - 4));
    }
    // D_n*, d = 4, both first-shell groups: degree 8, continuity 4
    rows.push(("Dn*:4:1".to_string(), 8, 4));
    // D_n*, 4 < d < 8, counts (1,1): degree 2^{d-1}, continuity 2^{d-2}
    rows.push(("Dn*:5:11".to_string(), 16, 8));
    // D_n*, d > 4, B-splines: degree d(n-1), continuity n-2
    rows.push(("Dn*:5:20".to_string(), 5, 0));
    rows
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub table: &'static str,
    pub location: String,
    pub expected: String,
    pub got: String,
}

pub struct TableReport {
    pub lines: Vec<String>,
    pub mismatches: Vec<Mismatch>,
}

impl TableReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Regenerate every machine-checkable table column from scratch and diff
/// against the embedded values.
pub fn verify_all() -> Result<TableReport> {
    let mut mismatches = Vec::new();
    let mut lines = Vec::new();

    let n1 = diff_lattices(&mut mismatches)?;
    lines.push(format!("lattices: {n1} rows checked"));
    let n2 = diff_direction_sets(&mut mismatches)?;
    lines.push(format!("direction sets: {n2} sets checked"));
    let rows3 = bivariate_rows();
    diff_spline_rows("bivariate splines", &rows3, &mut mismatches)?;
    lines.push(format!("bivariate splines: {} rows checked", rows3.len()));
    let rows4 = trivariate_rows();
    diff_spline_rows("trivariate splines", &rows4, &mut mismatches)?;
    lines.push(format!("trivariate splines: {} rows checked", rows4.len()));
    let n5 = diff_family_tables(&mut mismatches)?;
    lines.push(format!("general-d families: {n5} rows checked"));

    Ok(TableReport { lines, mismatches })
}

pub fn diff_lattices(out: &mut Vec<Mismatch>) -> Result<usize> {
    for rowdef in LATTICES {
        let lat = Lattice::parse_spec(rowdef.spec)?;
        let det = lat.det_gram_exact().clone();
        let want = crate::linalg::rat(rowdef.det_gram.0, rowdef.det_gram.1);
        if det != want {
            out.push(Mismatch {
                table: "lattices",
                location: format!("{} det(GtG)", rowdef.spec),
                expected: want.to_string(),
                got: det.to_string(),
            });
        }
        let order = lat.symmetry_group()?.order();
        if order != rowdef.symmetry_order {
            out.push(Mismatch {
                table: "lattices",
                location: format!("{} symmetry order", rowdef.spec),
                expected: rowdef.symmetry_order.to_string(),
                got: order.to_string(),
            });
        }
    }
    Ok(LATTICES.len())
}

fn canon_set(vectors: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = vectors
        .iter()
        .map(|x| sign_canonical(x))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    v.sort();
    v
}

pub fn diff_direction_sets(out: &mut Vec<Mismatch>) -> Result<usize> {
    let mut checked = 0;
    for rowdef in DIRECTION_SETS {
        let lat = Lattice::parse_spec(rowdef.spec)?;
        let d = lat.dim();
        for k in 1..=4usize {
            let ds = lat.direction_set(k)?;
            let got: Vec<Vec<i64>> = if rowdef.in_lattice_coords {
                canon_set(&ds.vectors)
            } else {
                // exact integer ambient coordinates
                let amb: Vec<Vec<i64>> = ds
                    .vectors
                    .iter()
                    .map(|n| {
                        lat.to_ambient_exact(n)
                            .expect("integer-generator lattice")
                            .iter()
                            .map(|r| {
                                assert!(r.is_integer());
                                num::ToPrimitive::to_i64(&r.to_integer()).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                canon_set(&amb)
            };
            let want: Vec<Vec<i64>> = canon_set(
                &rowdef.sets[k - 1]
                    .iter()
                    .map(|v| v[..d].to_vec())
                    .collect::<Vec<_>>(),
            );
            checked += 1;
            if got != want {
                out.push(Mismatch {
                    table: "direction sets",
                    location: format!("{} D^{k}", rowdef.spec),
                    expected: format!("{want:?}"),
                    got: format!("{got:?}"),
                });
            }
        }
    }
    Ok(checked)
}

/// Diff computed datasheets against expected rows. Public so fault-injection
/// tests can corrupt a copy of the rows.
pub fn diff_spline_rows(
    table: &'static str,
    rows: &[SplineRow],
    out: &mut Vec<Mismatch>,
) -> Result<()> {
    for rowdef in rows {
        let xi = DirectionMatrix::parse_spec(&rowdef.spec)?;
        let got = (
            xi.degree() as i64,
            xi.smoothness_r() as i64 - 2,
            xi.stencil_size(),
        );
        let want = (rowdef.degree, rowdef.continuity, rowdef.stencil);
        if got != want {
            out.push(Mismatch {
                table,
                location: format!("{} (degree, continuity, stencil)", rowdef.spec),
                expected: format!("{want:?}"),
                got: format!("{got:?}"),
            });
        }
    }
    Ok(())
}

pub fn diff_family_tables(out: &mut Vec<Mismatch>) -> Result<usize> {
    let mut checked = 0;
    for rowdef in FAMILY_COUNTS {
        let lat = Lattice::parse_spec(rowdef.spec)?;
        for (k, want) in [(1usize, rowdef.k1), (2, rowdef.k2)] {
            let got = lat.direction_set(k)?.len();
            checked += 1;
            if got != want {
                out.push(Mismatch {
                    table: "general-d families",
                    location: format!("{} #D^{k}", rowdef.spec),
                    expected: want.to_string(),
                    got: got.to_string(),
                });
            }
        }
    }
    // Dn* d=4 shell pattern: 8 sign-reduced diagonals plus 4 doubled axes
    let dnd = Lattice::parse_spec("Dn*:4")?;
    let ds = dnd.direction_set(1)?;
    let mut diag = 0;
    let mut axis = 0;
    for n in &ds.vectors {
        let amb = dnd.to_ambient_exact(n).expect("rational generator");
        let scaled: Vec<i64> = amb
            .iter()
            .map(|r| {
                let v = r * crate::linalg::rat_int(2);
                num::ToPrimitive::to_i64(&v.to_integer()).unwrap()
            })
            .collect();
        if scaled.iter().all(|&x| x.abs() == 1) {
            diag += 1;
        } else if scaled.iter().map(|&x| x.abs()).sum::<i64>() == 2 {
            axis += 1;
        }
    }
    checked += 1;
    if (diag, axis) != (8, 4) {
        out.push(Mismatch {
            table: "general-d families",
            location: "Dn*:4 D^1 pattern split".to_string(),
            expected: "(8 diagonals, 4 doubled axes)".to_string(),
            got: format!("({diag} diagonals, {axis} doubled axes)"),
        });
    }
    for (spec, degree, continuity) in family_spline_rows() {
        let xi = DirectionMatrix::parse_spec(&spec)?;
        let got = (xi.degree() as i64, xi.smoothness_r() as i64 - 2);
        checked += 1;
        if got != (degree, continuity) {
            out.push(Mismatch {
                table: "general-d families",
                location: format!("{spec} (degree, continuity)"),
                expected: format!("({degree}, {continuity})"),
                got: format!("{got:?}"),
            });
        }
    }
    Ok(checked)
}
