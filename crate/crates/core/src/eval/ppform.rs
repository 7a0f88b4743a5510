//! Conversion to piecewise-polynomial form and its fast evaluator.
//!
//! Per region of the knot-plane arrangement the spline is one polynomial of
//! total degree m-d. Coefficients are obtained by a least-squares fit against
//! the recursive evaluator at interior samples, fitted around a half-integer
//! anchor for conditioning, then snapped to exact rationals (the coefficients
//! are integers after a known scaling) and shifted exactly to a common
//! centered monomial basis. One global denominator serves every region.
//!
//! Region lookup keys on the quantized sign vector; queries inside the 1e-9
//! dead zone around a plane, and the rare sign vectors missed during region
//! discovery, fall back to the recursive evaluator.

use super::arrangement::{Classification, KnotPlaneArrangement};
use super::eval_recursive_lattice;
use crate::linalg::{rat_to_f64, Rat};
use crate::spline::DirectionMatrix;
use crate::{Error, Result};
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicU64, Ordering};

const FIT_RESIDUAL: f64 = 1e-9;
const SNAP_TOL: f64 = 1e-6;
const MAX_DENOMINATOR: u64 = 1_000_000;

struct RegionPoly {
    /// Numerators over the global denominator; empty in float fallback mode.
    numerators: Vec<i64>,
    /// The same coefficients as f64, used by the evaluator.
    coeffs: Vec<f64>,
}

pub struct PiecewisePolynomial {
    xi: DirectionMatrix,
    arrangement: KnotPlaneArrangement,
    degree: usize,
    monomials: Vec<Vec<u32>>,
    denominator: u64,
    rationalized: bool,
    regions: Vec<RegionPoly>,
    misses: AtomicU64,
}

/// Exponent vectors of all monomials of total degree ≤ deg in d variables:
/// ascending total degree, descending lexicographic within a degree block.
pub fn graded_monomials(d: usize, deg: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=deg as u32 {
        let mut block = Vec::new();
        gen_exponents(d, total, &mut Vec::new(), &mut block);
        block.sort();
        block.reverse();
        out.extend(block);
    }
    out
}

fn gen_exponents(d: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == d - 1 {
        let mut v = prefix.clone();
        v.push(left);
        out.push(v);
        return;
    }
    for e in 0..=left {
        prefix.push(e);
        gen_exponents(d, left - e, prefix, out);
        prefix.pop();
    }
}

/// Convert a box spline to piecewise-polynomial form.
pub fn to_ppform(xi: &DirectionMatrix) -> Result<PiecewisePolynomial> {
    let degree = xi.degree();
    if degree > 9 {
        return Err(Error::Unsupported(format!(
            "pp-form limited to degree ≤ 9 (got {degree})"
        )));
    }
    let arrangement = KnotPlaneArrangement::build(xi)?;
    let d = xi.dim();
    let monomials = graded_monomials(d, degree);
    let n_mons = monomials.len();
    let n_samples = 3 * n_mons + 4;

    // per-region local fits around half-integer anchors
    let mut local: Vec<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> = Vec::new();
    for (ri, region) in arrangement.regions().iter().enumerate() {
        let anchor: Vec<f64> = region.rep.iter().map(|&x| (2.0 * x).round() / 2.0).collect();
        let (samples, values) = sample_region(xi, &arrangement, ri, n_samples)?;
        let mut a = nalgebra::DMatrix::zeros(samples.len(), n_mons);
        let mut b = nalgebra::DVector::zeros(samples.len());
        for (r, p) in samples.iter().enumerate() {
            let local_p: Vec<f64> = (0..d).map(|i| p[i] - anchor[i]).collect();
            for (c, mon) in monomials.iter().enumerate() {
                a[(r, c)] = mon_eval(&local_p, mon);
            }
            b[r] = values[r];
        }
        let svd = a.clone().svd(true, true);
        let coef = svd
            .solve(&b, 1e-13)
            .map_err(|e| Error::Numerical(format!("pp fit failed for {}: {e}", xi.name())))?;
        let fitted = a * &coef;
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let resid = (fitted - &b).amax();
        if resid > FIT_RESIDUAL * scale.max(1.0) {
            return Err(Error::Degenerate(format!(
                "piece {ri} of {} is not a single degree-{degree} polynomial (residual {resid:.2e})",
                xi.name()
            )));
        }
        let coef: Vec<f64> = coef.iter().copied().collect();
        local.push((anchor, coef, samples, values));
    }

    // rationalize: local coefficients have denominators dividing
    // q_global · 2^degree (from the half-integer anchor shift)
    let bound = denominator_bound(degree, xi.m(), xi.stencil_size());
    let divisors = sorted_divisors(bound, MAX_DENOMINATOR);
    let mut global_rat: Vec<Vec<Rat>> = Vec::new();
    let mut rationalized = true;
    'regions: for (anchor, coef, _, _) in &local {
        let q = divisors
            .iter()
            .find(|&&q| {
                coef.iter().all(|&c| {
                    let s = c * q as f64;
                    (s - s.round()).abs() < SNAP_TOL
                })
            })
            .copied();
        let Some(q) = q else {
            rationalized = false;
            global_rat.clear();
            break 'regions;
        };
        let exact: Vec<Rat> = coef
            .iter()
            .map(|&c| Rat::new(BigInt::from((c * q as f64).round() as i64), BigInt::from(q)))
            .collect();
        global_rat.push(shift_to_center(&monomials, &exact, anchor));
    }

    let (denominator, regions) = if rationalized {
        let mut q = BigInt::one();
        for coeffs in &global_rat {
            for c in coeffs {
                q = num::integer::lcm(q.clone(), c.denom().clone());
            }
        }
        let q_u64 = q.to_u64().ok_or_else(|| {
            Error::Numerical(format!("global denominator overflows u64 for {}", xi.name()))
        })?;
        let regions: Vec<RegionPoly> = global_rat
            .iter()
            .map(|coeffs| {
                let numerators: Vec<i64> = coeffs
                    .iter()
                    .map(|c| {
                        let n = c.numer() * (&q / c.denom());
                        n.to_i64().ok_or_else(|| {
                            Error::Numerical(format!("pp numerator overflows i64 for {}", xi.name()))
                        })
                    })
                    .collect::<Result<_>>()?;
                let coeffs: Vec<f64> = numerators.iter().map(|&n| n as f64 / q_u64 as f64).collect();
                Ok(RegionPoly { numerators, coeffs })
            })
            .collect::<Result<_>>()?;
        (q_u64, regions)
    } else {
        // floating fallback, flagged via denominator 0
        let regions: Vec<RegionPoly> = local
            .iter()
            .map(|(anchor, coef, _, _)| {
                let exact_f = shift_to_center_f64(&monomials, coef, anchor);
                RegionPoly {
                    numerators: Vec::new(),
                    coeffs: exact_f,
                }
            })
            .collect();
        (0, regions)
    };

    let pp = PiecewisePolynomial {
        xi: xi.clone(),
        arrangement,
        degree,
        monomials,
        denominator,
        rationalized,
        regions,
        misses: AtomicU64::new(0),
    };

    // validate the final (snapped) polynomials against the sampled values
    for (ri, (_, _, samples, values)) in local.iter().enumerate() {
        for (p, &v) in samples.iter().zip(values) {
            let got = pp.eval_region(ri, p);
            if (got - v).abs() > FIT_RESIDUAL * v.abs().max(1.0) * 4.0 {
                return Err(Error::Degenerate(format!(
                    "rationalized piece {ri} of {} deviates from samples by {:.2e}",
                    xi.name(),
                    (got - v).abs()
                )));
            }
        }
    }
    Ok(pp)
}

fn sample_region(
    xi: &DirectionMatrix,
    arr: &KnotPlaneArrangement,
    region_idx: usize,
    n: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let region = &arr.regions()[region_idx];
    let d = xi.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7070_666f + region_idx as u64);
    let mut radius = region.margin.max(1e-4) * 4.0;
    let mut pts: Vec<Vec<f64>> = vec![region.rep.clone()];
    for _ in 0..24 {
        let mut tries = 0;
        while pts.len() < n && tries < 4000 {
            tries += 1;
            let p: Vec<f64> = (0..d)
                .map(|i| region.rep[i] + rng.gen_range(-radius..radius))
                .collect();
            if arr.classify(&p) == Classification::Interior(region.key.clone())
                && arr.clearance(&p) > 1e-7
            {
                pts.push(p);
            }
        }
        if pts.len() >= n {
            let values: Vec<f64> = pts
                .iter()
                .map(|p| eval_recursive_lattice(xi, p))
                .collect();
            return Ok((pts, values));
        }
        radius *= 0.6;
    }
    Err(Error::Degenerate(format!(
        "region {region_idx} of {}: only {} interior samples found",
        xi.name(),
        pts.len()
    )))
}

fn mon_eval(p: &[f64], mon: &[u32]) -> f64 {
    let mut v = 1.0;
    for (x, &e) in p.iter().zip(mon) {
        for _ in 0..e {
            v *= x;
        }
    }
    v
}

/// Known scaling under which pp coefficients are integers: the search scans
/// divisors of (m-d)! · 2^m · stencil, capped at 1e6 and ordered ascending.
/// Locally-anchored coefficients pick up another 2^degree from the
/// half-integer shift, folded in here.
fn denominator_bound(degree: usize, m: usize, stencil: i64) -> u128 {
    let mut b: u128 = 1;
    for k in 2..=degree as u128 {
        b = b.saturating_mul(k);
    }
    b = b.saturating_mul(1u128 << (m + degree).min(60));
    b.saturating_mul(stencil.unsigned_abs() as u128)
}

fn sorted_divisors(bound: u128, cap: u64) -> Vec<u64> {
    // prime factorization of the bound, then bounded divisor generation
    let mut n = bound;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut p: u128 = 2;
    while p * p <= n && p < 100_000 {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            factors.push((p as u64, e));
        }
        p += 1;
    }
    if n > 1 && n <= cap as u128 {
        factors.push((n as u64, 1));
    }
    let mut divs: Vec<u64> = vec![1];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for &d in &divs {
            let mut v = d;
            for _ in 0..=e {
                next.push(v);
                match v.checked_mul(p) {
                    Some(w) if w <= cap => v = w,
                    _ => break,
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        divs = next;
    }
    divs
}

/// Exact re-expansion of a polynomial around `anchor` (half-integers) into
/// the centered monomial basis.
fn shift_to_center(monomials: &[Vec<u32>], coeffs: &[Rat], anchor: &[f64]) -> Vec<Rat> {
    let d = anchor.len();
    let s: Vec<Rat> = anchor
        .iter()
        .map(|&x| Rat::new(BigInt::from((2.0 * x).round() as i64), BigInt::from(2)))
        .collect();
    let mut out = vec![Rat::zero(); monomials.len()];
    let index: std::collections::HashMap<&[u32], usize> = monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_slice(), i))
        .collect();
    for (ci, alpha) in monomials.iter().enumerate() {
        if coeffs[ci].is_zero() {
            continue;
        }
        // (y - s)^alpha = Σ_beta≤alpha Π binom(alpha_i, beta_i) (-s_i)^{alpha_i-beta_i} y^beta
        let mut beta = vec![0u32; d];
        loop {
            let mut w = coeffs[ci].clone();
            for i in 0..d {
                w *= Rat::from(BigInt::from(binom(alpha[i], beta[i])));
                let e = alpha[i] - beta[i];
                for _ in 0..e {
                    w *= -s[i].clone();
                }
            }
            if !w.is_zero() {
                let idx = index[beta.as_slice()];
                out[idx] += w;
            }
            // advance beta within the box [0, alpha]
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                beta[i] += 1;
                if beta[i] <= alpha[i] {
                    break;
                }
                beta[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }
    out
}

fn shift_to_center_f64(monomials: &[Vec<u32>], coeffs: &[f64], anchor: &[f64]) -> Vec<f64> {
    let exact: Vec<Rat> = coeffs
        .iter()
        .map(|&c| Rat::from_float(c).unwrap_or_else(Rat::zero))
        .collect();
    shift_to_center(monomials, &exact, anchor)
        .iter()
        .map(rat_to_f64)
        .collect()
}

fn binom(n: u32, k: u32) -> u64 {
    let mut r: u64 = 1;
    for i in 0..k.min(n - k) {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

impl PiecewisePolynomial {
    pub fn spline(&self) -> &DirectionMatrix {
        &self.xi
    }

    pub fn arrangement(&self) -> &KnotPlaneArrangement {
        &self.arrangement
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Common integer denominator of all stored coefficients; 0 in the
    /// floating fallback mode.
    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn is_rationalized(&self) -> bool {
        self.rationalized
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn numerators(&self, region: usize) -> &[i64] {
        &self.regions[region].numerators
    }

    /// Lookup misses observed so far (sign vectors never seen during
    /// construction; those queries were answered recursively).
    pub fn lookup_misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    fn eval_region(&self, region: usize, y: &[f64]) -> f64 {
        let d = y.len();
        // powers per axis up to the degree
        let mut pows = [[0.0f64; 10]; 8];
        for i in 0..d {
            pows[i][0] = 1.0;
            for e in 1..=self.degree {
                pows[i][e] = pows[i][e - 1] * y[i];
            }
        }
        let coeffs = &self.regions[region].coeffs;
        let mut acc = 0.0;
        for (mon, &c) in self.monomials.iter().zip(coeffs) {
            if c != 0.0 {
                let mut term = c;
                for (i, &e) in mon.iter().enumerate() {
                    term *= pows[i][e as usize];
                }
                acc += term;
            }
        }
        acc
    }

    /// Evaluate at an ambient point: 0 outside the support, polynomial value
    /// in the located region, recursive fallback inside the dead zone.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let y = self.xi.lattice().to_lattice(x);
        self.eval_lattice(&y)
    }

    pub fn eval_lattice(&self, y: &[f64]) -> f64 {
        match self.arrangement.classify(y) {
            Classification::Outside => 0.0,
            Classification::DeadZone => eval_recursive_lattice(&self.xi, y),
            Classification::Interior(key) => match self.arrangement.region_index(&key) {
                Some(ri) => self.eval_region(ri, y),
                None => {
                    self.misses.fetch_add(1, Ordering::Relaxed);
                    eval_recursive_lattice(&self.xi, y)
                }
            },
        }
    }

    /// Versioned plain-text serialization; bit-exact round trip.
    pub fn serialize(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "boxcomp-pp 1").unwrap();
        writeln!(s, "spline {}:{}", self.xi.lattice().spec_string(), counts_str(&self.xi)).unwrap();
        writeln!(s, "degree {}", self.degree).unwrap();
        writeln!(s, "denominator {}", self.denominator).unwrap();
        writeln!(s, "planes {}", self.arrangement.planes().len()).unwrap();
        for p in self.arrangement.planes() {
            write!(s, "plane").unwrap();
            for n in &p.normal {
                write!(s, " {n}").unwrap();
            }
            write!(s, " :").unwrap();
            for o in &p.offsets_x2 {
                write!(s, " {o}").unwrap();
            }
            writeln!(s).unwrap();
        }
        writeln!(s, "regions {}", self.regions.len()).unwrap();
        for (region, poly) in self.arrangement.regions().iter().zip(&self.regions) {
            write!(s, "region {} :", String::from_utf8_lossy(&region.key)).unwrap();
            if self.rationalized {
                for n in &poly.numerators {
                    write!(s, " {n}").unwrap();
                }
            } else {
                for c in &poly.coeffs {
                    write!(s, " f{:016x}", c.to_bits()).unwrap();
                }
            }
            writeln!(s).unwrap();
        }
        s
    }

    /// Parse a serialized pp-form: rebuilds the spline and its arrangement
    /// from the spec and re-attaches coefficients by region key.
    pub fn parse(text: &str) -> Result<PiecewisePolynomial> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "boxcomp-pp 1" {
            return Err(Error::Parse(format!("unknown pp-form header `{header}`")));
        }
        let mut spec = None;
        let mut denominator: u64 = 0;
        let mut region_lines: Vec<(Vec<u8>, Vec<String>)> = Vec::new();
        let mut plane_lines: Vec<String> = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("spline") => spec = it.next().map(str::to_string),
                Some("degree") | Some("planes") | Some("regions") => {}
                Some("denominator") => {
                    denominator = it
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| Error::Parse("bad denominator".into()))?;
                }
                Some("plane") => plane_lines.push(line.to_string()),
                Some("region") => {
                    let key = it
                        .next()
                        .ok_or_else(|| Error::Parse("region without key".into()))?;
                    let key = if key == ":" { Vec::new() } else { key.as_bytes().to_vec() };
                    let rest: Vec<String> = it
                        .filter(|t| *t != ":")
                        .map(str::to_string)
                        .collect();
                    region_lines.push((key, rest));
                }
                _ => {}
            }
        }
        let spec = spec.ok_or_else(|| Error::Parse("missing spline spec".into()))?;
        let xi = DirectionMatrix::parse_spec(&spec)?;
        let arrangement = KnotPlaneArrangement::build(&xi)?;
        let degree = xi.degree();
        let monomials = graded_monomials(xi.dim(), degree);
        // verify plane list
        let mut expect = Vec::new();
        for p in arrangement.planes() {
            let n: Vec<String> = p.normal.iter().map(|v| v.to_string()).collect();
            let o: Vec<String> = p.offsets_x2.iter().map(|v| v.to_string()).collect();
            expect.push(format!("plane {} : {}", n.join(" "), o.join(" ")).trim().to_string());
        }
        let got: Vec<String> = plane_lines
            .iter()
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
            .collect();
        if expect != got {
            return Err(Error::Parse(
                "pp-form plane list does not match the regenerated arrangement".into(),
            ));
        }
        if region_lines.len() != arrangement.regions().len() {
            return Err(Error::Parse(format!(
                "pp-form holds {} regions, arrangement has {}",
                region_lines.len(),
                arrangement.regions().len()
            )));
        }
        let rationalized = denominator != 0;
        let mut by_key: std::collections::HashMap<Vec<u8>, Vec<String>> =
            region_lines.into_iter().collect();
        let regions: Vec<RegionPoly> = arrangement
            .regions()
            .iter()
            .map(|r| {
                let toks = by_key
                    .remove(&r.key)
                    .ok_or_else(|| Error::Parse("pp-form region keys do not match".into()))?;
                if toks.len() != monomials.len() {
                    return Err(Error::Parse("pp-form coefficient count mismatch".into()));
                }
                if rationalized {
                    let numerators: Vec<i64> = toks
                        .iter()
                        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad numerator `{t}`"))))
                        .collect::<Result<_>>()?;
                    let coeffs = numerators
                        .iter()
                        .map(|&n| n as f64 / denominator as f64)
                        .collect();
                    Ok(RegionPoly { numerators, coeffs })
                } else {
                    let coeffs: Vec<f64> = toks
                        .iter()
                        .map(|t| {
                            t.strip_prefix('f')
                                .and_then(|h| u64::from_str_radix(h, 16).ok())
                                .map(f64::from_bits)
                                .ok_or_else(|| Error::Parse(format!("bad float `{t}`")))
                        })
                        .collect::<Result<_>>()?;
                    Ok(RegionPoly {
                        numerators: Vec::new(),
                        coeffs,
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(PiecewisePolynomial {
            xi,
            arrangement,
            degree,
            monomials,
            denominator,
            rationalized,
            regions,
            misses: AtomicU64::new(0),
        })
    }
}

fn counts_str(xi: &DirectionMatrix) -> String {
    xi.counts().iter().map(|c| c.to_string()).collect()
}

/// Evaluate a pp-form at an ambient point.
pub fn eval_pp(pp: &PiecewisePolynomial, x: &[f64]) -> f64 {
    pp.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let mons = graded_monomials(2, 2);
        assert_eq!(
            mons,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(graded_monomials(3, 4).len(), 35);
    }

    #[test]
    fn divisors_ascending() {
        let d = sorted_divisors(48, 1000);
        assert_eq!(d, vec![1, 2, 3, 4, 6, 8, 12, 16, 24, 48]);
    }

    #[test]
    fn unit_box_ppform() {
        let i2 = DirectionMatrix::parse_spec("cc2:10").unwrap();
        let pp = to_ppform(&i2).unwrap();
        assert_eq!(pp.region_count(), 1);
        assert_eq!(pp.denominator(), 1);
        assert_eq!(pp.eval(&[0.2, 0.2]), 1.0);
        assert_eq!(pp.eval(&[0.8, 0.2]), 0.0);
    }

    #[test]
    fn zp_denominator_divides_8() {
        let zp = DirectionMatrix::parse_spec("cc2:11").unwrap();
        let pp = to_ppform(&zp).unwrap();
        assert!(pp.is_rationalized());
        assert!(8 % pp.denominator() == 0, "q = {}", pp.denominator());
        // spot check against the recursive evaluator
        for (x, y) in [(0.3, 0.05), (1.1, 0.2), (-0.3, 0.1), (0.6, 0.8)] {
            let a = pp.eval(&[x, y]);
            let b = super::super::eval_recursive(&zp, &[x, y]);
            assert!((a - b).abs() < 1e-9, "({x},{y}): {a} vs {b}");
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let zp = DirectionMatrix::parse_spec("cc2:11").unwrap();
        let pp = to_ppform(&zp).unwrap();
        let text = pp.serialize();
        let back = PiecewisePolynomial::parse(&text).unwrap();
        assert_eq!(back.serialize(), text);
        assert_eq!(back.denominator(), pp.denominator());
        let p = [0.37, -0.21];
        assert_eq!(pp.eval(&p), back.eval(&p));
    }
}
