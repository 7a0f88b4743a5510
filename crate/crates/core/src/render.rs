//! Deterministic PGM rendering: spline slices and level-set ray-casting.

use crate::eval::eval_recursive;
use crate::reconstruct::SplineField;
use crate::spline::DirectionMatrix;
use crate::{Error, Result};

/// 8-bit grayscale image with binary PGM (P5) encoding.
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn is_blank(&self) -> bool {
        self.pixels.iter().all(|&p| p == 0)
    }

    /// FNV-1a content hash, stable across runs for identical inputs.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in &self.pixels {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        h ^= self.width as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
        h
    }
}

/// Slice plane for 3D splines; 2D splines render their whole domain.
#[derive(Clone, Copy, Debug)]
pub enum SlicePlane {
    Full2D,
    Axis { axis: usize, value: f64 },
}

impl SlicePlane {
    pub fn parse(spec: &str) -> Result<SlicePlane> {
        let (axis_s, val_s) = spec
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("plane spec `{spec}` must look like `z=0`")))?;
        let axis = match axis_s.trim() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            other => return Err(Error::Parse(format!("unknown slice axis `{other}`"))),
        };
        let value: f64 = val_s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad plane offset `{val_s}`")))?;
        Ok(SlicePlane::Axis { axis, value })
    }
}

/// Grayscale image of the spline on a slice through its support, normalized
/// so the maximum sampled value maps to 255. Returns the image and whether
/// any pixel is nonzero (a plane outside the support gives a blank image).
pub fn slice_image(xi: &DirectionMatrix, plane: SlicePlane, res: usize) -> Result<GrayImage> {
    let d = xi.dim();
    let a = xi.lattice().ambient_dim();
    if a != d {
        return Err(Error::Unsupported(
            "slice rendering expects a square-generator lattice".into(),
        ));
    }
    // ambient bounding box of the support
    let cols = xi.ambient_columns();
    let radius: Vec<f64> = (0..d)
        .map(|i| cols.iter().map(|c| c[i].abs()).sum::<f64>() / 2.0 + 0.1)
        .collect();
    let (ax0, ax1, fixed) = match (d, plane) {
        (2, SlicePlane::Full2D) => (0usize, 1usize, None),
        (2, SlicePlane::Axis { .. }) => {
            return Err(Error::Parse("2D splines render without --plane".into()))
        }
        (3, SlicePlane::Axis { axis, value }) => {
            if axis > 2 {
                return Err(Error::Parse("slice axis out of range".into()));
            }
            let others: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
            (others[0], others[1], Some((axis, value)))
        }
        (3, SlicePlane::Full2D) => {
            return Err(Error::Parse("3D splines need --plane, e.g. z=0".into()))
        }
        _ => return Err(Error::Unsupported("slice rendering is 2D/3D only".into())),
    };
    let mut values = vec![0.0f64; res * res];
    let mut vmax = 0.0f64;
    for row in 0..res {
        for col in 0..res {
            let u = -radius[ax0] + 2.0 * radius[ax0] * (col as f64 + 0.5) / res as f64;
            // image rows run top-down
            let v = radius[ax1] - 2.0 * radius[ax1] * (row as f64 + 0.5) / res as f64;
            let mut x = vec![0.0; d];
            x[ax0] = u;
            x[ax1] = v;
            if let Some((axis, value)) = fixed {
                x[axis] = value;
            }
            let val = eval_recursive(xi, &x).max(0.0);
            vmax = vmax.max(val);
            values[row * res + col] = val;
        }
    }
    let pixels: Vec<u8> = if vmax > 0.0 {
        values
            .iter()
            .map(|&v| (v / vmax * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    } else {
        vec![0; res * res]
    };
    Ok(GrayImage {
        width: res,
        height: res,
        pixels,
    })
}

/// Orthographic ray-cast of the iso-surface `field = iso`, viewed along -z.
/// Per pixel the ray is marched at step h/4, a sign change is refined by
/// bisection to 1e-6, and the hit is shaded by a Lambert term from the
/// central-difference gradient of the field. Misses stay background (0).
pub fn raycast(field: &SplineField, iso: f64, res: usize) -> Result<GrayImage> {
    let (lo, hi) = field.region();
    if lo.len() != 3 {
        return Err(Error::Unsupported("ray-casting needs a 3D field".into()));
    }
    let h = field.h();
    let step = h / 4.0;
    let grad_step = h / 8.0;
    let light = {
        let l = [1.0, 1.0, 1.0f64];
        let n = (3.0f64).sqrt();
        [l[0] / n, l[1] / n, l[2] / n]
    };
    // keep gradient probes inside the valid region
    let inset = grad_step * 1.5;
    let mut pixels = vec![0u8; res * res];
    for row in 0..res {
        for col in 0..res {
            let x = lo[0] + inset + (hi[0] - lo[0] - 2.0 * inset) * (col as f64 + 0.5) / res as f64;
            let y = hi[1] - inset - (hi[1] - lo[1] - 2.0 * inset) * (row as f64 + 0.5) / res as f64;
            let z_top = hi[2] - inset;
            let z_bot = lo[2] + inset;
            let f = |z: f64| field.eval(&[x, y, z]).map(|v| v - iso);
            let mut z_prev = z_top;
            let mut f_prev = f(z_prev)?;
            let mut z = z_top - step;
            let mut hit = None;
            while z >= z_bot {
                let f_cur = f(z)?;
                if f_prev.signum() != f_cur.signum() {
                    // bisect between z and z_prev
                    let (mut a, mut b, mut fa) = (z_prev, z, f_prev);
                    while (a - b).abs() > 1e-6 {
                        let mid = 0.5 * (a + b);
                        let fm = f(mid)?;
                        if fa.signum() != fm.signum() {
                            b = mid;
                        } else {
                            a = mid;
                            fa = fm;
                        }
                    }
                    hit = Some(0.5 * (a + b));
                    break;
                }
                z_prev = z;
                f_prev = f_cur;
                z -= step;
            }
            if let Some(zh) = hit {
                let p = [x, y, zh];
                let mut g = [0.0f64; 3];
                for i in 0..3 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[i] = (p[i] + grad_step).min(hi[i]);
                    pm[i] = (p[i] - grad_step).max(lo[i]);
                    g[i] = (field.eval(&pp)? - field.eval(&pm)?) / (pp[i] - pm[i]);
                }
                let len = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                let shade = if len > 1e-12 {
                    // orient the normal toward the viewer (+z)
                    let s = if g[2] < 0.0 { -1.0 } else { 1.0 };
                    let n = [s * g[0] / len, s * g[1] / len, s * g[2] / len];
                    (n[0] * light[0] + n[1] * light[1] + n[2] * light[2]).max(0.0)
                } else {
                    0.0
                };
                // small floor so silhouettes remain visible on flat shading
                let value = 40.0 + 215.0 * shade;
                pixels[row * res + col] = value.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Ok(GrayImage {
        width: res,
        height: res,
        pixels,
    })
}
