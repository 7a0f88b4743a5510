//! Box spline evaluation: a Fourier-definition oracle, an exact recursive
//! evaluator, and a fast piecewise-polynomial path.

mod arrangement;
mod oracle;
mod ppform;
mod recursive;

pub use arrangement::{ArrangementPlane, Classification, KnotPlaneArrangement};
pub use oracle::{eval_oracle, FourierOracle};
pub use ppform::{eval_pp, graded_monomials, to_ppform, PiecewisePolynomial};
pub(crate) use recursive::Evaluator;

use crate::spline::DirectionMatrix;
use nalgebra::DMatrix;

/// Exact value of the centered box spline at the ambient point `x`,
/// by de Boor's recurrence in lattice coordinates. Points within 1e-9 of a
/// knot plane are nudged by a fixed 1e-7 offset along a generic direction
/// before evaluation, so results at such points are reproducible.
pub fn eval_recursive(xi: &DirectionMatrix, x: &[f64]) -> f64 {
    let y = xi.lattice().to_lattice(x);
    xi.evaluator().eval_centered(&y)
}

/// Same as [`eval_recursive`] but taking lattice coordinates directly.
pub fn eval_recursive_lattice(xi: &DirectionMatrix, y: &[f64]) -> f64 {
    xi.evaluator().eval_centered(y)
}

/// Both sides of the linear-map identity `M_Ξ(x) = |det L| · M_{LΞ}(Lx)`:
/// returns `(M_Ξ(x), |det L| · M_{LΞ}(Lx))`. Both sides keep the original
/// lattice normalization constant |det G|, which is what makes the identity
/// hold. Test-suite helper.
pub fn transform_check(xi: &DirectionMatrix, l: &DMatrix<f64>, x: &[f64]) -> (f64, f64) {
    let a = xi.lattice().ambient_dim();
    assert_eq!(l.nrows(), a, "L must act on the ambient space");
    assert_eq!(
        a,
        xi.dim(),
        "transform_check requires a square-generator lattice"
    );
    let lhs = eval_recursive(xi, x);
    let det_l = l.clone().determinant().abs();
    let cols: Vec<Vec<f64>> = xi
        .ambient_columns()
        .iter()
        .map(|c| {
            let v = l * DMatrix::from_column_slice(a, 1, c);
            v.column(0).iter().copied().collect()
        })
        .collect();
    let ev = Evaluator::for_raw_columns(cols, xi.lattice().det_g());
    let lx: Vec<f64> = {
        let v = l * DMatrix::from_column_slice(a, 1, x);
        v.column(0).iter().copied().collect()
    };
    (lhs, det_l * ev.eval_centered(&lx))
}
