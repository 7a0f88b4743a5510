//! Symmetric box splines on the classical 2D/3D sampling lattices and their
//! general-d families.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`lattice`] — domain lattices, their symmetry groups and direction sets,
//! * [`spline`] — direction matrices built from per-shell repetition counts
//!   and the analytic data derived from them (degree, smoothness, support,
//!   stencil, unimodularity, symmetry),
//! * [`eval`] — a Fourier-definition oracle, an exact recursive evaluator and
//!   a fast piecewise-polynomial path with integer-scaled coefficients,
//! * [`reconstruct`] — two-term quasi-interpolants, spline fields over sampled
//!   data, approximation-order studies and test signals,
//! * [`render`] — PGM slice images and an orthographic level-set ray-caster,
//! * [`tables`] — embedded golden data for the lattice/spline datasheets with
//!   regeneration checks.
//!
//! All integer claims (determinants, stencil sizes, unimodularity) are
//! computed on integer lattice coordinates so that the hexagonal and
//! body-centered lattices stay exact.

pub mod eval;
pub mod lattice;
pub mod linalg;
pub mod reconstruct;
pub mod render;
pub mod spline;
pub mod tables;

pub use lattice::{DirectionSet, Lattice, Shell, SymmetryGroup};
pub use spline::{BoxSplineDescriptor, DirectionMatrix};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),
    #[error("invalid dimension {d} for lattice family `{family}`")]
    InvalidDimension { family: String, d: usize },
    #[error("direction-set shell k={k} not supported for `{lattice}` (supported 1..={max})")]
    UnsupportedShell {
        lattice: String,
        k: usize,
        max: usize,
    },
    #[error("direction selection does not span the domain (rank {rank} < {d})")]
    RankDeficient { rank: usize, d: usize },
    #[error("empty direction selection")]
    EmptySelection,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate arrangement: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
