//! Finite-difference laboratory for graph surfaces `z = u(x, y)`.
//!
//! * [`field`]: uniform grids, second-order stencils, trapezoid quadrature
//!   and the WGL1 file format.
//! * [`surfaces`]: analytic catalog with closed-form derivatives, used as the
//!   reference for every grid computation.
//! * [`geometry`]: slope factor, mean and Gauss curvature, `|A|²`, Gauss map
//!   and the Laplace–Beltrami operator of a sampled graph.
//! * [`willmore`]: Willmore energy, both forms of its Euler–Lagrange
//!   residual, and a descent flow.
//! * [`estimates`]: area growth, the calibration inequality chain,
//!   logarithmic cutoffs, the Gauss-map pullback and total curvature.
//!
//! All numerics are generic over [`Real`]; the aliases below fix `f64`.

// `!(x > 0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod field;
pub mod geometry;
pub mod scalar;
pub mod surfaces;
pub mod willmore;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = field::Grid<f64>;
pub type ScalarField = field::Field<f64>;
pub type VectorField = field::VectorField<f64>;
pub type GeometryBundle = geometry::GeometryBundle<f64>;
