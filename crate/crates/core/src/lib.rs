//! Reconstruction of bivariate functions from weighted edge integrals on
//! triangle meshes.
//!
//! The crate provides the classical linear histopolation operator and
//! quadratic enrichments whose degrees of freedom are edge integrals
//! weighted by generalized truncated normal densities (two families, plus an
//! arbitrary-density framework).
//!
//! * [`special_functions`]: lower and modified incomplete gamma functions.
//! * [`geometry`]: triangles, barycentric coordinates, Friedrichs–Keller meshes.
//! * [`quadrature`]: Gauss–Legendre and collapsed triangle rules.
//! * [`densities`]: edge densities, moments and orthogonal quadratics.
//! * [`histopolation`]: edge functionals, dual bases, local and global operators.
//! * [`tuning`]: grid search over `(μ, σ)`.
//! * [`bench`]: test functions, L¹ errors and the comparison sweep.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod densities;
pub mod error;
pub mod geometry;
pub mod histopolation;
pub mod quadrature;
pub mod special_functions;
pub mod tuning;

pub use error::{Error, Result};
pub use geometry::{friedrichs_keller, Mesh, Point2, Triangle};
pub use histopolation::{reconstruct_global, reconstruct_local, LocalOperatorSpec};
