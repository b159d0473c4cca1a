//! Bergman kernels, projections and sharp `L^p` ranges on the generalized
//! Hartogs triangles `{ (z, w) in C^n x C : |z|^gamma < |w| < 1 }`.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod lattice;
pub mod monomial;
pub mod precise;
pub mod projection;
pub mod quadrature;
pub mod range;
pub mod report;
pub mod special;

pub use error::{Error, Result, SingularFactor};
pub use geometry::{DomainSpec, Gamma, Point, QuadratureGrid};
pub use lattice::{LatticeIndex, RationalExponent};
