//! Hodge theory of Bott-Chern and Aeppli cohomology on left-invariant forms of
//! finite-dimensional Lie-algebra models of compact complex manifolds.

pub mod algebra;
pub mod classify;
pub mod cohomology;
pub mod cones;
pub mod error;
pub mod fixtures;
pub mod hodge;
pub mod linalg;
pub mod model;

pub use algebra::{Bidegree, Complex, Form, FormSpace, MultiIndex};
pub use error::{Error, Result};
pub use hodge::{HarmonicSpace, HermitianMetric, Hodge, Tolerances};
pub use model::{BigradedOperator, LieModel, OperatorKind, ValidationReport};
