//! Discrete exterior calculus (DEC) and Whitney-form finite elements (FEEC)
//! on triangulated planar domains and surfaces.
//!
//! The crate builds oriented simplicial complexes, assembles the diagonal DEC
//! Hodge stars and the Whitney mass matrices, and compares the two: norm
//! equivalence constants, inner-product discrepancies, harmonic forms,
//! Hodge–Laplace solutions in mixed form and their stability constants.

pub mod error;
pub mod geometry;
pub mod hodge;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod operators;
pub mod solver;
pub mod study;

pub use error::{Error, Result};
pub use operators::{Discretization, Flavor};
