//! Simplicial complexes, cochains, forms and mesh generation.

mod cochain;
mod complex;
pub mod delaunay;
pub mod family;
pub mod forms;
pub mod io;

pub use cochain::{apply_coboundary, coboundary, edge_value, Cochain};
pub use complex::{Embedding, SimplicialComplex2, DEGENERATE_AREA_TOL};
pub use delaunay::{delaunay_triangulate, Boundary, DelaunayMesh};
pub use family::{generate_family, Domain, FamilyKind, FamilySpec, MeshLevel};
pub use forms::{de_rham_map, whitney_evaluate, AnalyticForm, Quadrature, WhitneyValue};
