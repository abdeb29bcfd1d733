//! Triangle metrics, circumcentric dual measures and mesh quality checks.

mod dual;
mod quality;
mod triangle;

pub use dual::{signed_dual_measures, DualMeasures};
pub use quality::{classify_mesh, MeshQualityReport, QualityFlags, QualityTolerances, Violations};
pub use triangle::{area_from_sides, min_angle_bound, radius_ratio_bound, ShapeConstants, TriangleGeometry};

use crate::mesh::SimplicialComplex2;

/// Geometry of every triangle of a complex.
pub fn triangle_geometries(complex: &SimplicialComplex2) -> Vec<TriangleGeometry> {
    (0..complex.n_triangles())
        .map(|t| TriangleGeometry::new(&complex.triangle_points(t)))
        .collect()
}

/// Mesh size: the largest circumradius.
pub fn mesh_size(complex: &SimplicialComplex2) -> f64 {
    triangle_geometries(complex)
        .iter()
        .map(|g| g.circumradius)
        .fold(0.0, f64::max)
}
