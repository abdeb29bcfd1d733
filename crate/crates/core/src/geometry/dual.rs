use serde::{Deserialize, Serialize};

use crate::geometry::TriangleGeometry;
use crate::mesh::SimplicialComplex2;

/// Signed circumcentric dual measures of a mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualMeasures {
    /// Signed dual cell area per vertex.
    pub vertex_area: Vec<f64>,
    /// Signed dual edge length over primal edge length, per edge.
    pub edge_ratio: Vec<f64>,
    /// Per-triangle corner contributions to the vertex areas, in stored
    /// vertex order. Each row sums to the triangle area.
    pub corner_area: Vec<[f64; 3]>,
    pub vertex_area_positive: bool,
    pub edge_ratio_positive: bool,
}

pub fn signed_dual_measures(complex: &SimplicialComplex2, geometry: &[TriangleGeometry]) -> DualMeasures {
    let mut vertex_area = vec![0.0; complex.n_vertices()];
    let mut edge_ratio = vec![0.0; complex.n_edges()];
    let mut corner_area = Vec::with_capacity(complex.n_triangles());
    for (t, g) in geometry.iter().enumerate() {
        let tri = complex.triangle(t);
        let corners = [0, 1, 2].map(|i| g.corner_dual_area(i));
        for i in 0..3 {
            vertex_area[tri[i]] += corners[i];
            edge_ratio[complex.triangle_edges(t)[i]] += g.dual_edge_ratio(i);
        }
        corner_area.push(corners);
    }
    DualMeasures {
        vertex_area_positive: vertex_area.iter().all(|&a| a > 0.0),
        edge_ratio_positive: edge_ratio.iter().all(|&r| r > 0.0),
        vertex_area,
        edge_ratio,
        corner_area,
    }
}
