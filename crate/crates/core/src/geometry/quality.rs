use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::geometry::{triangle_geometries, TriangleGeometry};
use crate::mesh::SimplicialComplex2;

/// Thresholds for the mesh quality flags. Strict inequalities are tested
/// with a margin of `angle_eps`, non-strict ones are relaxed by it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityTolerances {
    /// Smallest admissible angle for shape regularity.
    pub delta0_min: f64,
    /// Required gap below π for opposite-angle sums (uniformly Delaunay).
    pub delta_pi_min: f64,
    /// Required gap below π/2 for angles (uniformly acute variants).
    pub delta_pi2_min: f64,
    /// Largest admissible negative angle defect at an interior vertex.
    pub curvature_max: f64,
    pub angle_eps: f64,
}

impl Default for QualityTolerances {
    fn default() -> Self {
        Self {
            delta0_min: 10f64.to_radians(),
            delta_pi_min: 5f64.to_radians(),
            delta_pi2_min: 5f64.to_radians(),
            curvature_max: PI,
            angle_eps: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityFlags {
    pub acute: bool,
    pub uniformly_acute: bool,
    pub boundary_acute: bool,
    pub uniformly_boundary_acute: bool,
    pub delaunay: bool,
    pub nondegenerate_delaunay: bool,
    pub uniformly_delaunay: bool,
    pub shape_regular: bool,
    pub dec_regular: bool,
    pub curvature_bounded: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Violations {
    /// Triangles with an angle of at least π/2.
    pub non_acute_triangles: Vec<usize>,
    /// Boundary edges whose opposite angle is at least π/2.
    pub non_acute_boundary_edges: Vec<usize>,
    /// Interior edges whose opposite angles sum to more than π.
    pub non_delaunay_edges: Vec<usize>,
    /// Interior edges whose opposite angles sum to π.
    pub cocircular_edges: Vec<usize>,
    /// Triangles with an angle below the shape-regularity threshold.
    pub small_angle_triangles: Vec<usize>,
    /// Interior vertices whose angle defect is below `-curvature_max`.
    pub curvature_vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQualityReport {
    pub flags: QualityFlags,
    /// Smallest angle.
    pub delta0: f64,
    /// π minus the largest opposite-angle sum over interior edges.
    pub delta_pi: f64,
    /// π/2 minus the largest angle opposite a boundary edge.
    pub delta_pi2: f64,
    /// π/2 minus the largest angle.
    pub acute_margin: f64,
    pub min_delta_t: f64,
    /// Negative of the smallest angle defect over interior vertices (zero
    /// when no defect is negative).
    pub curvature_constant: f64,
    /// (vertex, π minus angle sum) for each boundary vertex.
    pub boundary_defects: Vec<(usize, f64)>,
    pub max_valence: usize,
    pub h: f64,
    pub violations: Violations,
    pub tolerances: QualityTolerances,
}

/// Sum of the two angles opposite an interior edge.
pub(crate) fn opposite_angle_sum(complex: &SimplicialComplex2, geometry: &[TriangleGeometry], e: usize) -> f64 {
    complex
        .edge_triangles(e)
        .iter()
        .map(|&t| geometry[t].angles[complex.opposite_local_vertex(t, e).unwrap()])
        .sum()
}

pub fn classify_mesh(complex: &SimplicialComplex2, tol: &QualityTolerances) -> MeshQualityReport {
    let geometry = triangle_geometries(complex);
    let eps = tol.angle_eps;
    let mut v = Violations::default();

    let mut delta0 = f64::INFINITY;
    let mut max_angle = 0.0f64;
    let mut min_delta_t = f64::INFINITY;
    let mut h = 0.0f64;
    for (t, g) in geometry.iter().enumerate() {
        delta0 = delta0.min(g.min_angle());
        max_angle = max_angle.max(g.max_angle());
        min_delta_t = min_delta_t.min(g.delta_t());
        h = h.max(g.circumradius);
        if g.max_angle() >= FRAC_PI_2 - eps {
            v.non_acute_triangles.push(t);
        }
        if g.min_angle() < tol.delta0_min {
            v.small_angle_triangles.push(t);
        }
    }

    let mut max_sum = 0.0f64;
    let mut max_boundary_angle = 0.0f64;
    let mut has_interior = false;
    for e in 0..complex.n_edges() {
        if complex.is_boundary_edge(e) {
            let t = complex.edge_triangles(e)[0];
            let angle = geometry[t].angles[complex.opposite_local_vertex(t, e).unwrap()];
            max_boundary_angle = max_boundary_angle.max(angle);
            if angle >= FRAC_PI_2 - eps {
                v.non_acute_boundary_edges.push(e);
            }
        } else {
            has_interior = true;
            let sum = opposite_angle_sum(complex, &geometry, e);
            max_sum = max_sum.max(sum);
            if sum > PI + eps {
                v.non_delaunay_edges.push(e);
            } else if sum >= PI - eps {
                v.cocircular_edges.push(e);
            }
        }
    }
    let delta_pi = if has_interior { PI - max_sum } else { PI };

    let mut angle_sum = vec![0.0; complex.n_vertices()];
    for (t, g) in geometry.iter().enumerate() {
        for (i, &vert) in complex.triangle(t).iter().enumerate() {
            angle_sum[vert] += g.angles[i];
        }
    }
    let mut min_defect = 0.0f64;
    let mut boundary_defects = Vec::new();
    for (vert, &s) in angle_sum.iter().enumerate() {
        if complex.is_boundary_vertex(vert) {
            boundary_defects.push((vert, PI - s));
        } else {
            let defect = 2.0 * PI - s;
            min_defect = min_defect.min(defect);
            if defect < -tol.curvature_max {
                v.curvature_vertices.push(vert);
            }
        }
    }
    let curvature_constant = -min_defect;
    let delta_pi2 = FRAC_PI_2 - max_boundary_angle;
    let acute_margin = FRAC_PI_2 - max_angle;

    let delaunay = v.non_delaunay_edges.is_empty();
    let nondegenerate_delaunay = delaunay && v.cocircular_edges.is_empty();
    let shape_regular = v.small_angle_triangles.is_empty();
    let flags = QualityFlags {
        acute: v.non_acute_triangles.is_empty(),
        uniformly_acute: acute_margin >= tol.delta_pi2_min,
        boundary_acute: v.non_acute_boundary_edges.is_empty(),
        uniformly_boundary_acute: delta_pi2 >= tol.delta_pi2_min,
        delaunay,
        nondegenerate_delaunay,
        uniformly_delaunay: delta_pi >= tol.delta_pi_min,
        shape_regular,
        dec_regular: shape_regular && nondegenerate_delaunay,
        curvature_bounded: v.curvature_vertices.is_empty(),
    };
    MeshQualityReport {
        flags,
        delta0,
        delta_pi,
        delta_pi2,
        acute_margin,
        min_delta_t,
        curvature_constant,
        boundary_defects,
        max_valence: complex.vertex_valence().into_iter().max().unwrap_or(0),
        h,
        violations: v,
        tolerances: *tol,
    }
}
