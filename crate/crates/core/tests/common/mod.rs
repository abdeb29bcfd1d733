//! Meshes shared by the integration tests.
#![allow(dead_code)]

use dec2d::mesh::family::{equilateral_lattice, triangle_pair};
use dec2d::mesh::forms::{for_each_triangle_node, whitney_one_form_basis};
use dec2d::mesh::{generate_family, Quadrature, Domain, FamilyKind, FamilySpec, SimplicialComplex2};

pub fn level(domain: Domain, kind: FamilyKind, perturbation: f64, seed: u64, base: usize) -> SimplicialComplex2 {
    let spec = FamilySpec::new(domain, kind, 1, perturbation, seed).with_base_resolution(base);
    generate_family(&spec).unwrap().remove(0).complex
}

/// Non-degenerate Delaunay meshes, several with obtuse triangles.
pub fn delaunay_meshes() -> Vec<(&'static str, SimplicialComplex2)> {
    vec![
        ("square structured", level(Domain::Square, FamilyKind::StructuredPerturbed, 0.2, 1, 6)),
        ("square random", level(Domain::Square, FamilyKind::RandomDelaunay, 0.2, 2, 6)),
        ("annulus structured", level(Domain::Annulus, FamilyKind::StructuredPerturbed, 0.2, 3, 4)),
        ("annulus random", level(Domain::Annulus, FamilyKind::RandomDelaunay, 0.2, 4, 4)),
        ("equilateral lattice", equilateral_lattice(5).unwrap()),
        ("obtuse pair", triangle_pair(110f64.to_radians(), 50f64.to_radians()).unwrap()),
    ]
}

/// Every test mesh, including non-Delaunay and curved ones.
pub fn all_meshes() -> Vec<(&'static str, SimplicialComplex2)> {
    let mut out = delaunay_meshes();
    out.push(("saddle", level(Domain::SurfaceSaddle, FamilyKind::StructuredPerturbed, 0.2, 5, 4)));
    out.push(("non-Delaunay pair", triangle_pair(100f64.to_radians(), 95f64.to_radians()).unwrap()));
    out
}

pub fn has_obtuse(c: &SimplicialComplex2) -> bool {
    dec2d::geometry::triangle_geometries(c).iter().any(|g| g.max_angle() > std::f64::consts::FRAC_PI_2)
}

/// Global Whitney mass matrices by numerical quadrature of basis products.
pub fn quadrature_masses(c: &SimplicialComplex2) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (nv, ne) = (c.n_vertices(), c.n_edges());
    let mut m0 = vec![vec![0.0; nv]; nv];
    let mut m1 = vec![vec![0.0; ne]; ne];
    for t in 0..c.n_triangles() {
        let tri = c.triangle(t);
        for_each_triangle_node(&c.triangle_points(t), Quadrature::default(), |x, w| {
            let bary = c.barycentric(t, x);
            for i in 0..3 {
                for j in 0..3 {
                    m0[tri[i]][tri[j]] += w * bary[i] * bary[j];
                }
            }
            let basis = whitney_one_form_basis(c, t, bary);
            for (e, u) in basis {
                for (f, v) in basis {
                    m1[e][f] += w * (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]);
                }
            }
        });
    }
    (m0, m1)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn mid(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

/// Signed area of a planar polygon in R³ relative to the unit normal `n`.
fn polygon_area(poly: &[[f64; 3]], n: [f64; 3]) -> f64 {
    let mut total = [0.0; 3];
    for i in 0..poly.len() {
        let c = cross(poly[i], poly[(i + 1) % poly.len()]);
        total = [total[0] + c[0], total[1] + c[1], total[2] + c[2]];
    }
    0.5 * dot(total, n)
}

/// Vertex dual areas and edge dual-to-primal length ratios, summed from
/// explicit kites and signed midpoint-to-circumcenter segments.
pub fn polygon_dual(c: &SimplicialComplex2) -> (Vec<f64>, Vec<f64>) {
    let mut area = vec![0.0; c.n_vertices()];
    let mut ratio = vec![0.0; c.n_edges()];
    for t in 0..c.n_triangles() {
        let p = c.triangle_points(t);
        let tri = c.triangle(t);
        let (u, v) = (sub(p[1], p[0]), sub(p[2], p[0]));
        let w = cross(u, v);
        let ww = dot(w, w);
        let n = w.map(|x| x / ww.sqrt());
        let a1 = cross(v, w).map(|x| x * dot(u, u));
        let a2 = cross(w, u).map(|x| x * dot(v, v));
        let cc = [0, 1, 2].map(|i| p[0][i] + (a1[i] + a2[i]) / (2.0 * ww));
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            // Kite between the vertex, two edge midpoints and the circumcenter.
            area[tri[i]] += polygon_area(&[p[i], mid(p[i], p[j]), cc, mid(p[i], p[k])], n);
            // Dual edge piece for the edge opposite vertex i.
            let m = mid(p[j], p[k]);
            let edge = sub(p[k], p[j]);
            let len = dot(edge, edge).sqrt();
            let inward = cross(n, edge);
            let to_cc = sub(cc, m);
            let side = if dot(inward, sub(p[i], m)) > 0.0 { 1.0 } else { -1.0 };
            let signed = dot(to_cc, to_cc).sqrt() * if dot(to_cc, inward) * side >= 0.0 { 1.0 } else { -1.0 };
            ratio[c.edge_index(tri[j], tri[k]).unwrap()] += signed / len;
        }
    }
    (area, ratio)
}
