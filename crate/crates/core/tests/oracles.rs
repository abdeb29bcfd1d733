//! Operators checked against independent computations: exact symbolic
//! values (tests/oracle/whitney_mass.py), numerical quadrature of the
//! Whitney basis, and a polygon decomposition of the circumcentric dual.

mod common;

use dec2d::mesh::delaunay_triangulate;
use dec2d::mesh::SimplicialComplex2;
use dec2d::{Discretization, Flavor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn scalene_triangle_matches_symbolic_values() {
    let c = SimplicialComplex2::from_planar(&[[0.0, 0.0], [1.3, 0.1], [0.4, 0.9]], &[[0, 1, 2]]).unwrap();
    let disc = Discretization::new(c).unwrap();
    let m1 = [
        [0.20501474926253688, 0.061946902654867256, 0.008849557522123894],
        [0.061946902654867256, 0.31268436578171094, 0.09882005899705015],
        [0.008849557522123894, 0.09882005899705015, 0.24188790560471976],
    ];
    let star0 = [0.18465707964601769, 0.1655420353982301, 0.21480088495575222];
    let star1 = [0.1592920353982301, 0.4823008849557522, 0.26991150442477874];
    let feec = &disc.mass(1, Flavor::Feec).unwrap().matrix;
    let dec1 = &disc.mass(1, Flavor::Dec).unwrap().matrix;
    let dec0 = &disc.mass(0, Flavor::Dec).unwrap().matrix;
    for i in 0..3 {
        for j in 0..3 {
            assert!(close(feec.get(i, j), m1[i][j], 1e-13), "M1[{i}][{j}]");
        }
        assert!(close(dec1.get(i, i), star1[i], 1e-13));
        assert!(close(dec0.get(i, i), star0[i], 1e-13));
    }
}

#[test]
fn non_delaunay_kite_matches_symbolic_values() {
    let c = SimplicialComplex2::from_planar(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.3], [1.2, -1.1]], &[[0, 1, 2], [0, 1, 3]]).unwrap();
    assert_eq!(c.edges(), &[[0, 1], [0, 2], [0, 3], [1, 2], [1, 3]]);
    let disc = Discretization::new(c).unwrap();
    let m1 = [
        [0.3563131313131313, -0.12638888888888888, -0.020833333333333332, 0.12638888888888888, -0.03977272727272727],
        [-0.12638888888888888, 0.9847222222222223, 0.0, 0.6819444444444445, 0.0],
        [-0.020833333333333332, 0.0, 0.2821969696969697, 0.0, 0.14204545454545456],
        [0.12638888888888888, 0.6819444444444445, 0.0, 0.9847222222222223, 0.0],
        [-0.03977272727272727, 0.0, 0.14204545454545456, 0.0, 0.3428030303030303],
    ];
    let star0 = [-0.0064393939393939115, 0.0049242424242423866, 0.9083333333333332, 0.49318181818181817];
    let star1 = [-0.7015151515151515, 1.6666666666666667, 0.36363636363636365, 1.6666666666666667, 0.5454545454545454];
    let feec = &disc.mass(1, Flavor::Feec).unwrap().matrix;
    for i in 0..5 {
        for j in 0..5 {
            assert!(close(feec.get(i, j), m1[i][j], 1e-13), "M1[{i}][{j}]");
        }
        assert!(close(disc.mass(1, Flavor::Dec).unwrap().matrix.get(i, i), star1[i], 1e-13));
    }
    for (v, want) in star0.iter().enumerate() {
        assert!((disc.mass(0, Flavor::Dec).unwrap().matrix.get(v, v) - want).abs() < 1e-13);
    }
}

#[test]
fn feec_blocks_match_quadrature() {
    for (name, c) in common::all_meshes() {
        let (q0, q1) = common::quadrature_masses(&c);
        let disc = Discretization::new(c).unwrap();
        for (k, q) in [(0, q0), (1, q1)] {
            let m = &disc.mass(k, Flavor::Feec).unwrap().matrix;
            let scale = m.max_abs();
            for (i, row) in q.iter().enumerate() {
                for (j, want) in row.iter().enumerate() {
                    let got = m.get(i, j);
                    assert!((got - want).abs() <= 1e-10 * scale, "{name}: M{k}[{i}][{j}] {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn dual_measures_match_polygon_decomposition() {
    for (name, c) in common::all_meshes() {
        let (area, ratio) = common::polygon_dual(&c);
        let disc = Discretization::new(c).unwrap();
        for (v, want) in area.iter().enumerate() {
            assert!((disc.duals.vertex_area[v] - want).abs() <= 1e-10 * want.abs().max(1e-3), "{name}: vertex {v}");
        }
        for (e, want) in ratio.iter().enumerate() {
            assert!((disc.duals.edge_ratio[e] - want).abs() <= 1e-10 * want.abs().max(1.0), "{name}: edge {e}");
        }
    }
}

#[test]
fn coboundaries_compose_to_zero() {
    for (name, c) in common::all_meshes() {
        let disc = Discretization::new(c).unwrap();
        let dd = disc.coboundary(1).unwrap().matmul(disc.coboundary(0).unwrap());
        assert_eq!(dd.max_abs(), 0.0, "{name}");
    }
}

#[test]
fn delaunay_has_empty_circumcircles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..5 {
        let pts: Vec<[f64; 2]> = (0..60 + 40 * round).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mesh = delaunay_triangulate(&pts, None).unwrap();
        let c = &mesh.complex;
        assert_eq!(c.euler_characteristic(), 1);
        for t in 0..c.n_triangles() {
            let p = c.triangle_points(t);
            let g = dec2d::geometry::TriangleGeometry::new(&p);
            for q in c.coords() {
                let d = ((q[0] - g.circumcenter[0]).powi(2) + (q[1] - g.circumcenter[1]).powi(2)).sqrt();
                assert!(d >= g.circumradius * (1.0 - 1e-9), "round {round}: point inside circumcircle of {t}");
            }
        }
    }
}
