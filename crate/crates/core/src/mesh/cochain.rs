use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, Symmetry};
use crate::mesh::SimplicialComplex2;

/// Real values on the oriented k-simplices of a complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(complex: &SimplicialComplex2, degree: usize, values: Vec<f64>) -> Result<Self> {
        let expected = complex.n_simplices(degree)?;
        if values.len() != expected {
            return Err(Error::CochainLength { degree, expected, found: values.len() });
        }
        Ok(Self { degree, values })
    }

    pub fn zeros(complex: &SimplicialComplex2, degree: usize) -> Result<Self> {
        Ok(Self { degree, values: vec![0.0; complex.n_simplices(degree)?] })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Value of a 1-cochain on the edge traversed from `from` to `to`.
pub fn edge_value(complex: &SimplicialComplex2, cochain: &Cochain, from: usize, to: usize) -> Option<f64> {
    let e = complex.edge_index(from, to)?;
    let v = cochain.values[e];
    Some(if from < to { v } else { -v })
}

/// Coboundary operator d_k: C^k -> C^{k+1} for k = 0, 1.
///
/// `d0` maps a vertex function to its differences along edges (head minus
/// tail); `d1` sums a 1-cochain around each triangle with signs from the
/// triangle orientation.
pub fn coboundary(complex: &SimplicialComplex2, k: usize) -> Result<LinearOperator> {
    match k {
        0 => {
            let trips = complex
                .edges()
                .iter()
                .enumerate()
                .flat_map(|(e, &[a, b])| [(e, a, -1.0), (e, b, 1.0)]);
            Ok(LinearOperator::from_triplets(
                complex.n_edges(),
                complex.n_vertices(),
                trips.collect::<Vec<_>>(),
                Symmetry::General,
            ))
        }
        1 => {
            let mut trips = Vec::with_capacity(3 * complex.n_triangles());
            for t in 0..complex.n_triangles() {
                let ids = complex.triangle_edges(t);
                let signs = complex.triangle_edge_signs(t);
                for i in 0..3 {
                    trips.push((t, ids[i], f64::from(signs[i])));
                }
            }
            Ok(LinearOperator::from_triplets(
                complex.n_triangles(),
                complex.n_edges(),
                trips,
                Symmetry::General,
            ))
        }
        _ => Err(Error::InvalidDegree(k)),
    }
}

/// Applies d_k to a cochain.
pub fn apply_coboundary(complex: &SimplicialComplex2, cochain: &Cochain) -> Result<Cochain> {
    let d = coboundary(complex, cochain.degree)?;
    Ok(Cochain { degree: cochain.degree + 1, values: d.apply(&cochain.values) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SimplicialComplex2 {
        SimplicialComplex2::from_planar(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.4]],
            &[[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
        )
        .unwrap()
    }

    #[test]
    fn d1_d0_vanishes_exactly() {
        let c = square();
        let d0 = coboundary(&c, 0).unwrap();
        let d1 = coboundary(&c, 1).unwrap();
        assert_eq!(d1.matmul(&d0).nnz(), 0);
        assert!(d0.triplets().chain(d1.triplets()).all(|(_, _, v)| v == 1.0 || v == -1.0));
    }

    #[test]
    fn invalid_degree() {
        assert!(matches!(coboundary(&square(), 2), Err(Error::InvalidDegree(2))));
    }

    #[test]
    fn stokes_on_triangle_boundary() {
        let c = square();
        let f = Cochain::new(&c, 0, vec![0.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        let df = apply_coboundary(&c, &f).unwrap();
        assert_eq!(edge_value(&c, &df, 4, 2), Some(-2.0));
        assert_eq!(edge_value(&c, &df, 2, 4), Some(2.0));
        let ddf = apply_coboundary(&c, &df).unwrap();
        assert!(ddf.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(matches!(
            Cochain::new(&square(), 1, vec![0.0; 3]),
            Err(Error::CochainLength { expected: 8, .. })
        ));
    }
}
