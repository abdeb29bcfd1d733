//! Diagonal DEC Hodge stars and Whitney-form (FEEC) mass matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_dual_measures, triangle_geometries, DualMeasures, TriangleGeometry};
use crate::linalg::{is_positive_definite, LinearOperator, Symmetry};
use crate::mesh::forms::barycentric_gradients;
use crate::mesh::{coboundary, SimplicialComplex2};

/// Which inner product on cochains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Diagonal circumcentric Hodge star.
    Dec,
    /// L² inner product of Whitney forms.
    Feec,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dec => "dec",
            Self::Feec => "feec",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    PositiveDefinite,
    /// Positive semidefinite with some zero diagonal entries.
    Singular,
    Indefinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassOperator {
    pub degree: usize,
    pub flavor: Flavor,
    pub matrix: LinearOperator,
    pub positivity: Positivity,
}

/// Relative size below which a diagonal star entry counts as zero.
const ZERO_STAR_TOL: f64 = 1e-14;

fn diagonal_positivity(values: &[f64]) -> Positivity {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if values.iter().any(|&v| v < -ZERO_STAR_TOL * scale) {
        Positivity::Indefinite
    } else if values.iter().any(|&v| v <= ZERO_STAR_TOL * scale) {
        Positivity::Singular
    } else {
        Positivity::PositiveDefinite
    }
}

/// Diagonal DEC Hodge star of degree `k`: signed dual areas for k = 0,
/// dual/primal length ratios (Σ cot θ / 2) for k = 1 and 1/area for k = 2.
/// Negative entries are kept as they are and reported through `positivity`.
pub fn dec_hodge_star(complex: &SimplicialComplex2, duals: &DualMeasures, geometry: &[TriangleGeometry], k: usize) -> Result<MassOperator> {
    let values: Vec<f64> = match k {
        0 => duals.vertex_area.clone(),
        1 => duals.edge_ratio.clone(),
        2 => geometry.iter().map(|g| 1.0 / g.area).collect(),
        _ => return Err(Error::InvalidDegree(k)),
    };
    debug_assert_eq!(values.len(), complex.n_simplices(k)?);
    Ok(MassOperator {
        degree: k,
        flavor: Flavor::Dec,
        positivity: diagonal_positivity(&values),
        matrix: LinearOperator::diagonal(&values),
    })
}

/// `⟨dλ_i, dλ_j⟩` for one triangle from its angles: |e_i|²/(4μ²) on the
/// diagonal and -cot θ_k/(2μ) off it.
pub fn gradient_products(g: &TriangleGeometry) -> [[f64; 3]; 3] {
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        h[i][i] = g.sides[i] * g.sides[i] / (4.0 * g.area * g.area);
        for j in 0..3 {
            if i != j {
                let k = 3 - i - j;
                h[i][j] = -g.cot[k] / (2.0 * g.area);
            }
        }
    }
    h
}

/// Element mass matrix of the Whitney k-forms of triangle `t`, indexed by
/// local vertices (k = 0), local edges opposite each vertex (k = 1) or the
/// triangle itself (k = 2).
pub fn feec_element_mass(complex: &SimplicialComplex2, geometry: &[TriangleGeometry], t: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    let g = &geometry[t];
    let mu = g.area;
    match k {
        0 => Ok((0..3)
            .map(|i| (0..3).map(|j| if i == j { mu / 6.0 } else { mu / 12.0 }).collect())
            .collect()),
        1 => {
            let h = gradient_products(g);
            let tri = complex.triangle(t);
            // Local (a, b) with tri[a] < tri[b] for the edge opposite each vertex.
            let ends: Vec<(usize, usize)> = (0..3)
                .map(|i| {
                    let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                    if tri[a] < tri[b] { (a, b) } else { (b, a) }
                })
                .collect();
            let lam = |p: usize, q: usize| if p == q { mu / 6.0 } else { mu / 12.0 };
            Ok((0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            let (a, b) = ends[i];
                            let (c, d) = ends[j];
                            lam(a, c) * h[b][d] - lam(a, d) * h[b][c] - lam(b, c) * h[a][d] + lam(b, d) * h[a][c]
                        })
                        .collect()
                })
                .collect())
        }
        2 => Ok(vec![vec![1.0 / mu]]),
        _ => Err(Error::InvalidDegree(k)),
    }
}

/// Global FEEC mass matrix of degree `k`.
pub fn feec_mass_matrix(complex: &SimplicialComplex2, geometry: &[TriangleGeometry], k: usize) -> Result<MassOperator> {
    let n = complex.n_simplices(k)?;
    let mut trips = Vec::with_capacity(9 * complex.n_triangles());
    for t in 0..complex.n_triangles() {
        let local = feec_element_mass(complex, geometry, t, k)?;
        let ids: Vec<usize> = match k {
            0 => complex.triangle(t).to_vec(),
            1 => complex.triangle_edges(t).to_vec(),
            _ => vec![t],
        };
        for (i, &gi) in ids.iter().enumerate() {
            for (j, &gj) in ids.iter().enumerate() {
                trips.push((gi, gj, local[i][j]));
            }
        }
    }
    let matrix = LinearOperator::from_triplets(n, n, trips, Symmetry::Symmetric);
    let positivity = if is_positive_definite(&matrix) {
        Positivity::PositiveDefinite
    } else {
        Positivity::Indefinite
    };
    Ok(MassOperator { degree: k, flavor: Flavor::Feec, matrix, positivity })
}

/// P1 stiffness matrix assembled from barycentric gradient vectors.
pub fn scalar_stiffness(complex: &SimplicialComplex2) -> LinearOperator {
    let n = complex.n_vertices();
    let mut trips = Vec::with_capacity(9 * complex.n_triangles());
    for t in 0..complex.n_triangles() {
        let p = complex.triangle_points(t);
        let grads = barycentric_gradients(&p);
        let area = crate::mesh::forms::triangle_area(&p);
        let tri = complex.triangle(t);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|c| grads[i][c] * grads[j][c]).sum();
                trips.push((tri[i], tri[j], area * dot));
            }
        }
    }
    LinearOperator::from_triplets(n, n, trips, Symmetry::Symmetric)
}

/// Outcome of comparing the lumped scalar stiffness against the DEC 1-star.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LumpingCheck {
    /// -Σ_T ∫⟨dλ_i, dλ_j⟩ per edge [i, j], from gradient vectors.
    pub lumped: Vec<f64>,
    pub star1: Vec<f64>,
    /// Largest entrywise |lumped - star1| / max(|lumped|, |star1|).
    pub max_relative_difference: f64,
    /// max |d0ᵀ M1 d0 - K| / max |K| with K the assembled stiffness.
    pub stiffness_relative_difference: f64,
}

pub fn lumped_mass_and_star1_check(complex: &SimplicialComplex2, star1: &MassOperator) -> LumpingCheck {
    let stiffness = scalar_stiffness(complex);
    let lumped: Vec<f64> = complex.edges().iter().map(|&[a, b]| -stiffness.get(a, b)).collect();
    let star: Vec<f64> = star1.matrix.diagonal_values();
    let max_relative_difference = lumped
        .iter()
        .zip(&star)
        .map(|(l, s)| {
            let scale = l.abs().max(s.abs());
            if scale == 0.0 { 0.0 } else { (l - s).abs() / scale }
        })
        .fold(0.0, f64::max);
    let d0 = coboundary(complex, 0).expect("degree 0 is valid");
    let lumped_op = LinearOperator::diagonal(&lumped);
    let from_lumped = lumped_op.congruence(&d0);
    let stiffness_relative_difference = from_lumped.add_scaled(&stiffness, -1.0).max_abs() / stiffness.max_abs();
    LumpingCheck { lumped, star1: star, max_relative_difference, stiffness_relative_difference }
}

/// A complex together with its coboundaries and both families of mass
/// operators.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub complex: SimplicialComplex2,
    pub geometry: Vec<TriangleGeometry>,
    pub duals: DualMeasures,
    d: [LinearOperator; 2],
    dec: [MassOperator; 3],
    feec: [MassOperator; 3],
}

impl Discretization {
    pub fn new(complex: SimplicialComplex2) -> Result<Self> {
        let geometry = triangle_geometries(&complex);
        let duals = signed_dual_measures(&complex, &geometry);
        let d = [coboundary(&complex, 0)?, coboundary(&complex, 1)?];
        let dec = [
            dec_hodge_star(&complex, &duals, &geometry, 0)?,
            dec_hodge_star(&complex, &duals, &geometry, 1)?,
            dec_hodge_star(&complex, &duals, &geometry, 2)?,
        ];
        let feec = [
            feec_mass_matrix(&complex, &geometry, 0)?,
            feec_mass_matrix(&complex, &geometry, 1)?,
            feec_mass_matrix(&complex, &geometry, 2)?,
        ];
        Ok(Self { complex, geometry, duals, d, dec, feec })
    }

    /// Number of k-simplices (zero for k > 2).
    pub fn dim(&self, k: usize) -> usize {
        self.complex.n_simplices(k).unwrap_or(0)
    }

    pub fn mass(&self, k: usize, flavor: Flavor) -> Result<&MassOperator> {
        let set = match flavor {
            Flavor::Dec => &self.dec,
            Flavor::Feec => &self.feec,
        };
        set.get(k).ok_or(Error::InvalidDegree(k))
    }

    /// d_k for k = 0, 1; `None` for k = 2 where d is zero.
    pub fn coboundary(&self, k: usize) -> Option<&LinearOperator> {
        self.d.get(k)
    }

    /// d_k, with an explicit zero map for k = 2.
    pub fn coboundary_or_zero(&self, k: usize) -> LinearOperator {
        match self.d.get(k) {
            Some(d) => d.clone(),
            None => LinearOperator::zeros(0, self.dim(k)),
        }
    }

    /// Gram matrix of the graph inner product ⟨u, v⟩ + ⟨du, dv⟩.
    pub fn graph_gram(&self, k: usize, flavor: Flavor) -> Result<LinearOperator> {
        let m = &self.mass(k, flavor)?.matrix;
        match self.coboundary(k) {
            Some(d) => Ok(m.add_scaled(&self.mass(k + 1, flavor)?.matrix.congruence(d), 1.0)),
            None => Ok(m.clone()),
        }
    }

    pub fn lumping_check(&self) -> LumpingCheck {
        lumped_mass_and_star1_check(&self.complex, &self.dec[1])
    }
}
