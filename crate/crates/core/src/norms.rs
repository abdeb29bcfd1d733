//! Inner products, norm-equivalence constants and inner-product
//! discrepancies between the DEC and FEEC mass operators.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_mesh, QualityTolerances};
use crate::geometry::mesh_size;
use crate::linalg::{generalized_eigenvalues, LinearOperator};
use crate::mesh::family::degenerate_pair;
use crate::mesh::{Cochain, MeshLevel};
use crate::operators::{feec_element_mass, Discretization, Flavor, Positivity};

/// Value of a bilinear form together with a flag telling whether the DEC
/// star involved was indefinite (the value is still a valid evaluation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerProduct {
    pub value: f64,
    pub indefinite_star: bool,
}

fn check_cochain(disc: &Discretization, u: &Cochain) -> Result<()> {
    let expected = disc.complex.n_simplices(u.degree)?;
    if u.len() != expected {
        return Err(Error::CochainLength { degree: u.degree, expected, found: u.len() });
    }
    Ok(())
}

/// `⟨u, v⟩` in the given flavor; with `graph` the term `⟨du, dv⟩` is added.
pub fn inner_product(disc: &Discretization, u: &Cochain, v: &Cochain, flavor: Flavor, graph: bool) -> Result<InnerProduct> {
    if u.degree != v.degree {
        return Err(Error::DegreeMismatch(u.degree, v.degree));
    }
    check_cochain(disc, u)?;
    check_cochain(disc, v)?;
    let k = u.degree;
    let mass = disc.mass(k, flavor)?;
    let mut value = mass.matrix.bilinear(&u.values, &v.values);
    let mut indefinite_star = mass.positivity != Positivity::PositiveDefinite;
    if graph {
        if let Some(d) = disc.coboundary(k) {
            let next = disc.mass(k + 1, flavor)?;
            value += next.matrix.bilinear(&d.apply(&u.values), &d.apply(&v.values));
            indefinite_star |= next.positivity != Positivity::PositiveDefinite;
        }
    }
    Ok(InnerProduct { value, indefinite_star })
}

/// Norm induced by [`inner_product`]. Negative squares (indefinite DEC
/// stars) come back as NaN.
pub fn norm(disc: &Discretization, u: &Cochain, flavor: Flavor, graph: bool) -> Result<f64> {
    Ok(inner_product(disc, u, u, flavor, graph)?.value.sqrt())
}

/// Extremes of ‖α‖²_D / ‖α‖²_F on one mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub k: usize,
    pub h: f64,
    /// Extreme eigenvalues of the pencil (DEC star, FEEC mass).
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Ratios of random cochains with standard normal entries.
    pub sample_ratios: Vec<f64>,
    /// Largest ratio over the cochains that are 1 on a single simplex.
    pub basis_ratio_max: f64,
    /// Smallest and largest eigenvalue over the per-triangle pencils.
    pub local_ratio_min: f64,
    pub local_ratio_max: f64,
    /// Smallest signed δ_T over the mesh.
    pub min_delta_t: f64,
    /// 3δ/(1 + 3δ) at δ = `min_delta_t`, the lower bound expected for k = 1
    /// on acute meshes.
    pub c1_bound: f64,
    pub dec_positive_definite: bool,
}

/// Lower norm-equivalence constant as a function of δ.
pub fn c1_of_delta(delta: f64) -> f64 {
    3.0 * delta / (1.0 + 3.0 * delta)
}

/// Pencil eigenvalues of (diag(`d`), `f`) for a small dense `f`.
fn small_pencil(d: &[f64], f: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = d.len();
    let a = Mat::<f64>::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 });
    let b = Mat::<f64>::from_fn(n, n, |i, j| f[i][j]);
    generalized_eigenvalues(&a, &b)
}

/// Eigenvalue range of the single-triangle pencil of degree `k`: corner
/// dual areas against the P1 element mass (k = 0) or the per-triangle
/// cotangent weights against the Whitney element mass (k = 1).
pub fn triangle_ratio_range(disc: &Discretization, t: usize, k: usize) -> Result<(f64, f64)> {
    let g = &disc.geometry[t];
    let local = feec_element_mass(&disc.complex, &disc.geometry, t, k)?;
    let diag: Vec<f64> = match k {
        0 => disc.duals.corner_area[t].to_vec(),
        1 => (0..3).map(|i| g.dual_edge_ratio(i)).collect(),
        2 => vec![1.0 / g.area],
        _ => return Err(Error::InvalidDegree(k)),
    };
    let ev = small_pencil(&diag, &local)?;
    Ok((ev[0], ev[ev.len() - 1]))
}

fn sample_seed(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Exact and sampled norm-equivalence constants of degree `k`.
pub fn norm_equivalence_constants(disc: &Discretization, k: usize, samples: usize, seed: u64) -> Result<NormReport> {
    let dec = disc.mass(k, Flavor::Dec)?;
    let feec = disc.mass(k, Flavor::Feec)?;
    let ev = generalized_eigenvalues(&dec.matrix.to_dense(), &feec.matrix.to_dense())?;
    let (ratio_min, ratio_max) = (ev[0], ev[ev.len() - 1]);

    let n = disc.dim(k);
    let sample_ratios: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = normal_vector(&mut sample_seed(seed, i), n);
            dec.matrix.bilinear(&x, &x) / feec.matrix.bilinear(&x, &x)
        })
        .collect();

    let dec_diag = dec.matrix.diagonal_values();
    let feec_diag = feec.matrix.diagonal_values();
    let basis_ratio_max = dec_diag.iter().zip(&feec_diag).map(|(d, f)| d / f).fold(f64::NEG_INFINITY, f64::max);

    let mut local_ratio_min = f64::INFINITY;
    let mut local_ratio_max = f64::NEG_INFINITY;
    for t in 0..disc.complex.n_triangles() {
        let (lo, hi) = triangle_ratio_range(disc, t, k)?;
        local_ratio_min = local_ratio_min.min(lo);
        local_ratio_max = local_ratio_max.max(hi);
    }
    let min_delta_t = disc.geometry.iter().map(|g| g.delta_t()).fold(f64::INFINITY, f64::min);
    Ok(NormReport {
        k,
        h: mesh_size(&disc.complex),
        ratio_min,
        ratio_max,
        sample_ratios,
        basis_ratio_max,
        local_ratio_min,
        local_ratio_max,
        min_delta_t,
        c1_bound: c1_of_delta(min_delta_t),
        dec_positive_definite: dec.positivity == Positivity::PositiveDefinite,
    })
}

/// Normalized inner-product discrepancy on one mesh level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub level: usize,
    pub h: f64,
    /// Max over random pairs of |⟨α,β⟩_D − ⟨α,β⟩_F| / (‖α‖_V ‖β‖_V).
    pub sampled_max: f64,
    /// The same quantity maximized over all pairs: the largest |λ| of the
    /// pencil (D − F, V-norm Gram).
    pub exact_sup: f64,
}

/// Exact supremum of the normalized discrepancy on one mesh.
pub fn discrepancy_sup(disc: &Discretization, k: usize) -> Result<f64> {
    let diff = disc.mass(k, Flavor::Dec)?.matrix.add_scaled(&disc.mass(k, Flavor::Feec)?.matrix, -1.0);
    if diff.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let gram = disc.graph_gram(k, Flavor::Feec)?;
    let ev = generalized_eigenvalues(&diff.to_dense(), &gram.to_dense())?;
    Ok(ev.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Largest normalized discrepancy over `samples` random pairs.
pub fn discrepancy_sampled(disc: &Discretization, k: usize, samples: usize, seed: u64) -> Result<f64> {
    let dec = &disc.mass(k, Flavor::Dec)?.matrix;
    let feec = &disc.mass(k, Flavor::Feec)?.matrix;
    let gram = disc.graph_gram(k, Flavor::Feec)?;
    let n = disc.dim(k);
    let worst = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_seed(seed, i);
            let a = normal_vector(&mut rng, n);
            let b = normal_vector(&mut rng, n);
            let scale = (gram.bilinear(&a, &a) * gram.bilinear(&b, &b)).sqrt();
            (dec.bilinear(&a, &b) - feec.bilinear(&a, &b)).abs() / scale
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Discrepancy table over a DEC-regular family.
pub fn ip_discrepancy_study(levels: &[MeshLevel], k: usize, samples: usize, seed: u64) -> Result<Vec<DiscrepancyRow>> {
    let tol = QualityTolerances::default();
    let mut rows = Vec::with_capacity(levels.len());
    for level in levels {
        let report = classify_mesh(&level.complex, &tol);
        if !report.flags.dec_regular {
            return Err(Error::FamilyNotDecRegular(format!(
                "level {}: {} non-Delaunay, {} cocircular, {} small-angle",
                level.level,
                report.violations.non_delaunay_edges.len(),
                report.violations.cocircular_edges.len(),
                report.violations.small_angle_triangles.len()
            )));
        }
        let disc = Discretization::new(level.complex.clone())?;
        rows.push(DiscrepancyRow {
            level: level.level,
            h: level.h,
            sampled_max: discrepancy_sampled(&disc, k, samples, seed.wrapping_add(level.level as u64))?,
            exact_sup: discrepancy_sup(&disc, k)?,
        });
    }
    Ok(rows)
}

/// One row of the degenerate-pair table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub eps: f64,
    pub dec_norm_sq: f64,
    pub feec_norm_sq: f64,
    pub ratio: f64,
}

/// Norms of the indicator cochain of the shared edge of two isosceles
/// triangles whose opposite angles sum to π − ε.
pub fn degenerate_pair_counterexample(eps_list: &[f64]) -> Result<Vec<CounterexampleRow>> {
    eps_list
        .iter()
        .map(|&eps| {
            let complex = degenerate_pair(eps)?;
            let shared = (0..complex.n_edges())
                .find(|&e| !complex.is_boundary_edge(e))
                .ok_or_else(|| Error::Triangulation("pair has no interior edge".into()))?;
            let disc = Discretization::new(complex)?;
            let dec = disc.mass(1, Flavor::Dec)?.matrix.get(shared, shared);
            let feec = disc.mass(1, Flavor::Feec)?.matrix.get(shared, shared);
            Ok(CounterexampleRow { eps, dec_norm_sq: dec, feec_norm_sq: feec, ratio: dec / feec })
        })
        .collect()
}

/// ‖α‖²_D on the degenerate pair in closed form: tan(ε/2).
pub fn degenerate_pair_dec_norm_sq(eps: f64) -> f64 {
    (0.5 * eps).tan()
}

/// Dense Gram matrix in the given flavor, plain or graph.
pub fn gram(disc: &Discretization, k: usize, flavor: Flavor, graph: bool) -> Result<LinearOperator> {
    if graph {
        disc.graph_gram(k, flavor)
    } else {
        Ok(disc.mass(k, flavor)?.matrix.clone())
    }
}
