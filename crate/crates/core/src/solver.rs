//! Mixed Hodge–Laplace problems with natural boundary conditions, and the
//! Poincaré and inf-sup constants of their discretizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::mesh_size;
use crate::hodge::{harmonic_basis, HarmonicBasis};
use crate::linalg::{generalized_eigenvalues, norm2, LinearOperator, SparseLu, Symmetry};
use crate::mesh::forms::whitney_moments;
use crate::mesh::{de_rham_map, AnalyticForm, Cochain, Quadrature};
use crate::operators::{Discretization, Flavor, Positivity};

/// Which harmonic space constrains the solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonicChoice {
    /// The harmonic space of the solve's own flavor.
    #[default]
    Own,
    /// FEEC-harmonic forms regardless of the solve's flavor.
    Feec,
}

/// How a smooth source is turned into discrete data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadKind {
    /// Integrate over simplices (de Rham map) and treat the result as a
    /// Whitney form.
    #[default]
    Interpolated,
    /// L² projection onto the Whitney space.
    Projected,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub harmonic: HarmonicChoice,
    pub load: LoadKind,
    pub quadrature: Quadrature,
}

/// Right-hand side of a solve.
pub enum Source<'a> {
    Form(&'a AnalyticForm),
    Cochain(&'a Cochain),
}

/// Symmetrized block system over (σ, u, p).
pub struct MixedSystem {
    pub k: usize,
    pub flavor: Flavor,
    pub matrix: LinearOperator,
    pub harmonic: HarmonicBasis,
    /// Sizes of the σ, u and p blocks.
    pub blocks: [usize; 3],
    mass_k: LinearOperator,
}

impl MixedSystem {
    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Load vector for a discrete source `f_h`: zero except ⟨f_h, v⟩ in the
    /// u block.
    pub fn rhs(&self, f_h: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let load = self.mass_k.apply(f_h);
        out[self.blocks[0]..self.blocks[0] + self.blocks[1]].copy_from_slice(&load);
        out
    }
}

fn positive_mass(disc: &Discretization, k: usize, flavor: Flavor) -> Result<&LinearOperator> {
    let m = disc.mass(k, flavor)?;
    if m.positivity != Positivity::PositiveDefinite {
        return Err(Error::IndefiniteStar(k));
    }
    Ok(&m.matrix)
}

fn push_block(trips: &mut Vec<(usize, usize, f64)>, op: &LinearOperator, row0: usize, col0: usize, factor: f64) {
    trips.extend(op.triplets().map(|(r, c, v)| (row0 + r, col0 + c, factor * v)));
}

/// Assembles
///
/// ```text
/// [ -M_{k-1}     d_{k-1}ᵀ M_k    0    ]
/// [ M_k d_{k-1}  d_kᵀ M_{k+1} d_k  M_k Q ]
/// [ 0            Qᵀ M_k          0    ]
/// ```
///
/// which is the mixed form with its first and third block rows negated.
pub fn assemble_mixed_system(disc: &Discretization, k: usize, flavor: Flavor, harmonic: HarmonicChoice) -> Result<MixedSystem> {
    if k > 2 {
        return Err(Error::InvalidDegree(k));
    }
    let m_k = positive_mass(disc, k, flavor)?.clone();
    let harmonic_flavor = match harmonic {
        HarmonicChoice::Own => flavor,
        HarmonicChoice::Feec => Flavor::Feec,
    };
    let basis = harmonic_basis(disc, k, harmonic_flavor)?;
    let expected = disc.complex.betti_numbers()[k];
    if basis.dimension() != expected {
        return Err(Error::MissingHarmonicBasis { expected, found: basis.dimension() });
    }
    let n_sigma = if k == 0 { 0 } else { disc.dim(k - 1) };
    let n_u = disc.dim(k);
    let n_p = basis.dimension();
    let mut trips = Vec::new();

    if k > 0 {
        let m_prev = positive_mass(disc, k - 1, flavor)?;
        let d_prev = disc.coboundary(k - 1).expect("k - 1 < 2");
        push_block(&mut trips, m_prev, 0, 0, -1.0);
        let md = m_k.matmul(d_prev);
        push_block(&mut trips, &md, n_sigma, 0, 1.0);
        push_block(&mut trips, &md.transpose(), 0, n_sigma, 1.0);
    }
    if let Some(d) = disc.coboundary(k) {
        let m_next = positive_mass(disc, k + 1, flavor)?;
        push_block(&mut trips, &m_next.congruence(d), n_sigma, n_sigma, 1.0);
    }
    for (j, q) in basis.basis.iter().enumerate() {
        let mq = m_k.apply(&q.values);
        for (i, v) in mq.into_iter().enumerate() {
            trips.push((n_sigma + i, n_sigma + n_u + j, v));
            trips.push((n_sigma + n_u + j, n_sigma + i, v));
        }
    }
    let n = n_sigma + n_u + n_p;
    let matrix = LinearOperator::from_triplets(n, n, trips, Symmetry::Symmetric);
    Ok(MixedSystem { k, flavor, matrix, harmonic: basis, blocks: [n_sigma, n_u, n_p], mass_k: m_k })
}

/// Solution of a mixed problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedSolution {
    pub k: usize,
    pub flavor: Flavor,
    pub sigma: Option<Cochain>,
    pub u: Cochain,
    /// Coefficients of p in the harmonic basis used by the solve.
    pub p_coeffs: Vec<f64>,
    /// p as a cochain.
    pub p: Cochain,
    /// The discrete source f_h.
    pub f_h: Cochain,
    /// ‖A x − b‖ / ‖b‖ (zero for a zero right-hand side).
    pub residual_norm: f64,
    /// Estimate of ‖A‖‖A⁻¹‖ in the Euclidean norm.
    pub system_condition_estimate: f64,
}

/// Relative residual above which the factorization is declared singular.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Discrete source for degree `k`.
pub fn discrete_source(disc: &Discretization, k: usize, source: &Source, options: &SolveOptions) -> Result<Cochain> {
    let f_h = match source {
        Source::Cochain(c) => (*c).clone(),
        Source::Form(form) => match options.load {
            LoadKind::Interpolated => de_rham_map(&disc.complex, form, options.quadrature)?,
            LoadKind::Projected => {
                let moments = whitney_moments(&disc.complex, form, options.quadrature)?;
                let lu = SparseLu::new(&disc.mass(form.degree(), Flavor::Feec)?.matrix)?;
                Cochain::new(&disc.complex, form.degree(), lu.solve(&moments))?
            }
        },
    };
    if f_h.degree != k {
        return Err(Error::DegreeMismatch(f_h.degree, k));
    }
    if f_h.len() != disc.dim(k) {
        return Err(Error::CochainLength { degree: k, expected: disc.dim(k), found: f_h.len() });
    }
    Ok(f_h)
}

pub fn solve_hodge_laplace(disc: &Discretization, k: usize, source: &Source, flavor: Flavor, options: &SolveOptions) -> Result<MixedSolution> {
    let f_h = discrete_source(disc, k, source, options)?;
    let system = assemble_mixed_system(disc, k, flavor, options.harmonic)?;
    let b = system.rhs(&f_h.values);
    let lu = SparseLu::new(&system.matrix).map_err(|e| singular_with_dimensions(&system, e))?;
    let x = lu.solve(&b);
    let ax = system.matrix.apply(&x);
    let b_norm = norm2(&b);
    let r_norm = norm2(&ax.iter().zip(&b).map(|(a, c)| a - c).collect::<Vec<_>>());
    let residual_norm = if b_norm > 0.0 { r_norm / b_norm } else { r_norm };
    if !residual_norm.is_finite() || residual_norm > RESIDUAL_TOL {
        return Err(singular_with_dimensions(&system, Error::SingularSystem(format!("relative residual {residual_norm:e}"))));
    }
    let [ns, nu, _] = system.blocks;
    let sigma = (k > 0).then(|| Cochain { degree: k - 1, values: x[..ns].to_vec() });
    let u = Cochain { degree: k, values: x[ns..ns + nu].to_vec() };
    let p_coeffs = x[ns + nu..].to_vec();
    let p = Cochain { degree: k, values: system.harmonic.combine(&p_coeffs, nu) };
    Ok(MixedSolution {
        k,
        flavor,
        sigma,
        u,
        p_coeffs,
        p,
        f_h,
        residual_norm,
        system_condition_estimate: condition_estimate(&system.matrix, &lu),
    })
}

fn singular_with_dimensions(system: &MixedSystem, err: Error) -> Error {
    Error::SingularSystem(format!(
        "{err}; blocks (σ, u, p) = {:?}, harmonic dimension {}",
        system.blocks,
        system.harmonic.dimension()
    ))
}

/// Power iteration for ‖A‖ and inverse iteration for ‖A⁻¹‖ on a symmetric
/// operator.
fn condition_estimate(a: &LinearOperator, lu: &SparseLu) -> f64 {
    const ITERATIONS: usize = 40;
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let start: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 37) % 11) as f64 / 11.0).collect();
    let grow = |apply: &dyn Fn(&[f64]) -> Vec<f64>| {
        let mut x = start.clone();
        let mut estimate = 0.0;
        for _ in 0..ITERATIONS {
            let nx = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            let y = apply(&x);
            estimate = norm2(&y);
            x = y;
        }
        estimate
    };
    grow(&|x| a.apply(x)) * grow(&|x| lu.solve(x))
}

/// ĉ_P: the largest ‖v‖_V / ‖dv‖_V over v orthogonal to ker d_k, with both
/// graph norms in the same flavor.
///
/// On that complement ‖v‖²_V / ‖dv‖²_V = 1 + 1/λ, where λ ranges over the
/// nonzero eigenvalues of the pencil (d_kᵀ M_{k+1} d_k, M_k); the zero
/// eigenvalues are exactly ker d_k, whose dimension is known from the Betti
/// numbers.
pub fn poincare_constant(disc: &Discretization, k: usize, flavor: Flavor) -> Result<f64> {
    let Some(d) = disc.coboundary(k) else {
        return Err(Error::EmptyComplement(k));
    };
    let m_k = positive_mass(disc, k, flavor)?;
    let m_next = positive_mass(disc, k + 1, flavor)?;
    let stiffness = m_next.congruence(d);
    let ev = generalized_eigenvalues(&stiffness.to_dense(), &m_k.to_dense())?;
    let betti = disc.complex.betti_numbers();
    let kernel = match k {
        0 => betti[0],
        // dim ker d_1 = N_1 − rank d_1 = N_1 − (N_2 − b_2).
        _ => disc.dim(1) - (disc.dim(2) - betti[2]),
    };
    let lambda = *ev.get(kernel).ok_or(Error::EmptyComplement(k))?;
    if lambda <= 0.0 {
        return Err(Error::EigenFailure(format!("nonpositive eigenvalue {lambda:e} on the complement of ker d")));
    }
    Ok((1.0 + 1.0 / lambda).sqrt())
}

/// Smallest nonzero eigenvalue of the pencil used by [`poincare_constant`];
/// for k = 0 in FEEC flavor it approximates the first Neumann eigenvalue.
pub fn first_nonzero_eigenvalue(disc: &Discretization, k: usize, flavor: Flavor) -> Result<f64> {
    let c = poincare_constant(disc, k, flavor)?;
    Ok(1.0 / (c * c - 1.0))
}

/// Block-diagonal V-norm Gram matrix of the (σ, u, p) product space.
pub fn product_space_gram(disc: &Discretization, system: &MixedSystem, flavor: Flavor) -> Result<LinearOperator> {
    let [ns, nu, np] = system.blocks;
    let mut trips = Vec::new();
    if system.k > 0 {
        push_block(&mut trips, &disc.graph_gram(system.k - 1, flavor)?, 0, 0, 1.0);
    }
    push_block(&mut trips, &disc.graph_gram(system.k, flavor)?, ns, ns, 1.0);
    // p is measured by ‖Q p‖ in the same flavor.
    let m_k = &disc.mass(system.k, flavor)?.matrix;
    for i in 0..np {
        let mqi = m_k.apply(&system.harmonic.basis[i].values);
        for j in 0..np {
            trips.push((ns + nu + i, ns + nu + j, crate::linalg::dot(&system.harmonic.basis[j].values, &mqi)));
        }
    }
    let n = ns + nu + np;
    Ok(LinearOperator::from_triplets(n, n, trips, Symmetry::Symmetric))
}

/// γ: the smallest singular value of the mixed bilinear form of `flavor`,
/// measured in V-norms of `norm_flavor`.
///
/// Negating block rows is an isometry of the product norm, so the singular
/// values of the original form equal the absolute eigenvalues of the pencil
/// (symmetrized system, V-norm Gram).
pub fn infsup_constant(disc: &Discretization, k: usize, flavor: Flavor, harmonic: HarmonicChoice, norm_flavor: Flavor) -> Result<f64> {
    let system = assemble_mixed_system(disc, k, flavor, harmonic)?;
    let gram = product_space_gram(disc, &system, norm_flavor)?;
    let ev = generalized_eigenvalues(&system.matrix.to_dense(), &gram.to_dense())?;
    Ok(ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min))
}

/// Stability constants of one mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub flavor: Flavor,
    pub k: usize,
    /// `None` for k = 2, where the complement of ker d is empty.
    pub poincare_constant: Option<f64>,
    pub infsup_constant: f64,
    pub h: f64,
}

pub fn stability_report(disc: &Discretization, k: usize, flavor: Flavor) -> Result<StabilityReport> {
    let poincare = match poincare_constant(disc, k, flavor) {
        Ok(c) => Some(c),
        Err(Error::EmptyComplement(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(StabilityReport {
        flavor,
        k,
        poincare_constant: poincare,
        infsup_constant: infsup_constant(disc, k, flavor, HarmonicChoice::Own, flavor)?,
        h: mesh_size(&disc.complex),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::family::equilateral_lattice;
    use crate::mesh::{generate_family, Domain, FamilyKind, FamilySpec};
    use crate::operators::scalar_stiffness;

    fn annulus() -> Discretization {
        let spec = FamilySpec::new(Domain::Annulus, FamilyKind::StructuredPerturbed, 1, 0.1, 3);
        Discretization::new(generate_family(&spec).unwrap().remove(0).complex).unwrap()
    }

    #[test]
    fn block_sizes_and_symmetry() {
        let disc = annulus();
        for k in 0..3 {
            for flavor in [Flavor::Dec, Flavor::Feec] {
                let s = assemble_mixed_system(&disc, k, flavor, HarmonicChoice::Own).unwrap();
                let ns = if k == 0 { 0 } else { disc.dim(k - 1) };
                assert_eq!(s.blocks, [ns, disc.dim(k), disc.complex.betti_numbers()[k]]);
                assert!(s.matrix.is_numerically_symmetric());
            }
        }
    }

    #[test]
    fn scalar_block_is_the_stiffness_matrix() {
        let disc = Discretization::new(equilateral_lattice(3).unwrap()).unwrap();
        let s = assemble_mixed_system(&disc, 0, Flavor::Dec, HarmonicChoice::Own).unwrap();
        let stiff = scalar_stiffness(&disc.complex);
        let n = disc.dim(0);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((s.matrix.get(i, j) - stiff.get(i, j)).abs());
            }
        }
        assert!(worst < 1e-12 * stiff.max_abs());
    }

    #[test]
    fn harmonic_source_gives_harmonic_solution() {
        let disc = annulus();
        for flavor in [Flavor::Dec, Flavor::Feec] {
            let q = harmonic_basis(&disc, 1, flavor).unwrap().basis.remove(0);
            let sol = solve_hodge_laplace(&disc, 1, &Source::Cochain(&q), flavor, &SolveOptions::default()).unwrap();
            assert!(norm2(&sol.u.values) < 1e-9 * norm2(&q.values));
            assert!(norm2(&sol.sigma.unwrap().values) < 1e-9 * norm2(&q.values));
            assert!((sol.p_coeffs[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn solution_is_orthogonal_to_harmonic_forms() {
        let disc = annulus();
        let f = AnalyticForm::one(|p| [p[1].sin(), (2.0 * p[0]).cos(), 0.0]);
        for flavor in [Flavor::Dec, Flavor::Feec] {
            let sol = solve_hodge_laplace(&disc, 1, &Source::Form(&f), flavor, &SolveOptions::default()).unwrap();
            let basis = harmonic_basis(&disc, 1, flavor).unwrap();
            let m = &disc.mass(1, flavor).unwrap().matrix;
            let c = basis.coefficients(m, &sol.u.values);
            assert!(c[0].abs() < 1e-8 * m.bilinear(&sol.u.values, &sol.u.values).sqrt());
            assert!(sol.residual_norm < 1e-10);
        }
    }

    #[test]
    fn unit_square_neumann_eigenvalue() {
        let spec = FamilySpec::new(Domain::Square, FamilyKind::StructuredPerturbed, 2, 0.0, 1);
        let fam = generate_family(&spec).unwrap();
        let mut errors = Vec::new();
        for level in fam {
            let disc = Discretization::new(level.complex).unwrap();
            let lambda = first_nonzero_eigenvalue(&disc, 0, Flavor::Feec).unwrap();
            errors.push(lambda - std::f64::consts::PI.powi(2));
        }
        // Conforming P1 overestimates and converges at second order.
        assert!(errors.iter().all(|&e| e > 0.0));
        assert!(errors[1] < errors[0] / 3.0);
    }

    #[test]
    fn complement_of_everything_is_empty() {
        let disc = annulus();
        assert!(matches!(poincare_constant(&disc, 2, Flavor::Feec), Err(Error::EmptyComplement(2))));
    }
}
