//! Discrete harmonic forms, Hodge decomposition and the map taking
//! DEC-harmonic cochains to FEEC-harmonic ones.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, numerical_rank, singular_values, LinearOperator, SparseLu, Symmetry};
use crate::mesh::{Cochain, SimplicialComplex2};
use crate::operators::{Discretization, Flavor, Positivity};

/// Relative threshold below which singular values count as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Relative size of `d p̂` above which a cochain is not treated as closed.
pub const CLOSED_TOL: f64 = 1e-8;

/// Basis of ker d_k ∩ (im d_{k−1})^⊥, orthonormal in the flavor's inner
/// product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBasis {
    pub k: usize,
    pub flavor: Flavor,
    pub basis: Vec<Cochain>,
}

impl HarmonicBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Coefficients of the M-orthogonal projection of `u` onto the span.
    pub fn coefficients(&self, mass: &LinearOperator, u: &[f64]) -> Vec<f64> {
        let mu = mass.apply(u);
        self.basis.iter().map(|q| dot(&q.values, &mu)).collect()
    }

    /// Σ c_i q_i.
    pub fn combine(&self, coeffs: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (q, c) in self.basis.iter().zip(coeffs) {
            for (o, v) in out.iter_mut().zip(&q.values) {
                *o += c * v;
            }
        }
        out
    }
}

/// Components of a Hodge decomposition u = u_B + u_perp + u_H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HodgeDecomposition {
    pub exact: Cochain,
    pub coexact: Cochain,
    pub harmonic: Cochain,
}

fn require_positive(disc: &Discretization, k: usize, flavor: Flavor) -> Result<&LinearOperator> {
    let mass = disc.mass(k, flavor)?;
    if mass.positivity != Positivity::PositiveDefinite {
        return Err(Error::IndefiniteStar(k));
    }
    Ok(&mass.matrix)
}

/// Closed 1-cochains, one per independent cycle, that vanish on a spanning
/// forest of the primal graph. Built with a tree-cotree split: edges left
/// over after a primal spanning forest and a dual spanning forest (rooted
/// at a virtual node outside the boundary) generate the first cohomology.
pub fn cycle_generators(complex: &SimplicialComplex2) -> Vec<Vec<f64>> {
    let (nv, ne, nt) = (complex.n_vertices(), complex.n_edges(), complex.n_triangles());
    let mut adj = vec![Vec::new(); nv];
    for (e, [a, b]) in complex.edges().iter().copied().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut in_tree = vec![false; ne];
    let mut seen = vec![false; nv];
    for start in 0..nv {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    in_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    // Dual forest over edges outside the primal forest. Node `nt` is the
    // virtual outside node reached through boundary edges.
    let virtual_node = nt;
    let mut dual_adj = vec![Vec::new(); nt + 1];
    for e in (0..ne).filter(|&e| !in_tree[e]) {
        match complex.edge_triangles(e) {
            [t] => {
                dual_adj[*t].push((virtual_node, e));
                dual_adj[virtual_node].push((*t, e));
            }
            [s, t] => {
                dual_adj[*s].push((*t, e));
                dual_adj[*t].push((*s, e));
            }
            _ => {}
        }
    }
    let mut in_cotree = vec![false; ne];
    let mut parent_edge = vec![usize::MAX; nt + 1];
    let mut visited = vec![false; nt + 1];
    let mut order = Vec::with_capacity(nt + 1);
    let roots = std::iter::once(virtual_node).chain(0..nt);
    for root in roots {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(node) = queue.pop_front() {
            order.push(node);
            for &(other, e) in &dual_adj[node] {
                if !visited[other] {
                    visited[other] = true;
                    in_cotree[e] = true;
                    parent_edge[other] = e;
                    queue.push_back(other);
                }
            }
        }
    }

    let generators: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
    generators
        .into_iter()
        .map(|g| {
            let mut z = vec![0.0; ne];
            z[g] = 1.0;
            // Leaves first: each triangle fixes its parent edge so that the
            // oriented sum around it vanishes.
            for &t in order.iter().rev() {
                if t == virtual_node || parent_edge[t] == usize::MAX {
                    continue;
                }
                let edges = complex.triangle_edges(t);
                let signs = complex.triangle_edge_signs(t);
                let pe = parent_edge[t];
                let mut sum = 0.0;
                let mut pe_sign = 0.0;
                for (e, s) in edges.iter().zip(signs) {
                    if *e == pe {
                        pe_sign = s as f64;
                    } else {
                        sum += s as f64 * z[*e];
                    }
                }
                z[pe] = -sum / pe_sign;
            }
            z
        })
        .collect()
}

/// Solves min ‖z − d_0 ρ‖_M over ρ and returns d_0 ρ, for a mass operator
/// `m1` on 1-cochains. The gauge freedom (constants per component) is
/// removed by pinning ρ to zero at one vertex of each component.
pub struct ExactProjector {
    d0: LinearOperator,
    m1: LinearOperator,
    lu: SparseLu,
    pinned: Vec<bool>,
}

impl ExactProjector {
    pub fn new(disc: &Discretization, m1: &LinearOperator) -> Result<Self> {
        let d0 = disc.coboundary(0).expect("d0 exists").clone();
        let k = m1.congruence(&d0);
        let (labels, ncomp) = disc.complex.vertex_components();
        let nv = disc.dim(0);
        let mut pinned = vec![false; nv];
        let mut done = vec![false; ncomp];
        for (v, &c) in labels.iter().enumerate() {
            if !done[c] {
                done[c] = true;
                pinned[v] = true;
            }
        }
        let trips = k
            .triplets()
            .filter(|&(r, c, _)| !pinned[r] && !pinned[c])
            .chain((0..nv).filter(|&v| pinned[v]).map(|v| (v, v, 1.0)));
        let lu = SparseLu::new(&LinearOperator::from_triplets(nv, nv, trips, Symmetry::Symmetric))?;
        Ok(Self { d0, m1: m1.clone(), lu, pinned })
    }

    /// Returns (ρ, d_0 ρ).
    pub fn project(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rhs = self.d0.apply_transpose(&self.m1.apply(z));
        for (r, &p) in rhs.iter_mut().zip(&self.pinned) {
            if p {
                *r = 0.0;
            }
        }
        let rho = self.lu.solve(&rhs);
        let exact = self.d0.apply(&rho);
        (rho, exact)
    }
}

fn gram_schmidt(mass: &LinearOperator, vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        // Two passes keep orthogonality near machine precision.
        for _ in 0..2 {
            for q in &out {
                let c = mass.bilinear(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = mass.bilinear(&v, &v).sqrt();
        if n > 0.0 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Harmonic k-cochains in the given flavor.
pub fn harmonic_basis(disc: &Discretization, k: usize, flavor: Flavor) -> Result<HarmonicBasis> {
    let complex = &disc.complex;
    let mass = require_positive(disc, k, flavor)?;
    let raw: Vec<Vec<f64>> = match k {
        0 => {
            let (labels, ncomp) = complex.vertex_components();
            (0..ncomp)
                .map(|c| labels.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect())
                .collect()
        }
        1 => {
            let projector = ExactProjector::new(disc, mass)?;
            cycle_generators(complex)
                .into_iter()
                .map(|z| {
                    let (_, exact) = projector.project(&z);
                    z.iter().zip(&exact).map(|(a, b)| a - b).collect()
                })
                .collect()
        }
        2 => closed_component_indicators(complex)
            .into_iter()
            .map(|c| solve_diagonal_or_sparse(mass, &c))
            .collect::<Result<_>>()?,
        _ => return Err(Error::InvalidDegree(k)),
    };
    let basis = gram_schmidt(mass, raw);
    let expected = complex.betti_numbers()[k];
    if basis.len() != expected {
        return Err(Error::MissingHarmonicBasis { expected, found: basis.len() });
    }
    let basis = basis.into_iter().map(|values| Cochain { degree: k, values }).collect();
    Ok(HarmonicBasis { k, flavor, basis })
}

/// 2-chains with zero boundary: the consistently oriented triangle sets of
/// components without boundary.
fn closed_component_indicators(complex: &SimplicialComplex2) -> Vec<Vec<f64>> {
    let (labels, ncomp) = complex.vertex_components();
    let mut has_boundary = vec![false; ncomp];
    for (e, edge) in complex.edges().iter().enumerate() {
        if complex.is_boundary_edge(e) {
            has_boundary[labels[edge[0]]] = true;
        }
    }
    (0..ncomp)
        .filter(|&c| !has_boundary[c])
        .filter_map(|c| {
            let v: Vec<f64> = complex
                .triangles()
                .iter()
                .map(|tri| if labels[tri[0]] == c { 1.0 } else { 0.0 })
                .collect();
            v.iter().any(|&x| x != 0.0).then_some(v)
        })
        .collect()
}

fn solve_diagonal_or_sparse(mass: &LinearOperator, rhs: &[f64]) -> Result<Vec<f64>> {
    if mass.is_diagonal() {
        Ok(mass.diagonal_values().iter().zip(rhs).map(|(m, r)| r / m).collect())
    } else {
        Ok(SparseLu::new(mass)?.solve(rhs))
    }
}

/// Splits `u` into exact, coexact and harmonic parts, orthogonal in the
/// flavor's inner product.
pub fn hodge_decompose(disc: &Discretization, u: &Cochain, flavor: Flavor) -> Result<HodgeDecomposition> {
    let k = u.degree;
    let n = disc.complex.n_simplices(k)?;
    if u.len() != n {
        return Err(Error::CochainLength { degree: k, expected: n, found: u.len() });
    }
    let mass = require_positive(disc, k, flavor)?;
    let harmonic = harmonic_basis(disc, k, flavor)?;
    let u_h = harmonic.combine(&harmonic.coefficients(mass, &u.values), n);
    let u_b = match k {
        0 => vec![0.0; n],
        1 => ExactProjector::new(disc, mass)?.project(&u.values).1,
        // Every 2-cochain is closed, so whatever is not harmonic is exact.
        _ => u.values.iter().zip(&u_h).map(|(a, b)| a - b).collect(),
    };
    let u_perp: Vec<f64> = (0..n).map(|i| u.values[i] - u_b[i] - u_h[i]).collect();
    Ok(HodgeDecomposition {
        exact: Cochain { degree: k, values: u_b },
        coexact: Cochain { degree: k, values: u_perp },
        harmonic: Cochain { degree: k, values: u_h },
    })
}

/// Maps a closed cochain to its FEEC-harmonic part: the component left after
/// removing the FEEC-orthogonal projection onto exact cochains.
pub fn pi_h_map(disc: &Discretization, p_hat: &Cochain) -> Result<Cochain> {
    let k = p_hat.degree;
    if let Some(d) = disc.coboundary(k) {
        let dp = d.apply(&p_hat.values);
        let scale = p_hat.values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let residual = dp.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if residual > CLOSED_TOL * scale {
            return Err(Error::NotClosed(residual));
        }
    }
    let parts = hodge_decompose(disc, p_hat, Flavor::Feec)?;
    let values = p_hat.values.iter().zip(&parts.exact.values).map(|(a, b)| a - b).collect();
    Ok(Cochain { degree: k, values })
}

/// Dimensions of the DEC- and FEEC-harmonic spaces and the rank of the
/// image of the DEC basis under [`pi_h_map`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiHRank {
    pub dec_dimension: usize,
    pub feec_dimension: usize,
    pub image_rank: usize,
}

pub fn pi_h_rank(disc: &Discretization, k: usize) -> Result<PiHRank> {
    let dec = harmonic_basis(disc, k, Flavor::Dec)?;
    let feec = harmonic_basis(disc, k, Flavor::Feec)?;
    let images: Vec<Cochain> = dec.basis.iter().map(|p| pi_h_map(disc, p)).collect::<Result<_>>()?;
    let n = disc.dim(k);
    let mat = faer::Mat::<f64>::from_fn(n, images.len(), |i, j| images[j].values[i]);
    Ok(PiHRank {
        dec_dimension: dec.dimension(),
        feec_dimension: feec.dimension(),
        image_rank: numerical_rank(&mat, RANK_TOL)?,
    })
}

/// Betti numbers from dense ranks of the coboundaries. Cubic in the mesh
/// size; intended as a cross-check on small meshes.
pub fn numerical_betti(disc: &Discretization) -> Result<[usize; 3]> {
    let rank = |op: &LinearOperator| -> Result<usize> {
        let sv = singular_values(&op.to_dense())?;
        let max = sv.first().copied().unwrap_or(0.0);
        Ok(sv.iter().filter(|&&s| s > RANK_TOL * max).count())
    };
    let r0 = rank(disc.coboundary(0).expect("d0"))?;
    let r1 = rank(disc.coboundary(1).expect("d1"))?;
    Ok([disc.dim(0) - r0, disc.dim(1) - r1 - r0, disc.dim(2) - r1])
}
