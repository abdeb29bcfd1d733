//! Smooth forms, the de Rham map onto cochains and Whitney interpolation back.

use crate::error::{Error, Result};
use crate::mesh::{Cochain, SimplicialComplex2};

type ScalarField = Box<dyn Fn([f64; 3]) -> f64 + Send + Sync>;
type VectorField = Box<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// A smooth differential form given by a proxy field.
///
/// 1-forms are represented by their ambient vector proxy `F`, so the
/// integral over an edge is the line integral of `F·t`. 2-forms are a density
/// with respect to the area form of the stored triangle orientation.
pub enum AnalyticForm {
    Zero(ScalarField),
    One(VectorField),
    Two(ScalarField),
}

impl AnalyticForm {
    pub fn zero(f: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Zero(Box::new(f))
    }

    pub fn one(f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Self::One(Box::new(f))
    }

    pub fn two(f: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Two(Box::new(f))
    }

    pub fn degree(&self) -> usize {
        match self {
            Self::Zero(_) => 0,
            Self::One(_) => 1,
            Self::Two(_) => 2,
        }
    }
}

/// Five-point Gauss–Legendre rule on [-1, 1] as (node, weight).
pub const GAUSS_5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Symmetric six-point triangle rule, exact for polynomials of degree 4.
/// Barycentric points with weights summing to one.
pub const TRIANGLE_RULE: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_964_9;
    const B1: f64 = 0.108_103_018_168_070_2;
    const W1: f64 = 0.223_381_589_678_011_5;
    const A2: f64 = 0.091_576_213_509_770_74;
    const B2: f64 = 0.816_847_572_980_458_5;
    const W2: f64 = 0.109_951_743_655_321_9;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// How finely simplices are subdivided before the fixed rules are applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Quadrature {
    pub subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { subdivisions: 1 }
    }
}

fn lerp(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])]
}

fn combo(p: &[[f64; 3]; 3], w: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for (o, x) in out.iter_mut().zip(p[i]) {
            *o += w[i] * x;
        }
    }
    out
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Area of a triangle in R³.
pub fn triangle_area(p: &[[f64; 3]; 3]) -> f64 {
    let n = cross3(sub3(p[1], p[0]), sub3(p[2], p[0]));
    0.5 * dot3(n, n).sqrt()
}

/// Integral of `f(a + s(b - a))` over `s` in [0, 1].
pub fn integrate_segment(a: [f64; 3], b: [f64; 3], f: &dyn Fn([f64; 3]) -> f64, quad: Quadrature) -> f64 {
    let m = quad.subdivisions.max(1);
    let mut total = 0.0;
    for s in 0..m {
        let p = lerp(a, b, s as f64 / m as f64);
        let q = lerp(a, b, (s + 1) as f64 / m as f64);
        for &(x, w) in &GAUSS_5 {
            total += 0.5 * w * f(lerp(p, q, 0.5 * (x + 1.0)));
        }
    }
    total / m as f64
}

/// Calls `visit(point, weight)` for every node of the (subdivided) triangle
/// rule; weights sum to the triangle area.
pub fn for_each_triangle_node(p: &[[f64; 3]; 3], quad: Quadrature, mut visit: impl FnMut([f64; 3], f64)) {
    let m = quad.subdivisions.max(1);
    let area = triangle_area(p) / (m * m) as f64;
    let grid = |i: usize, j: usize| {
        let (s, t) = (i as f64 / m as f64, j as f64 / m as f64);
        combo(p, [1.0 - s - t, s, t])
    };
    let mut sub = |tri: [[f64; 3]; 3]| {
        for &(b, w) in &TRIANGLE_RULE {
            visit(combo(&tri, b), w * area);
        }
    };
    for i in 0..m {
        for j in 0..m - i {
            sub([grid(i, j), grid(i + 1, j), grid(i, j + 1)]);
            if i + j + 1 < m {
                sub([grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)]);
            }
        }
    }
}

/// Integrates a smooth form over every k-simplex.
pub fn de_rham_map(complex: &SimplicialComplex2, form: &AnalyticForm, quad: Quadrature) -> Result<Cochain> {
    let values: Vec<f64> = match form {
        AnalyticForm::Zero(f) => complex.coords().iter().map(|&p| f(p)).collect(),
        AnalyticForm::One(f) => complex
            .edges()
            .iter()
            .map(|&[a, b]| {
                let (pa, pb) = (complex.vertex(a), complex.vertex(b));
                let tangent = sub3(pb, pa);
                integrate_segment(pa, pb, &|x| dot3(f(x), tangent), quad)
            })
            .collect(),
        AnalyticForm::Two(f) => (0..complex.n_triangles())
            .map(|t| {
                let mut total = 0.0;
                for_each_triangle_node(&complex.triangle_points(t), quad, |x, w| total += w * f(x));
                total
            })
            .collect(),
    };
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::QuadratureFailure(bad));
    }
    Cochain::new(complex, form.degree(), values)
}

/// Gradients of the three barycentric coordinates of a triangle in R³.
pub fn barycentric_gradients(p: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let n = cross3(sub3(p[1], p[0]), sub3(p[2], p[0]));
    let nn = dot3(n, n);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        let e = sub3(p[(i + 2) % 3], p[(i + 1) % 3]);
        let g = cross3(n, e);
        out[i] = g.map(|x| x / nn);
    }
    out
}

/// Pointwise value of a Whitney form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WhitneyValue {
    /// A 0-form value or a 2-form density.
    Scalar(f64),
    /// The vector proxy of a 1-form.
    Vector([f64; 3]),
}

/// Tolerance on barycentric coordinates for [`whitney_evaluate`].
pub const BARYCENTRIC_TOL: f64 = 1e-12;

/// Evaluates the Whitney interpolant of `cochain` inside triangle `t` at the
/// point with barycentric coordinates `bary` (ordered like the stored vertices).
pub fn whitney_evaluate(complex: &SimplicialComplex2, cochain: &Cochain, t: usize, bary: [f64; 3]) -> Result<WhitneyValue> {
    let inside = bary.iter().all(|&b| (-BARYCENTRIC_TOL..=1.0 + BARYCENTRIC_TOL).contains(&b))
        && (bary.iter().sum::<f64>() - 1.0).abs() <= BARYCENTRIC_TOL;
    if !inside || t >= complex.n_triangles() {
        return Err(Error::OutOfTriangle(bary));
    }
    let tri = complex.triangle(t);
    Ok(match cochain.degree {
        0 => WhitneyValue::Scalar((0..3).map(|i| bary[i] * cochain.values[tri[i]]).sum()),
        1 => {
            let mut out = [0.0; 3];
            for (e, w) in whitney_one_form_basis(complex, t, bary) {
                for (o, x) in out.iter_mut().zip(w) {
                    *o += cochain.values[e] * x;
                }
            }
            WhitneyValue::Vector(out)
        }
        2 => WhitneyValue::Scalar(cochain.values[t] / triangle_area(&complex.triangle_points(t))),
        k => return Err(Error::InvalidDegree(k)),
    })
}

/// Vector proxies of the three Whitney 1-forms of triangle `t` at `bary`,
/// each paired with its global edge id. The form of edge `[a, b]` (a < b) is
/// `λ_a dλ_b - λ_b dλ_a`.
pub fn whitney_one_form_basis(complex: &SimplicialComplex2, t: usize, bary: [f64; 3]) -> [(usize, [f64; 3]); 3] {
    let tri = complex.triangle(t);
    let grads = barycentric_gradients(&complex.triangle_points(t));
    let edges = complex.triangle_edges(t);
    let mut out = [(0, [0.0; 3]); 3];
    for i in 0..3 {
        let (mut a, mut b) = ((i + 1) % 3, (i + 2) % 3);
        if tri[a] > tri[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let w = [0, 1, 2].map(|c| bary[a] * grads[b][c] - bary[b] * grads[a][c]);
        out[i] = (edges[i], w);
    }
    out
}

/// Integrals of a smooth form against every Whitney basis form of its degree.
pub fn whitney_moments(complex: &SimplicialComplex2, form: &AnalyticForm, quad: Quadrature) -> Result<Vec<f64>> {
    let n = complex.n_simplices(form.degree())?;
    let mut out = vec![0.0; n];
    for t in 0..complex.n_triangles() {
        let p = complex.triangle_points(t);
        let tri = complex.triangle(t);
        let area = triangle_area(&p);
        let mut failed = false;
        for_each_triangle_node(&p, quad, |x, w| {
            let bary = complex.barycentric(t, x);
            match form {
                AnalyticForm::Zero(f) => {
                    let v = f(x);
                    for i in 0..3 {
                        out[tri[i]] += w * v * bary[i];
                    }
                    failed |= !v.is_finite();
                }
                AnalyticForm::One(f) => {
                    let v = f(x);
                    for (e, basis) in whitney_one_form_basis(complex, t, bary) {
                        out[e] += w * dot3(v, basis);
                    }
                    failed |= !v.iter().all(|c| c.is_finite());
                }
                AnalyticForm::Two(f) => {
                    let v = f(x);
                    out[t] += w * v / area;
                    failed |= !v.is_finite();
                }
            }
        });
        if failed {
            return Err(Error::QuadratureFailure(t));
        }
    }
    Ok(out)
}
