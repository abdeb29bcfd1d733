//! Mesh families with mesh size roughly halving per level.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mesh_size, TriangleGeometry};
use crate::mesh::delaunay::{delaunay_triangulate, Boundary};
use crate::mesh::SimplicialComplex2;

/// Inner and outer radius of the annulus domain.
pub const ANNULUS_RADII: (f64, f64) = (0.5, 1.0);
const MAX_ATTEMPTS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// The unit square.
    Square,
    /// The region between circles of radius 0.5 and 1 about the origin.
    Annulus,
    /// The graph of z = xy over the unit square.
    SurfaceSaddle,
    /// A 60° rhombus tiled by (nearly) equilateral triangles.
    Equilateral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Lattice points with interior points jittered, then Delaunay.
    StructuredPerturbed,
    /// Uniformly random interior points plus a regular boundary, then Delaunay.
    RandomDelaunay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub domain: Domain,
    pub kind: FamilyKind,
    pub levels: usize,
    /// Jitter radius as a fraction of the lattice spacing.
    pub perturbation: f64,
    pub seed: u64,
    /// Lattice subdivisions at level 0; doubles each level.
    pub base_resolution: usize,
    /// Structured meshes are regenerated with a new seed until every angle
    /// is at least this many degrees.
    pub min_angle_deg: Option<f64>,
}

impl FamilySpec {
    pub fn new(domain: Domain, kind: FamilyKind, levels: usize, perturbation: f64, seed: u64) -> Self {
        Self {
            domain,
            kind,
            levels,
            perturbation,
            seed,
            base_resolution: 4,
            min_angle_deg: (kind == FamilyKind::StructuredPerturbed).then_some(20.0),
        }
    }

    pub fn with_base_resolution(mut self, base: usize) -> Self {
        self.base_resolution = base;
        self
    }

    pub fn with_min_angle(mut self, deg: Option<f64>) -> Self {
        self.min_angle_deg = deg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::SpecInvalid("levels must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.perturbation) {
            return Err(Error::SpecInvalid(format!("perturbation {} outside [0, 0.5)", self.perturbation)));
        }
        if self.base_resolution == 0 {
            return Err(Error::SpecInvalid("base resolution must be positive".into()));
        }
        if self.base_resolution << (self.levels - 1) > 512 {
            return Err(Error::SpecInvalid("finest level is too large".into()));
        }
        Ok(())
    }
}

/// One member of a mesh family.
#[derive(Clone, Debug)]
pub struct MeshLevel {
    pub level: usize,
    pub resolution: usize,
    pub complex: SimplicialComplex2,
    /// Largest circumradius.
    pub h: f64,
    pub degenerate_delaunay: bool,
    /// Seed actually used (differs from the requested one after retries).
    pub seed: u64,
}

/// Generates `spec.levels` meshes of the same domain.
pub fn generate_family(spec: &FamilySpec) -> Result<Vec<MeshLevel>> {
    spec.validate()?;
    (0..spec.levels).map(|level| generate_level(spec, level)).collect()
}

/// Generates a single level of a family.
pub fn generate_level(spec: &FamilySpec, level: usize) -> Result<MeshLevel> {
    spec.validate()?;
    let n = spec.base_resolution << level;
    let base_seed = spec.seed.wrapping_add((level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let attempts = match (spec.kind, spec.min_angle_deg) {
        (FamilyKind::StructuredPerturbed, Some(_)) if spec.perturbation > 0.0 => MAX_ATTEMPTS,
        _ => 1,
    };
    let mut last_min = 0.0;
    for attempt in 0..attempts {
        let seed = base_seed.wrapping_add(attempt);
        let (complex, degenerate) = build_mesh(spec, n, seed)?;
        let min_angle = min_angle_deg(&complex);
        if attempts == 1 || min_angle >= spec.min_angle_deg.unwrap_or(0.0) {
            return Ok(MeshLevel {
                level,
                resolution: n,
                h: mesh_size(&complex),
                complex,
                degenerate_delaunay: degenerate,
                seed,
            });
        }
        last_min = min_angle;
    }
    Err(Error::SpecInvalid(format!(
        "no seed produced a minimum angle of {:?} degrees at level {level} (last {last_min:.2})",
        spec.min_angle_deg
    )))
}

fn min_angle_deg(c: &SimplicialComplex2) -> f64 {
    (0..c.n_triangles())
        .map(|t| TriangleGeometry::new(&c.triangle_points(t)).min_angle())
        .fold(f64::INFINITY, f64::min)
        .to_degrees()
}

/// Lattice points for a domain: (points, boundary, fixed flags, spacing).
struct Layout {
    points: Vec<[f64; 2]>,
    boundary: Boundary,
    on_boundary: Vec<bool>,
    spacing: f64,
}

fn square_layout(n: usize) -> Layout {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut points = Vec::new();
    let mut on_boundary = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            points.push([i as f64 / n as f64, j as f64 / n as f64]);
            on_boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut outer = Vec::new();
    outer.extend((0..n).map(|i| idx(i, 0)));
    outer.extend((0..n).map(|j| idx(n, j)));
    outer.extend((1..=n).rev().map(|i| idx(i, n)));
    outer.extend((1..=n).rev().map(|j| idx(0, j)));
    Layout { points, boundary: Boundary { outer, holes: Vec::new() }, on_boundary, spacing: 1.0 / n as f64 }
}

fn rhombus_layout(n: usize) -> Layout {
    let e1 = [1.0 / n as f64, 0.0];
    let e2 = [0.5 / n as f64, 0.75f64.sqrt() / n as f64];
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut points = Vec::new();
    let mut on_boundary = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            points.push([i as f64 * e1[0] + j as f64 * e2[0], j as f64 * e2[1]]);
            on_boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut outer = Vec::new();
    outer.extend((0..n).map(|i| idx(i, 0)));
    outer.extend((0..n).map(|j| idx(n, j)));
    outer.extend((1..=n).rev().map(|i| idx(i, n)));
    outer.extend((1..=n).rev().map(|j| idx(0, j)));
    Layout { points, boundary: Boundary { outer, holes: Vec::new() }, on_boundary, spacing: 1.0 / n as f64 }
}

fn annulus_layout(n: usize) -> Layout {
    let (r_in, r_out) = ANNULUS_RADII;
    let dr = (r_out - r_in) / n as f64;
    let target = 2.0 * dr / 3f64.sqrt();
    let mut points = Vec::new();
    let mut on_boundary = Vec::new();
    let mut rings = Vec::new();
    for j in 0..=n {
        let r = r_in + j as f64 * dr;
        let count = ((2.0 * PI * r / target).round() as usize).max(6);
        let offset = if j % 2 == 1 { 0.5 } else { 0.0 };
        let start = points.len();
        for k in 0..count {
            let theta = 2.0 * PI * (k as f64 + offset) / count as f64;
            points.push([r * theta.cos(), r * theta.sin()]);
            on_boundary.push(j == 0 || j == n);
        }
        rings.push((start..points.len()).collect::<Vec<_>>());
    }
    // A point at the centre keeps the inner ring from being cocircular with
    // nothing inside; its triangles all fall in the hole and are dropped.
    points.push([0.0, 0.0]);
    on_boundary.push(true);
    Layout {
        points,
        boundary: Boundary { outer: rings[n].clone(), holes: vec![rings[0].clone()] },
        on_boundary,
        spacing: dr,
    }
}

fn in_domain(domain: Domain, p: [f64; 2], margin: f64) -> bool {
    match domain {
        Domain::Square | Domain::SurfaceSaddle => {
            p[0] > margin && p[0] < 1.0 - margin && p[1] > margin && p[1] < 1.0 - margin
        }
        Domain::Annulus => {
            let r = p[0].hypot(p[1]);
            r > ANNULUS_RADII.0 + margin && r < ANNULUS_RADII.1 - margin
        }
        Domain::Equilateral => {
            let s3 = 3f64.sqrt();
            // Rhombus with corners (0,0), (1,0), (1.5, √3/2), (0.5, √3/2).
            let (x, y) = (p[0], p[1]);
            let d = margin;
            y > d && y < s3 / 2.0 - d && (s3 * x - y) / 2.0 > d && (s3 * (x - 1.0) - y) / 2.0 < -d
        }
    }
}

fn build_mesh(spec: &FamilySpec, n: usize, seed: u64) -> Result<(SimplicialComplex2, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = match spec.domain {
        Domain::Square | Domain::SurfaceSaddle => square_layout(n),
        Domain::Annulus => annulus_layout(n),
        Domain::Equilateral => rhombus_layout(n),
    };
    let radius = spec.perturbation * layout.spacing;
    let mut points = layout.points.clone();
    match spec.kind {
        FamilyKind::StructuredPerturbed => {
            for (p, &fixed) in points.iter_mut().zip(&layout.on_boundary) {
                if fixed || radius == 0.0 {
                    continue;
                }
                let r = radius * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                p[0] += r * theta.cos();
                p[1] += r * theta.sin();
            }
        }
        FamilyKind::RandomDelaunay => {
            let (lo, hi) = points.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), p| {
                ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
            });
            let interior = layout.on_boundary.iter().filter(|&&b| !b).count();
            // Keep only the boundary lattice points, renumbered.
            let mut remap = vec![usize::MAX; layout.points.len()];
            let mut kept: Vec<[f64; 2]> = Vec::new();
            for (i, (p, &b)) in layout.points.iter().zip(&layout.on_boundary).enumerate() {
                if b {
                    remap[i] = kept.len();
                    kept.push(*p);
                }
            }
            let mut added = 0;
            while added < interior {
                let p = [lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(), lo[1] + (hi[1] - lo[1]) * rng.random::<f64>()];
                if in_domain(spec.domain, p, 0.25 * layout.spacing) {
                    kept.push(p);
                    added += 1;
                }
            }
            let boundary = Boundary {
                outer: layout.boundary.outer.iter().map(|&i| remap[i]).collect(),
                holes: layout.boundary.holes.iter().map(|h| h.iter().map(|&i| remap[i]).collect()).collect(),
            };
            let mesh = delaunay_triangulate(&kept, Some(&boundary))?;
            return finish(spec.domain, mesh.complex, mesh.degenerate_delaunay);
        }
    }
    let mesh = delaunay_triangulate(&points, Some(&layout.boundary))?;
    finish(spec.domain, mesh.complex, mesh.degenerate_delaunay)
}

fn finish(domain: Domain, complex: SimplicialComplex2, degenerate: bool) -> Result<(SimplicialComplex2, bool)> {
    if domain != Domain::SurfaceSaddle {
        return Ok((complex, degenerate));
    }
    let coords = complex.coords().iter().map(|p| [p[0], p[1], p[0] * p[1]]).collect();
    Ok((SimplicialComplex2::new(coords, complex.triangles())?, degenerate))
}

/// Unperturbed equilateral lattice on the 60° rhombus with `n` subdivisions.
pub fn equilateral_lattice(n: usize) -> Result<SimplicialComplex2> {
    let layout = rhombus_layout(n);
    Ok(delaunay_triangulate(&layout.points, Some(&layout.boundary))?.complex)
}

/// Right-isosceles triangulation of the unit square with diagonals
/// alternating from cell to cell.
pub fn criss_cross_lattice(n: usize) -> Result<SimplicialComplex2> {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let points: Vec<[f64; 2]> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [i as f64 / n as f64, j as f64 / n as f64]))
        .collect();
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.extend([[a, b, c], [a, c, d]]);
            } else {
                tris.extend([[a, b, d], [b, c, d]]);
            }
        }
    }
    SimplicialComplex2::from_planar(&points, &tris)
}

/// Two isosceles triangles on the shared edge from (-1, 0) to (1, 0) with
/// apex angles `top` and `bottom` (radians).
pub fn triangle_pair(top: f64, bottom: f64) -> Result<SimplicialComplex2> {
    let h_top = 1.0 / (0.5 * top).tan();
    let h_bottom = 1.0 / (0.5 * bottom).tan();
    SimplicialComplex2::from_planar(
        &[[-1.0, 0.0], [1.0, 0.0], [0.0, h_top], [0.0, -h_bottom]],
        &[[0, 1, 2], [0, 3, 1]],
    )
}

/// Symmetric pair whose apex angles sum to π − ε, so the shared edge
/// approaches Delaunay degeneracy as ε → 0.
pub fn degenerate_pair(eps: f64) -> Result<SimplicialComplex2> {
    let apex = 0.5 * (PI - eps);
    triangle_pair(apex, apex)
}

/// The degenerate pair (scaled by 1/2) inside a fixed triangulated square
/// [-1, 1]². Only the shared diagonal degenerates as ε → 0.
pub fn embedded_degenerate_pair(eps: f64) -> Result<SimplicialComplex2> {
    let apex = 0.5 * (PI - eps);
    let t = 0.5 / (0.5 * apex).tan();
    let points = [
        [-0.5, 0.0],
        [0.5, 0.0],
        [0.0, t],
        [0.0, -t],
        [-1.0, -1.0],
        [0.0, -1.0],
        [1.0, -1.0],
        [1.0, 0.0],
        [1.0, 1.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [-1.0, 0.0],
    ];
    let tris = [
        [0, 1, 2],
        [0, 3, 1],
        // bottom half
        [4, 5, 3],
        [5, 6, 3],
        [6, 7, 1],
        [6, 1, 3],
        [4, 3, 0],
        [4, 0, 11],
        // top half
        [10, 2, 9],
        [9, 2, 8],
        [8, 2, 1],
        [8, 1, 7],
        [10, 0, 2],
        [10, 11, 0],
    ];
    SimplicialComplex2::from_planar(&points, &tris)
}
