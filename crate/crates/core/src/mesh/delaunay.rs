//! Incremental Delaunay triangulation (Bowyer–Watson with ghost triangles).
//!
//! Boundary segments that do not appear in the triangulation are split at
//! their midpoints until they do. Triangles outside the outer polygon or
//! inside a hole are discarded afterwards.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mesh::SimplicialComplex2;

const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;
const MAX_RECOVERY_ROUNDS: usize = 30;
/// Opposite-angle sums within this of π count as cocircular.
pub const COCIRCULAR_ANGLE_TOL: f64 = 1e-10;

/// Closed polygons, given as indices into the point list.
#[derive(Clone, Debug, Default)]
pub struct Boundary {
    pub outer: Vec<usize>,
    pub holes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct DelaunayMesh {
    pub complex: SimplicialComplex2,
    /// For each output vertex, the input point it came from (`None` for
    /// points inserted to recover boundary segments).
    pub source_point: Vec<Option<usize>>,
    /// Set when some interior edge has opposite angles summing to π, so the
    /// choice of diagonal was made by the tie-break rule.
    pub degenerate_delaunay: bool,
}

#[derive(Clone, Copy)]
struct Tri {
    v: [usize; 3],
    nb: [usize; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

struct Triangulation<'a> {
    pts: &'a [[f64; 2]],
    tris: Vec<Tri>,
    last: usize,
    eps_orient: f64,
    eps_circle: f64,
}

impl<'a> Triangulation<'a> {
    fn new(pts: &'a [[f64; 2]]) -> Result<Self> {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let diam = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
        if pts.len() < 3 || diam == 0.0 {
            return Err(Error::AllCollinear);
        }
        Ok(Self {
            pts,
            tris: Vec::new(),
            last: 0,
            eps_orient: 1e-14 * diam * diam,
            eps_circle: 1e-13 * diam.powi(4),
        })
    }

    fn p(&self, v: usize) -> [f64; 2] {
        self.pts[v]
    }

    /// Whether `x` lies strictly inside the circumcircle of `t` (for ghost
    /// triangles: strictly outside the hull edge, or on the open edge).
    fn in_circle(&self, t: usize, x: [f64; 2]) -> bool {
        let tri = &self.tris[t];
        if tri.is_ghost() {
            let (a, b) = (self.p(tri.v[0]), self.p(tri.v[1]));
            let o = orient(a, b, x);
            if o > self.eps_orient {
                return true;
            }
            if o < -self.eps_orient {
                return false;
            }
            let along = (x[0] - a[0]) * (b[0] - a[0]) + (x[1] - a[1]) * (b[1] - a[1]);
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            along > 0.0 && along < len2
        } else {
            let [a, b, c] = tri.v.map(|v| self.p(v));
            incircle(a, b, c, x) > self.eps_circle
        }
    }

    fn link(&mut self, ids: &[usize]) {
        let mut half: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &t in ids {
            for i in 0..3 {
                let v = self.tris[t].v;
                half.insert((v[(i + 1) % 3], v[(i + 2) % 3]), (t, i));
            }
        }
        for &t in ids {
            for i in 0..3 {
                let v = self.tris[t].v;
                if let Some(&(u, _)) = half.get(&(v[(i + 2) % 3], v[(i + 1) % 3])) {
                    self.tris[t].nb[i] = u;
                }
            }
        }
    }

    fn push(&mut self, mut v: [usize; 3]) -> usize {
        while v.contains(&GHOST) && v[2] != GHOST {
            v = [v[1], v[2], v[0]];
        }
        self.tris.push(Tri { v, nb: [NONE; 3], alive: true });
        self.tris.len() - 1
    }

    fn init(&mut self, order: &[usize]) -> Result<usize> {
        let a = order[0];
        let scale2 = |u: usize, w: usize| (self.p(u)[0] - self.p(w)[0]).powi(2) + (self.p(u)[1] - self.p(w)[1]).powi(2);
        let b_pos = order
            .iter()
            .position(|&u| scale2(u, a) > self.eps_orient)
            .ok_or(Error::AllCollinear)?;
        let b = order[b_pos];
        let c_pos = order
            .iter()
            .position(|&u| orient(self.p(a), self.p(b), self.p(u)).abs() > self.eps_orient)
            .ok_or(Error::AllCollinear)?;
        let c = order[c_pos];
        let (b, c) = if orient(self.p(a), self.p(b), self.p(c)) > 0.0 { (b, c) } else { (c, b) };
        let ids = [self.push([a, b, c]), self.push([b, a, GHOST]), self.push([c, b, GHOST]), self.push([a, c, GHOST])];
        self.link(&ids);
        self.last = ids[0];
        Ok(c_pos.max(b_pos))
    }

    fn locate(&self, x: [f64; 2]) -> usize {
        let mut t = if self.tris[self.last].alive { self.last } else { self.tris.iter().position(|t| t.alive && !t.is_ghost()).unwrap() };
        let mut rotate = 0usize;
        for _ in 0..4 * self.tris.len() + 16 {
            let tri = &self.tris[t];
            if tri.is_ghost() {
                return t;
            }
            let mut moved = false;
            for k in 0..3 {
                let i = (k + rotate) % 3;
                let (a, b) = (self.p(tri.v[(i + 1) % 3]), self.p(tri.v[(i + 2) % 3]));
                if orient(a, b, x) < -self.eps_orient {
                    t = tri.nb[i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
            rotate += 1;
        }
        // Walk did not settle; fall back to a scan.
        (0..self.tris.len())
            .find(|&t| self.tris[t].alive && self.in_circle(t, x))
            .expect("some triangle contains the point")
    }

    fn insert(&mut self, xi: usize) -> Result<()> {
        let x = self.p(xi);
        let seed = self.locate(x);
        if !self.tris[seed].is_ghost() {
            for v in self.tris[seed].v {
                let d = (self.p(v)[0] - x[0]).powi(2) + (self.p(v)[1] - x[1]).powi(2);
                if d <= self.eps_orient {
                    return Err(Error::Triangulation(format!("point {xi} duplicates point {v}")));
                }
            }
        }
        let mut cavity = vec![seed];
        let mut in_cavity: HashMap<usize, bool> = HashMap::from([(seed, true)]);
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for i in 0..3 {
                let n = self.tris[t].nb[i];
                if in_cavity.contains_key(&n) {
                    continue;
                }
                let inside = self.in_circle(n, x);
                in_cavity.insert(n, inside);
                if inside {
                    cavity.push(n);
                }
            }
        }
        let mut created = Vec::new();
        for &t in &cavity {
            for i in 0..3 {
                let n = self.tris[t].nb[i];
                if in_cavity.get(&n) == Some(&true) {
                    continue;
                }
                let v = self.tris[t].v;
                let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                let id = self.push([a, b, xi]);
                // Edge (a, b) sits opposite x wherever the rotation put it.
                let j = self.tris[id].v.iter().position(|&w| w == xi).unwrap();
                self.tris[id].nb[j] = n;
                let back = self.tris[n].nb.iter().position(|&w| w == t).unwrap();
                self.tris[n].nb[back] = id;
                created.push(id);
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
        }
        // Link the new fan around x.
        let mut half: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &t in &created {
            let v = self.tris[t].v;
            for i in 0..3 {
                let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                if a == xi || b == xi {
                    half.insert((a, b), (t, i));
                }
            }
        }
        for &t in &created {
            let v = self.tris[t].v;
            for i in 0..3 {
                let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                if a == xi || b == xi {
                    let (u, _) = half[&(b, a)];
                    self.tris[t].nb[i] = u;
                }
            }
        }
        self.last = created.iter().copied().find(|&t| !self.tris[t].is_ghost()).unwrap_or(created[0]);
        Ok(())
    }

    fn real_triangles(&self) -> Vec<[usize; 3]> {
        self.tris.iter().filter(|t| t.alive && !t.is_ghost()).map(|t| t.v).collect()
    }
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn triangulate_points(pts: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let mut tri = Triangulation::new(pts)?;
    let order: Vec<usize> = (0..pts.len()).collect();
    let skip = tri.init(&order)?;
    let [a, b, c] = tri.tris[0].v;
    for (k, &i) in order.iter().enumerate() {
        if k > skip || (i != a && i != b && i != c) {
            tri.insert(i)?;
        }
    }
    Ok(tri.real_triangles())
}

/// Interior angle at `c` in triangle (a, b, c).
fn angle_at(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let u = [a[0] - c[0], a[1] - c[1]];
    let v = [b[0] - c[0], b[1] - c[1]];
    (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1])
}

/// Flips cocircular diagonals toward the one whose smallest endpoint index is
/// smaller. Returns whether any cocircular interior edge remains.
fn resolve_cocircular(pts: &[[f64; 2]], tris: &mut [[usize; 3]]) -> bool {
    let mut degenerate = false;
    for _pass in 0..100 {
        degenerate = false;
        let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, v) in tris.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut keys: Vec<_> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        let mut touched = vec![false; tris.len()];
        let mut flipped = false;
        for (a, b) in keys {
            let ts = &edge_map[&(a, b)];
            if ts.len() != 2 {
                continue;
            }
            let (t0, t1) = (ts[0], ts[1]);
            let opp = |t: usize| *tris[t].iter().find(|&&w| w != a && w != b).unwrap();
            let (c, d) = (opp(t0), opp(t1));
            let sum = angle_at(pts[a], pts[b], pts[c]) + angle_at(pts[a], pts[b], pts[d]);
            if (sum - std::f64::consts::PI).abs() > COCIRCULAR_ANGLE_TOL {
                continue;
            }
            degenerate = true;
            if c.min(d) > a.min(b) || touched[t0] || touched[t1] {
                continue;
            }
            // Replace (a, b) by (c, d), keeping counterclockwise order.
            let ccw = |u: usize, v: usize, w: usize| {
                if orient(pts[u], pts[v], pts[w]) > 0.0 { [u, v, w] } else { [u, w, v] }
            };
            tris[t0] = ccw(c, d, a);
            tris[t1] = ccw(c, d, b);
            touched[t0] = true;
            touched[t1] = true;
            flipped = true;
        }
        if !flipped {
            break;
        }
    }
    degenerate
}

/// Delaunay triangulation of `points`, restricted to the region bounded by
/// `boundary` when given (otherwise the convex hull).
pub fn delaunay_triangulate(points: &[[f64; 2]], boundary: Option<&Boundary>) -> Result<DelaunayMesh> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    let mut polygons: Vec<Vec<usize>> = match boundary {
        Some(b) => std::iter::once(b.outer.clone()).chain(b.holes.iter().cloned()).collect(),
        None => Vec::new(),
    };
    for poly in &polygons {
        if let Some(&bad) = poly.iter().find(|&&i| i >= pts.len()) {
            return Err(Error::VertexOutOfRange { index: bad, n_vertices: pts.len() });
        }
    }
    for _round in 0..MAX_RECOVERY_ROUNDS {
        let all = triangulate_points(&pts)?;
        let kept: Vec<[usize; 3]> = if polygons.is_empty() {
            all
        } else {
            let rings: Vec<Vec<[f64; 2]>> = polygons.iter().map(|p| p.iter().map(|&i| pts[i]).collect()).collect();
            all.into_iter()
                .filter(|t| {
                    let c = [0, 1].map(|k| (pts[t[0]][k] + pts[t[1]][k] + pts[t[2]][k]) / 3.0);
                    point_in_polygon(c, &rings[0]) && rings[1..].iter().all(|h| !point_in_polygon(c, h))
                })
                .collect()
        };
        let mut edges = std::collections::HashSet::new();
        for t in &kept {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let mut missing = false;
        for poly in polygons.iter_mut() {
            let mut refined = Vec::with_capacity(poly.len());
            for i in 0..poly.len() {
                let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                refined.push(a);
                if !edges.contains(&(a.min(b), a.max(b))) {
                    missing = true;
                    pts.push([0.5 * (pts[a][0] + pts[b][0]), 0.5 * (pts[a][1] + pts[b][1])]);
                    refined.push(pts.len() - 1);
                }
            }
            *poly = refined;
        }
        if missing {
            continue;
        }
        return finish(points.len(), &pts, kept);
    }
    Err(Error::Triangulation("boundary segments could not be recovered".into()))
}

fn finish(n_input: usize, pts: &[[f64; 2]], kept: Vec<[usize; 3]>) -> Result<DelaunayMesh> {
    if kept.is_empty() {
        return Err(Error::Triangulation("no triangles inside the boundary".into()));
    }
    let mut used = vec![false; pts.len()];
    for t in &kept {
        for &v in t {
            used[v] = true;
        }
    }
    let mut new_index = vec![usize::MAX; pts.len()];
    let mut out_pts = Vec::new();
    let mut source_point = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            new_index[i] = out_pts.len();
            out_pts.push(pts[i]);
            source_point.push((i < n_input).then_some(i));
        }
    }
    let mut tris: Vec<[usize; 3]> = kept.iter().map(|t| t.map(|v| new_index[v])).collect();
    let degenerate_delaunay = resolve_cocircular(&out_pts, &mut tris);
    let complex = SimplicialComplex2::from_planar(&out_pts, &tris)?;
    Ok(DelaunayMesh { complex, source_point, degenerate_delaunay })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_corners_take_the_zero_two_diagonal() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = delaunay_triangulate(&pts, None).unwrap();
        assert!(m.degenerate_delaunay);
        assert_eq!(m.complex.n_triangles(), 2);
        assert!(m.complex.edge_index(0, 2).is_some());
        assert!(m.complex.edge_index(1, 3).is_none());
        // Same answer regardless of insertion order.
        let pts2 = [[0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]];
        let m2 = delaunay_triangulate(&pts2, None).unwrap();
        assert!(m2.complex.edge_index(0, 2).is_some());
    }

    #[test]
    fn collinear_input_is_rejected() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(matches!(delaunay_triangulate(&pts, None), Err(Error::AllCollinear)));
    }

    #[test]
    fn grid_with_hole_keeps_hole() {
        let mut pts = Vec::new();
        let idx = |i: usize, j: usize| j * 4 + i;
        for j in 0..4 {
            for i in 0..4 {
                pts.push([i as f64 + 0.01 * ((i * 7 + j * 3) % 5) as f64 * f64::from(u8::from(i % 3 != 0 && j % 3 != 0)), j as f64]);
            }
        }
        let outer = vec![idx(0, 0), idx(1, 0), idx(2, 0), idx(3, 0), idx(3, 1), idx(3, 2), idx(3, 3), idx(2, 3), idx(1, 3), idx(0, 3), idx(0, 2), idx(0, 1)];
        let hole = vec![idx(1, 1), idx(2, 1), idx(2, 2), idx(1, 2)];
        let m = delaunay_triangulate(&pts, Some(&Boundary { outer, holes: vec![hole] })).unwrap();
        assert_eq!(m.complex.euler_characteristic(), 0);
    }
}
