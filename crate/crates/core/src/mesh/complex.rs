//! Oriented 2-dimensional simplicial complexes, planar or embedded in R³.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative area below which a triangle is treated as degenerate.
pub const DEGENERATE_AREA_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Embedding {
    /// All z coordinates are zero; triangles are stored counterclockwise.
    Planar,
    /// Triangles carry an orientation induced consistently across edges.
    Surface,
}

/// A triangulated surface with derived edges, adjacency and boundary flags.
///
/// Triangles are stored as `[v0, v1, v2]` with `v0` the smallest vertex
/// index; the cyclic order gives the triangle's orientation. Edges are stored
/// low index first, which is also their orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex2 {
    coords: Vec<[f64; 3]>,
    embedding: Embedding,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    edge_triangles: Vec<Vec<usize>>,
    triangle_edges: Vec<[usize; 3]>,
    triangle_edge_signs: Vec<[i8; 3]>,
    boundary_edge: Vec<bool>,
    boundary_vertex: Vec<bool>,
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Sign of traversing `(from, to)` relative to the low-to-high orientation.
fn edge_sign(from: usize, to: usize) -> i8 {
    if from < to {
        1
    } else {
        -1
    }
}

impl SimplicialComplex2 {
    /// Builds a complex from planar coordinates.
    pub fn from_planar(points: &[[f64; 2]], triangles: &[[usize; 3]]) -> Result<Self> {
        let coords = points.iter().map(|p| [p[0], p[1], 0.0]).collect();
        Self::new(coords, triangles)
    }

    /// Builds a complex; the embedding is planar when every z is zero.
    ///
    /// The input orientation of each triangle is ignored: planar triangles are
    /// made counterclockwise, surface triangles get a consistent orientation
    /// seeded from the lowest-numbered triangle of each component.
    pub fn new(coords: Vec<[f64; 3]>, triangles: &[[usize; 3]]) -> Result<Self> {
        let n0 = coords.len();
        let embedding = if coords.iter().all(|p| p[2] == 0.0) {
            Embedding::Planar
        } else {
            Embedding::Surface
        };

        let mut sorted = Vec::with_capacity(triangles.len());
        let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n0 {
                    return Err(Error::VertexOutOfRange { index: v, n_vertices: n0 });
                }
            }
            let mut s = *tri;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] {
                return Err(Error::DegenerateTriangle(t));
            }
            let [p, q, r] = s.map(|v| coords[v]);
            let e1 = sub3(q, p);
            let e2 = sub3(r, p);
            let scale = norm3(e1).max(norm3(e2)).max(norm3(sub3(r, q)));
            if norm3(cross3(e1, e2)) <= DEGENERATE_AREA_TOL * scale * scale {
                return Err(Error::DegenerateTriangle(t));
            }
            if let Some(&first) = seen.get(&s) {
                return Err(Error::DuplicateTriangle(first, t));
            }
            seen.insert(s, t);
            sorted.push(s);
        }

        let mut edge_set: Vec<[usize; 2]> = sorted
            .iter()
            .flat_map(|s| [[s[0], s[1]], [s[0], s[2]], [s[1], s[2]]])
            .collect();
        edge_set.sort_unstable();
        edge_set.dedup();
        let edge_lookup: HashMap<(usize, usize), usize> = edge_set
            .iter()
            .enumerate()
            .map(|(i, e)| ((e[0], e[1]), i))
            .collect();
        let mut edge_triangles = vec![Vec::new(); edge_set.len()];
        for (t, s) in sorted.iter().enumerate() {
            for e in [[s[0], s[1]], [s[0], s[2]], [s[1], s[2]]] {
                let id = edge_lookup[&(e[0], e[1])];
                edge_triangles[id].push(t);
                if edge_triangles[id].len() > 2 {
                    return Err(Error::NonManifold(e[0], e[1]));
                }
            }
        }

        // true: stored as (s0, s1, s2); false: stored as (s0, s2, s1).
        let positive: Vec<bool> = match embedding {
            Embedding::Planar => sorted
                .iter()
                .map(|s| {
                    let [p, q, r] = s.map(|v| coords[v]);
                    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]) > 0.0
                })
                .collect(),
            Embedding::Surface => orient_surface(&coords, &sorted, &edge_lookup, &edge_triangles)?,
        };

        let triangles: Vec<[usize; 3]> = sorted
            .iter()
            .zip(&positive)
            .map(|(s, &pos)| if pos { *s } else { [s[0], s[2], s[1]] })
            .collect();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        let mut triangle_edge_signs = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut ids = [0usize; 3];
            let mut signs = [0i8; 3];
            for i in 0..3 {
                let from = tri[(i + 1) % 3];
                let to = tri[(i + 2) % 3];
                ids[i] = edge_lookup[&(from.min(to), from.max(to))];
                signs[i] = edge_sign(from, to);
            }
            triangle_edges.push(ids);
            triangle_edge_signs.push(signs);
        }
        let boundary_edge: Vec<bool> = edge_triangles.iter().map(|ts| ts.len() == 1).collect();
        let mut boundary_vertex = vec![false; n0];
        for (e, &b) in edge_set.iter().zip(&boundary_edge) {
            if b {
                boundary_vertex[e[0]] = true;
                boundary_vertex[e[1]] = true;
            }
        }

        Ok(Self {
            coords,
            embedding,
            triangles,
            edges: edge_set,
            edge_lookup,
            edge_triangles,
            triangle_edges,
            triangle_edge_signs,
            boundary_edge,
            boundary_vertex,
        })
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Number of k-simplices.
    pub fn n_simplices(&self, k: usize) -> Result<usize> {
        match k {
            0 => Ok(self.n_vertices()),
            1 => Ok(self.n_edges()),
            2 => Ok(self.n_triangles()),
            _ => Err(Error::InvalidDegree(k)),
        }
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.coords[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 3]; 3] {
        self.triangles[t].map(|v| self.coords[v])
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    /// Index of the edge joining `a` and `b`, in either order.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Triangles containing edge `e` (one for boundary edges, two otherwise).
    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_triangles[e]
    }

    /// Edge ids of triangle `t`; entry `i` is the edge opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// `+1` where the triangle's boundary runs along the edge's orientation.
    pub fn triangle_edge_signs(&self, t: usize) -> [i8; 3] {
        self.triangle_edge_signs[t]
    }

    /// Local index (0..3) of the vertex of `t` opposite edge `e`.
    pub fn opposite_local_vertex(&self, t: usize, e: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&x| x == e)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// `+1` if the stored cyclic order is an even permutation of the sorted
    /// vertex order, `-1` otherwise.
    pub fn triangle_orientation(&self, t: usize) -> i8 {
        let [a, b, c] = self.triangles[t];
        if a < b && b < c || b < c && c < a || c < a && a < b {
            1
        } else {
            -1
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Triangles incident to each vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(t);
            }
        }
        out
    }

    /// Number of edges at each vertex.
    pub fn vertex_valence(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_vertices()];
        for e in &self.edges {
            out[e[0]] += 1;
            out[e[1]] += 1;
        }
        out
    }

    /// Connected-component label of each vertex, labels in order of first
    /// appearance.
    pub fn vertex_components(&self) -> (Vec<usize>, usize) {
        let n = self.n_vertices();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Betti numbers from component counts and the Euler characteristic.
    ///
    /// `b2` counts components without boundary that contain a triangle.
    pub fn betti_numbers(&self) -> [usize; 3] {
        let (label, count) = self.vertex_components();
        let mut has_triangle = vec![false; count];
        let mut has_boundary = vec![false; count];
        for tri in &self.triangles {
            has_triangle[label[tri[0]]] = true;
        }
        for (e, edge) in self.edges.iter().enumerate() {
            if self.boundary_edge[e] {
                has_boundary[label[edge[0]]] = true;
            }
        }
        let b0 = count;
        let b2 = (0..count).filter(|&c| has_triangle[c] && !has_boundary[c]).count();
        let b1 = (b0 as i64 + b2 as i64 - self.euler_characteristic()) as usize;
        [b0, b1, b2]
    }

    /// Barycentric coordinates of `p` projected onto the plane of triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 3]) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        let n = cross3(sub3(b, a), sub3(c, a));
        let nn = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
        let area_opposite = |u: [f64; 3], v: [f64; 3]| {
            let m = cross3(sub3(u, p), sub3(v, p));
            (m[0] * n[0] + m[1] * n[1] + m[2] * n[2]) / nn
        };
        [area_opposite(b, c), area_opposite(c, a), area_opposite(a, b)]
    }
}

fn orient_surface(
    coords: &[[f64; 3]],
    sorted: &[[usize; 3]],
    edge_lookup: &HashMap<(usize, usize), usize>,
    edge_triangles: &[Vec<usize>],
) -> Result<Vec<bool>> {
    let cycle = |s: &[usize; 3], pos: bool| if pos { *s } else { [s[0], s[2], s[1]] };
    // Direction in which an oriented triangle traverses edge (a, b), a < b.
    let direction = |tri: [usize; 3], a: usize, b: usize| -> i8 {
        for i in 0..3 {
            let (from, to) = (tri[i], tri[(i + 1) % 3]);
            if from == a && to == b {
                return 1;
            }
            if from == b && to == a {
                return -1;
            }
        }
        unreachable!("edge not in triangle")
    };
    let mut orient: Vec<Option<bool>> = vec![None; sorted.len()];
    for seed in 0..sorted.len() {
        if orient[seed].is_some() {
            continue;
        }
        let [p, q, r] = sorted[seed].map(|v| coords[v]);
        let normal = cross3(sub3(q, p), sub3(r, p));
        orient[seed] = Some(normal[2] >= 0.0);
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let tri = cycle(&sorted[t], orient[t].unwrap());
            let s = sorted[t];
            for (a, b) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
                let dir = direction(tri, a, b);
                for &u in &edge_triangles[edge_lookup[&(a, b)]] {
                    if u == t {
                        continue;
                    }
                    let want_positive = direction(cycle(&sorted[u], true), a, b) == -dir;
                    match orient[u] {
                        None => {
                            orient[u] = Some(want_positive);
                            queue.push_back(u);
                        }
                        Some(o) if o != want_positive => return Err(Error::NonOrientable),
                        Some(_) => {}
                    }
                }
            }
        }
    }
    Ok(orient.into_iter().map(|o| o.unwrap()).collect())
}
