use serde::{Deserialize, Serialize};

/// Intrinsic metric data of one triangle, computed from its side lengths.
///
/// Index `i` of `sides`, `angles` and `cot` refers to the side opposite local
/// vertex `i` and the angle at vertex `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleGeometry {
    pub sides: [f64; 3],
    pub angles: [f64; 3],
    pub cot: [f64; 3],
    pub area: f64,
    pub circumradius: f64,
    pub inradius: f64,
    /// Circumcenter in the embedding space.
    pub circumcenter: [f64; 3],
}

/// The three equivalent shape-regularity measures of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstants {
    /// Inradius over circumradius.
    pub radius_ratio: f64,
    /// Area over squared circumradius.
    pub area_ratio: f64,
    pub min_angle: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Heron's formula in the cancellation-free ordering.
pub fn area_from_sides(sides: [f64; 3]) -> f64 {
    let mut s = sides;
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * prod.max(0.0).sqrt()
}

impl TriangleGeometry {
    pub fn new(points: &[[f64; 3]; 3]) -> Self {
        let sides = [
            dist(points[1], points[2]),
            dist(points[2], points[0]),
            dist(points[0], points[1]),
        ];
        Self::from_sides_and_points(sides, Some(points))
    }

    /// Geometry of an abstract triangle with the given side lengths; the
    /// circumcenter is reported as the origin.
    pub fn from_sides(sides: [f64; 3]) -> Self {
        Self::from_sides_and_points(sides, None)
    }

    fn from_sides_and_points(sides: [f64; 3], points: Option<&[[f64; 3]; 3]>) -> Self {
        let area = area_from_sides(sides);
        let sq = sides.map(|s| s * s);
        let mut angles = [0.0; 3];
        let mut cot = [0.0; 3];
        for i in 0..3 {
            let adj = sq[(i + 1) % 3] + sq[(i + 2) % 3] - sq[i];
            angles[i] = (4.0 * area).atan2(adj);
            cot[i] = adj / (4.0 * area);
        }
        let circumradius = sides[0] * sides[1] * sides[2] / (4.0 * area);
        let inradius = 2.0 * area / (sides[0] + sides[1] + sides[2]);
        let circumcenter = match points {
            Some(p) => {
                // Barycentric weights a²(b² + c² - a²), ...
                let w: [f64; 3] = [0, 1, 2].map(|i| sq[i] * (sq[(i + 1) % 3] + sq[(i + 2) % 3] - sq[i]));
                let total: f64 = w.iter().sum();
                let mut c = [0.0; 3];
                for i in 0..3 {
                    for (ck, pk) in c.iter_mut().zip(p[i]) {
                        *ck += w[i] / total * pk;
                    }
                }
                c
            }
            None => [0.0; 3],
        };
        Self { sides, angles, cot, area, circumradius, inradius, circumcenter }
    }

    pub fn min_angle(&self) -> f64 {
        self.angles.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_angle(&self) -> f64 {
        self.angles.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// min over cyclic (i, j, k) of sin θ_i sin θ_j cos θ_k / sin² θ_k.
    ///
    /// Equals 1/2 for an equilateral triangle, zero with a right angle and is
    /// negative for obtuse triangles.
    pub fn delta_t(&self) -> f64 {
        self.delta_terms().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Same as [`Self::delta_t`] with absolute values of the terms.
    pub fn delta_t_abs(&self) -> f64 {
        self.delta_terms().into_iter().map(f64::abs).fold(f64::INFINITY, f64::min)
    }

    fn delta_terms(&self) -> [f64; 3] {
        let s = self.angles.map(f64::sin);
        let c = self.angles.map(f64::cos);
        [0, 1, 2].map(|k| s[(k + 1) % 3] * s[(k + 2) % 3] * c[k] / (s[k] * s[k]))
    }

    pub fn shape_constants(&self) -> ShapeConstants {
        ShapeConstants {
            radius_ratio: self.inradius / self.circumradius,
            area_ratio: self.area / (self.circumradius * self.circumradius),
            min_angle: self.min_angle(),
        }
    }

    /// Signed area of the part of vertex `i`'s circumcentric dual cell
    /// inside this triangle: (b² cot B + c² cot C)/8 with b, c the sides
    /// meeting at vertex `i`.
    pub fn corner_dual_area(&self, i: usize) -> f64 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        (self.sides[j] * self.sides[j] * self.cot[j] + self.sides[k] * self.sides[k] * self.cot[k]) / 8.0
    }

    /// Signed length of the dual edge piece inside this triangle divided by
    /// the length of the edge opposite vertex `i`: cot θ_i / 2.
    pub fn dual_edge_ratio(&self, i: usize) -> f64 {
        0.5 * self.cot[i]
    }
}

/// Lower bound on the radius ratio implied by a minimum angle.
pub fn radius_ratio_bound(min_angle: f64) -> f64 {
    min_angle.sin().powi(3) / 3.0
}

/// Lower bound on the minimum angle implied by a radius ratio.
pub fn min_angle_bound(radius_ratio: f64) -> f64 {
    (3.0 * radius_ratio * radius_ratio).min(1.0).asin()
}
