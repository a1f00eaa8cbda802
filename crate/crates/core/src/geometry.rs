//! Small fixed-size vector helpers shared by the mesh and kernel code.

pub type Point3 = [f64; 3];

#[inline]
pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn normalize(a: Point3) -> Point3 {
    scale(a, 1.0 / norm(a))
}

/// `a + s * b`
#[inline]
pub fn axpy(a: Point3, s: f64, b: Point3) -> Point3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point3,
    pub max: Point3,
}

impl BBox {
    pub fn empty() -> Self {
        BBox {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut b = BBox::empty();
        for p in points {
            b.insert(*p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min[0] > self.max[0]
    }

    pub fn insert(&mut self, p: Point3) {
        for d in 0..3 {
            self.min[d] = self.min[d].min(p[d]);
            self.max[d] = self.max[d].max(p[d]);
        }
    }

    pub fn merge(&mut self, other: &BBox) {
        if !other.is_empty() {
            self.insert(other.min);
            self.insert(other.max);
        }
    }

    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|d| p[d] >= self.min[d] && p[d] <= self.max[d])
    }

    pub fn extent(&self) -> Point3 {
        if self.is_empty() {
            return [0.0; 3];
        }
        sub(self.max, self.min)
    }

    pub fn diameter(&self) -> f64 {
        norm(self.extent())
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        let mut axis = 0;
        for d in 1..3 {
            if e[d] > e[axis] {
                axis = d;
            }
        }
        axis
    }

    /// Euclidean distance between two boxes (0 when they overlap).
    pub fn distance(&self, other: &BBox) -> f64 {
        let mut s = 0.0;
        for d in 0..3 {
            let gap = (other.min[d] - self.max[d]).max(self.min[d] - other.max[d]).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }
}

/// Solves the 3x3 system `m x = b` by Cramer's rule; `None` when singular.
pub fn solve3(m: [[f64; 3]; 3], b: Point3) -> Option<Point3> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *xc = det3(mc) / det;
    }
    Some(x)
}

pub fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Unsigned measure of a simplex given by 2 to 4 points: length, area or volume.
pub fn simplex_measure(p: &[Point3]) -> f64 {
    match p.len() {
        1 => 1.0,
        2 => dist(p[0], p[1]),
        3 => 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0]))),
        4 => signed_volume(p[0], p[1], p[2], p[3]).abs(),
        n => panic!("simplex with {n} vertices"),
    }
}

pub fn signed_volume(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    dot(sub(b, a), cross(sub(c, a), sub(d, a))) / 6.0
}

/// Radius of the smallest sphere through all vertices of the simplex
/// (circumscribed circle for triangles, half length for segments).
pub fn circumradius(p: &[Point3]) -> f64 {
    match p.len() {
        1 => 0.0,
        2 => 0.5 * dist(p[0], p[1]),
        3 => {
            let a = dist(p[1], p[2]);
            let b = dist(p[2], p[0]);
            let c = dist(p[0], p[1]);
            a * b * c / (4.0 * simplex_measure(p))
        }
        4 => {
            let m = [sub(p[1], p[0]), sub(p[2], p[0]), sub(p[3], p[0])];
            let rhs = [0.5 * dot(m[0], m[0]), 0.5 * dot(m[1], m[1]), 0.5 * dot(m[2], m[2])];
            match solve3(m, rhs) {
                Some(c) => norm(c),
                None => f64::INFINITY,
            }
        }
        n => panic!("simplex with {n} vertices"),
    }
}

/// Gradients of the barycentric coordinates of a simplex (2 to 4 points),
/// tangent to the simplex when it is embedded in a higher dimension.
pub fn bary_gradients(p: &[Point3]) -> [Point3; 4] {
    let d = p.len() - 1;
    let j: Vec<Point3> = (1..=d).map(|i| sub(p[i], p[0])).collect();
    // G = J (JᵀJ)⁻¹, column i is the gradient of ξ_i
    let mut jtj = [[0.0; 3]; 3];
    for a in 0..d {
        for b in 0..d {
            jtj[a][b] = dot(j[a], j[b]);
        }
    }
    let inv = small_inverse(jtj, d);
    let mut g = [[0.0; 3]; 4];
    for i in 0..d {
        for (a, ja) in j.iter().enumerate() {
            g[i + 1] = axpy(g[i + 1], inv[a][i], *ja);
        }
        g[0] = sub(g[0], g[i + 1]);
    }
    g
}

fn small_inverse(m: [[f64; 3]; 3], d: usize) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    match d {
        1 => r[0][0] = 1.0 / m[0][0],
        2 => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            r[0][0] = m[1][1] / det;
            r[1][1] = m[0][0] / det;
            r[0][1] = -m[0][1] / det;
            r[1][0] = -m[1][0] / det;
        }
        _ => {
            let det = det3(m);
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                    let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                    r[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / det;
                }
            }
        }
    }
    r
}

/// Barycentric coordinates of the orthogonal projection of `x` onto the
/// affine hull of the simplex, and the distance from `x` to that hull.
pub fn barycentric(p: &[Point3], x: Point3) -> ([f64; 4], f64) {
    let g = bary_gradients(p);
    let mut l = [0.0; 4];
    let rel = sub(x, p[0]);
    let mut s = 0.0;
    for i in 1..p.len() {
        l[i] = dot(g[i], rel);
        s += l[i];
    }
    l[0] = 1.0 - s;
    let mut proj = [0.0; 3];
    for i in 0..p.len() {
        proj = axpy(proj, l[i], p[i]);
    }
    (l, dist(proj, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_distance_and_overlap() {
        let a = BBox::from_points(&[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]);
        let b = BBox::from_points(&[[4.0, 5.0, 1.0], [5.0, 6.0, 2.0]]);
        assert!((a.distance(&b) - 5.0).abs() < 1e-15);
        assert_eq!(a.distance(&a), 0.0);
        assert_eq!(a.longest_axis(), 0);
    }

    #[test]
    fn barycentric_gradients_tangent() {
        let tri = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        let g = bary_gradients(&tri);
        assert_eq!(g[1], [1.0, 0.0, 0.0]);
        assert_eq!(g[2], [0.0, 1.0, 0.0]);
        assert_eq!(g[0], [-1.0, -1.0, 0.0]);
        let (l, h) = barycentric(&tri, [0.25, 0.25, 3.0]);
        assert!((l[0] - 0.5).abs() < 1e-15 && (h - 2.0).abs() < 1e-15);
        let tet = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        let g = bary_gradients(&tet);
        assert!((g[3][2] - 0.5).abs() < 1e-15);
        let (l, _) = barycentric(&tet, [0.5, 0.5, 0.5]);
        assert!((l[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn circumradii() {
        let tri = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        assert!((circumradius(&tri) - 2f64.sqrt()).abs() < 1e-14);
        let tet = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((circumradius(&tet) - 0.75f64.sqrt()).abs() < 1e-14);
        assert!((simplex_measure(&tet) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn cramer_solve() {
        let m = [[2.0, 1.0, 0.0], [0.0, 3.0, 1.0], [1.0, 0.0, 4.0]];
        let x = solve3(m, [3.0, 4.0, 5.0]).unwrap();
        for r in 0..3 {
            let lhs: f64 = (0..3).map(|c| m[r][c] * x[c]).sum();
            assert!((lhs - [3.0, 4.0, 5.0][r]).abs() < 1e-13);
        }
    }
}
