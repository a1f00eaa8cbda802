use std::collections::HashMap;

use super::Mesh;
use crate::geometry::{self, Point3};

/// Finds stored points within a tolerance of a query point.
#[derive(Debug, Clone)]
pub struct PointLocator {
    cell: f64,
    tol: f64,
    grid: HashMap<[i64; 3], Vec<usize>>,
    points: Vec<Point3>,
}

impl PointLocator {
    pub fn new(points: &[Point3], tol: f64) -> Self {
        let cell = if tol > 0.0 { tol } else { 1.0 };
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            grid.entry(p.map(|c| (c / cell).floor() as i64)).or_default().push(i);
        }
        PointLocator {
            cell,
            tol,
            grid,
            points: points.to_vec(),
        }
    }

    /// Index of the nearest stored point within the tolerance.
    pub fn find(&self, p: Point3) -> Option<usize> {
        let c = p.map(|x| (x / self.cell).floor() as i64);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = self.grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &i in list {
                            let d = geometry::dist(self.points[i], p);
                            if d <= self.tol && best.map_or(true, |b| d < b.0) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        best.map(|b| b.1)
    }
}

/// Locates the element containing a point with a uniform grid of element boxes.
#[derive(Debug, Clone)]
pub struct ElementLocator<'a> {
    mesh: &'a Mesh,
    origin: Point3,
    cell: f64,
    grid: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> ElementLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let bb = mesh.bbox();
        let ne = mesh.n_elements().max(1) as f64;
        let mean = mesh.total_measure() / ne;
        let cell = (2.0 * mean.powf(1.0 / mesh.dim() as f64)).max(1e-12 * bb.diameter().max(1e-300));
        let mut loc = ElementLocator {
            mesh,
            origin: bb.min,
            cell,
            grid: HashMap::new(),
        };
        for e in 0..mesh.n_elements() {
            let p = mesh.element_points(e);
            let eb = geometry::BBox::from_points(&p[..mesh.nodes_per_element()]);
            let (lo, hi) = (loc.key(eb.min), loc.key(eb.max));
            for i in lo[0]..=hi[0] {
                for j in lo[1]..=hi[1] {
                    for k in lo[2]..=hi[2] {
                        loc.grid.entry([i, j, k]).or_default().push(e);
                    }
                }
            }
        }
        loc
    }

    fn key(&self, p: Point3) -> [i64; 3] {
        [0, 1, 2].map(|d| ((p[d] - self.origin[d]) / self.cell).floor() as i64)
    }

    /// Element containing `p` and the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: Point3) -> Option<(usize, [f64; 4])> {
        let npe = self.mesh.nodes_per_element();
        let mut best: Option<(f64, usize, [f64; 4])> = None;
        let k = self.key(p);
        for e in self.grid.get(&k).into_iter().flatten() {
            let q = self.mesh.element_points(*e);
            let (l, h) = geometry::barycentric(&q[..npe], p);
            let size = self.mesh.circumradius(*e);
            let outside = l[..npe].iter().fold(0.0f64, |m, &x| m.max(-x));
            if outside <= 1e-10 && h <= 1e-8 * size {
                let score = outside + h / size;
                if best.map_or(true, |b| score < b.0) {
                    best = Some((score, *e, l));
                }
            }
        }
        best.map(|b| (b.1, b.2))
    }
}
