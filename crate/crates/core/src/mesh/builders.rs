use std::collections::HashMap;
use std::f64::consts::PI;

use super::Mesh;
use crate::error::{invalid, Result};
use crate::geometry::{self, Point3};

fn check_sizes(size: &[f64]) -> Result<()> {
    if size.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return invalid(format!("box sizes must be positive and finite, got {size:?}"));
    }
    Ok(())
}

/// Smallest `n >= 1` minimizing `|count(n) - target|` for an increasing `count`.
fn nearest_level(target: usize, count: impl Fn(usize) -> usize) -> usize {
    let mut n = 1;
    while count(n + 1) <= target {
        n += 1;
    }
    if count(n) < target && count(n + 1) - target < target - count(n) {
        n + 1
    } else {
        n
    }
}

/// Structured triangle mesh of the rectangle `[-Lx/2, Lx/2] x [-Ly/2, Ly/2]`
/// in the `z = 0` plane, with `(n+1)^2` vertices closest to `n_target`.
pub fn build_square(n_target: usize, size: [f64; 2]) -> Result<Mesh> {
    if n_target < 4 {
        return invalid("build_square needs at least 4 vertices");
    }
    check_sizes(&size)?;
    let n = nearest_level(n_target, |n| (n + 1) * (n + 1));
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([
                size[0] * (i as f64 / n as f64 - 0.5),
                size[1] * (j as f64 / n as f64 - 0.5),
                0.0,
            ]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    let ne = elements.len() / 3;
    Ok(Mesh::from_raw(vertices, elements, 3, vec![0; ne]))
}

/// Triangle mesh of the disk of given radius centered at the origin in `z = 0`.
///
/// Ring `i` of `n` has radius `i/n` and `6i` vertices, for `1 + 3n(n+1)` vertices in total.
pub fn build_disk(n_target: usize, radius: f64) -> Result<Mesh> {
    if n_target < 4 {
        return invalid("build_disk needs at least 4 vertices");
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return invalid(format!("disk radius must be positive, got {radius}"));
    }
    let n = nearest_level(n_target, |n| 1 + 3 * n * (n + 1));
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for i in 1..=n {
        ring_start.push(vertices.len());
        let r = radius * i as f64 / n as f64;
        for j in 0..6 * i {
            let t = 2.0 * PI * j as f64 / (6 * i) as f64;
            vertices.push([r * t.cos(), r * t.sin(), 0.0]);
        }
    }
    let mut elements = Vec::new();
    let mut push = |a: usize, b: usize, c: usize, vertices: &[Point3]| {
        let area = geometry::cross(
            geometry::sub(vertices[b], vertices[a]),
            geometry::sub(vertices[c], vertices[a]),
        )[2];
        if area > 0.0 {
            elements.extend_from_slice(&[a, b, c]);
        } else {
            elements.extend_from_slice(&[a, c, b]);
        }
    };
    for i in 1..=n {
        let n_out = 6 * i;
        let n_in = if i == 1 { 1 } else { 6 * (i - 1) };
        let (s_in, s_out) = (ring_start[i - 1], ring_start[i]);
        if n_in == 1 {
            for j in 0..n_out {
                push(0, s_out + j, s_out + (j + 1) % n_out, &vertices);
            }
            continue;
        }
        // merge the two rings by angle
        let (mut a, mut b) = (0usize, 0usize);
        while a < n_in || b < n_out {
            let ta = (a + 1) as f64 / n_in as f64;
            let tb = (b + 1) as f64 / n_out as f64;
            if b < n_out && (a == n_in || tb <= ta) {
                push(s_in + a % n_in, s_out + b, s_out + (b + 1) % n_out, &vertices);
                b += 1;
            } else {
                push(s_in + a, s_in + (a + 1) % n_in, s_out + b % n_out, &vertices);
                a += 1;
            }
        }
    }
    let ne = elements.len() / 3;
    Ok(Mesh::from_raw(vertices, elements, 3, vec![0; ne]))
}

/// Tetrahedral mesh of the box `[0,Lx] x [0,Ly] x [0,Lz]` on a structured
/// `(n+1)^3` grid, each hexahedral cell split into 6 tetrahedra along its main diagonal.
pub fn build_cube(n_target: usize, size: [f64; 3]) -> Result<Mesh> {
    if n_target < 8 {
        return invalid("build_cube needs at least 8 vertices");
    }
    check_sizes(&size)?;
    let n = nearest_level(n_target, |n| (n + 1).pow(3));
    let m = n + 1;
    let mut vertices = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                vertices.push([
                    size[0] * i as f64 / n as f64,
                    size[1] * j as f64 / n as f64,
                    size[2] * k as f64 / n as f64,
                ]);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| (k * m + j) * m + i;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    // parity of each permutation: odd ones produce negatively oriented tets
    const ODD: [bool; 6] = [false, true, true, false, false, true];
    let mut elements = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for (p, odd) in PERMS.iter().zip(ODD) {
                    let mut c = [i, j, k];
                    let mut tet = [id(i, j, k), 0, 0, 0];
                    for s in 0..3 {
                        c[p[s]] += 1;
                        tet[s + 1] = id(c[0], c[1], c[2]);
                    }
                    if odd {
                        tet.swap(2, 3);
                    }
                    elements.extend_from_slice(&tet);
                }
            }
        }
    }
    let ne = elements.len() / 4;
    Ok(Mesh::from_raw(vertices, elements, 4, vec![0; ne]))
}

/// Outward oriented triangulation of the sphere of given radius, obtained by
/// subdividing an icosahedron until at least `n_target` vertices (12, 42, 162, 642, ...).
pub fn build_sphere(n_target: usize, radius: f64) -> Result<Mesh> {
    if n_target < 12 {
        return invalid("build_sphere needs at least 12 vertices");
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return invalid(format!("sphere radius must be positive, got {radius}"));
    }
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3> = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| geometry::normalize(v))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    while vertices.len() < n_target {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = geometry::scale(geometry::add(vertices[a], vertices[b]), 0.5);
                vertices.push(geometry::normalize(m));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * faces.len());
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in vertices.iter_mut() {
        *v = geometry::scale(*v, radius);
    }
    let mut elements = Vec::with_capacity(3 * faces.len());
    for f in &faces {
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        let n = geometry::cross(geometry::sub(b, a), geometry::sub(c, a));
        if geometry::dot(n, a) >= 0.0 {
            elements.extend_from_slice(f);
        } else {
            elements.extend_from_slice(&[f[0], f[2], f[1]]);
        }
    }
    let ne = faces.len();
    Ok(Mesh::from_raw(vertices, elements, 3, vec![0; ne]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;

    #[test]
    fn square_counts_and_area() {
        let m = build_square(4, [1.0, 1.0]).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements()), (4, 2));
        assert!((m.total_measure() - 1.0).abs() < 1e-15);
        let m = build_square(25, [5.0, 5.0]).unwrap();
        assert!((m.total_measure() - 25.0).abs() < 1e-12);
        let m = build_square(5000, [5.0, 5.0]).unwrap();
        assert!((3500..=6500).contains(&m.n_vertices()));
        assert!(build_square(3, [1.0, 1.0]).is_err());
        assert!(build_square(10, [1.0, -1.0]).is_err());
    }

    #[test]
    fn square_is_counterclockwise() {
        let m = build_square(50, [2.0, 1.0]).unwrap();
        for n in super::super::normals(&m).unwrap() {
            assert!((n[2] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn disk_area_and_rim() {
        let m = build_disk(1000, 1.0).unwrap();
        // hexagonal ring layout: 18 rings -> 1027 vertices, outer polygon with 108 sides
        assert_eq!(m.n_vertices(), 1027);
        let sides = 108.0;
        let polygon = 0.5 * sides * (2.0 * PI / sides).sin();
        assert!((m.total_measure() - polygon).abs() < 1e-12);
        assert!((m.total_measure() - PI).abs() < 0.01);
        let b = super::super::boundary(&m).unwrap();
        assert_eq!(b.n_elements(), 108);
        for v in b.vertices() {
            assert!((norm(*v) - 1.0).abs() < 1e-12);
        }
        for n in super::super::normals(&m).unwrap() {
            assert!(n[2] > 0.0);
        }
        let m = build_disk(10, 2.0).unwrap();
        assert_eq!(m.n_vertices(), 7);
        assert!(m.vertices().iter().all(|v| norm(*v) <= 2.0 + 1e-12));
    }

    #[test]
    fn cube_kuhn_split() {
        let m = build_cube(8, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements()), (8, 6));
        assert!((m.total_measure() - 1.0).abs() < 1e-12);
        let m = build_cube(9261, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.n_vertices(), 9261);
        let m = build_cube(1000, [1.0, 0.5, 0.5]).unwrap();
        assert!((m.total_measure() - 0.25).abs() < 1e-12);
        for e in 0..m.n_elements() {
            let p = m.element_points(e);
            assert!(geometry::signed_volume(p[0], p[1], p[2], p[3]) > 0.0);
        }
    }

    #[test]
    fn sphere_levels() {
        let m = build_sphere(12, 1.0).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements()), (12, 20));
        let m = build_sphere(1000, 1.0).unwrap();
        assert_eq!(m.n_vertices(), 2562);
        assert!((m.total_measure() / (4.0 * PI) - 1.0).abs() < 5e-3);
        let m = build_sphere(43, 3.0).unwrap();
        assert_eq!(m.n_vertices(), 162);
        assert!(m.vertices().iter().all(|v| (norm(*v) - 3.0).abs() < 1e-12));
    }
}
