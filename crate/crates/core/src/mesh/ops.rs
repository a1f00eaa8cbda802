use std::collections::HashMap;

use super::Mesh;
use crate::error::{invalid, Error, Result};
use crate::geometry::{self, Point3};

/// Boundary faces: the `(d-1)`-faces that occur in exactly one element,
/// oriented outward. Unreferenced vertices are dropped and colors inherited.
pub fn boundary(mesh: &Mesh) -> Result<Mesh> {
    let d = mesh.dim();
    if d < 2 {
        return invalid("boundary needs a mesh of dimension 2 or 3");
    }
    // outward faces of a positively oriented element
    let faces: &[&[usize]] = if d == 3 {
        &[&[1, 2, 3], &[0, 3, 2], &[0, 1, 3], &[0, 2, 1]]
    } else {
        &[&[1, 2], &[2, 0], &[0, 1]]
    };
    let mut count: HashMap<Vec<usize>, (usize, Vec<usize>, i32)> = HashMap::new();
    let mut order = Vec::new();
    for e in 0..mesh.n_elements() {
        let idx = mesh.element(e);
        let flip = d == 3 && {
            let p = mesh.element_points(e);
            geometry::signed_volume(p[0], p[1], p[2], p[3]) < 0.0
        };
        for f in faces {
            let mut face: Vec<usize> = f.iter().map(|&k| idx[k]).collect();
            if flip {
                face.swap(0, 1);
            }
            let mut key = face.clone();
            key.sort_unstable();
            let entry = count.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                (0, face, mesh.colors()[e])
            });
            entry.0 += 1;
        }
    }
    let mut elements = Vec::new();
    let mut colors = Vec::new();
    for key in &order {
        let (n, face, color) = &count[key];
        if *n == 1 {
            elements.extend_from_slice(face);
            colors.push(*color);
        }
    }
    Ok(compact(mesh.vertices(), elements, d, colors))
}

/// Drops unreferenced vertices, keeping the relative order of the others.
pub(crate) fn compact(vertices: &[Point3], mut elements: Vec<usize>, npe: usize, colors: Vec<i32>) -> Mesh {
    let mut new_id = vec![usize::MAX; vertices.len()];
    for &i in &elements {
        new_id[i] = 0;
    }
    let mut kept = Vec::new();
    for (i, id) in new_id.iter_mut().enumerate() {
        if *id == 0 {
            *id = kept.len();
            kept.push(vertices[i]);
        }
    }
    for i in elements.iter_mut() {
        *i = new_id[*i];
    }
    Mesh::from_raw(kept, elements, npe, colors)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn lex_less(a: &Point3, b: &Point3) -> bool {
    a.partial_cmp(b) == Some(std::cmp::Ordering::Less)
}

/// Groups vertices closer than `tol` (transitively). Returns for each vertex
/// the smallest original index of its group.
fn merge_groups(vertices: &[Point3], tol: f64) -> Vec<usize> {
    let n = vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let union = |a: usize, b: usize, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    if tol == 0.0 {
        let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            // +0.0 and -0.0 compare equal
            let key = v.map(|c| (c + 0.0).to_bits());
            match seen.get(&key) {
                Some(&j) => union(j, i, &mut parent),
                None => {
                    seen.insert(key, i);
                }
            }
        }
    } else {
        let cell = |v: &Point3| v.map(|c| (c / tol).floor() as i64);
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            let c = cell(v);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(list) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                            for &j in list {
                                if geometry::dist(vertices[j], *v) <= tol {
                                    union(j, i, &mut parent);
                                }
                            }
                        }
                    }
                }
            }
            grid.entry(c).or_default().push(i);
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Merges vertices closer than `tol` (each group is represented by its
/// lexicographically smallest coordinates), then removes degenerate and
/// duplicate elements and unreferenced vertices.
pub fn clean(mesh: &Mesh, tol: f64) -> Result<Mesh> {
    if !(tol >= 0.0) {
        return invalid(format!("clean tolerance must be nonnegative, got {tol}"));
    }
    let root = merge_groups(mesh.vertices(), tol);
    let mut vertices = mesh.vertices().to_vec();
    for (i, &r) in root.iter().enumerate() {
        if lex_less(&mesh.vertex(i), &vertices[r]) {
            vertices[r] = mesh.vertex(i);
        }
    }
    let npe = mesh.nodes_per_element();
    let mut elements = Vec::with_capacity(mesh.elements().len());
    let mut colors = Vec::with_capacity(mesh.n_elements());
    let mut seen = std::collections::HashSet::new();
    for e in 0..mesh.n_elements() {
        let idx: Vec<usize> = mesh.element(e).iter().map(|&i| root[i]).collect();
        let mut key = idx.clone();
        key.sort_unstable();
        if super::degenerate(&vertices, &idx) || !seen.insert(key) {
            continue;
        }
        elements.extend_from_slice(&idx);
        colors.push(mesh.colors()[e]);
    }
    Ok(compact(&vertices, elements, npe, colors))
}

/// Concatenates two meshes of the same dimension and merges coincident
/// vertices within `1e-12` times the bounding-box diagonal.
pub fn union(a: &Mesh, b: &Mesh) -> Result<Mesh> {
    if a.dim() != b.dim() {
        return invalid(format!("cannot unite meshes of dimension {} and {}", a.dim(), b.dim()));
    }
    let off = a.n_vertices();
    let mut vertices = a.vertices().to_vec();
    vertices.extend_from_slice(b.vertices());
    let mut elements = a.elements().to_vec();
    elements.extend(b.elements().iter().map(|&i| i + off));
    let mut colors = a.colors().to_vec();
    colors.extend_from_slice(b.colors());
    let joined = Mesh::from_raw(vertices, elements, a.nodes_per_element(), colors);
    let tol = 1e-12 * joined.diameter();
    clean(&joined, tol)
}

/// Edge length statistics over the unique edges of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStats {
    pub min_len: f64,
    pub max_len: f64,
    pub mean_len: f64,
    /// Population standard deviation.
    pub std_len: f64,
}

pub fn edge_stats(mesh: &Mesh) -> Result<EdgeStats> {
    if mesh.is_empty() {
        return invalid("edge statistics of an empty mesh");
    }
    let (edges, _) = mesh.edges();
    let lens: Vec<f64> = edges
        .iter()
        .map(|&[a, b]| geometry::dist(mesh.vertex(a), mesh.vertex(b)))
        .collect();
    let n = lens.len() as f64;
    let mean = lens.iter().sum::<f64>() / n;
    let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    Ok(EdgeStats {
        min_len: lens.iter().copied().fold(f64::INFINITY, f64::min),
        max_len: lens.iter().copied().fold(0.0, f64::max),
        mean_len: mean,
        std_len: var.sqrt(),
    })
}

/// Unit normal of each triangle from the right-hand rule on its vertex order.
pub fn normals(mesh: &Mesh) -> Result<Vec<Point3>> {
    if mesh.dim() != 2 {
        return invalid("normals are defined for triangle meshes only");
    }
    (0..mesh.n_elements())
        .map(|e| {
            let p = mesh.element_points(e);
            let n = geometry::cross(geometry::sub(p[1], p[0]), geometry::sub(p[2], p[0]));
            let len = geometry::norm(n);
            if len == 0.0 || !len.is_finite() {
                return Err(Error::InvalidArgument(format!("degenerate triangle {e}")));
            }
            Ok(geometry::scale(n, 1.0 / len))
        })
        .collect()
}

/// Exchanges the first two vertices of every element, reversing orientation.
pub fn swap(mesh: &Mesh) -> Mesh {
    let npe = mesh.nodes_per_element();
    let mut elements = mesh.elements().to_vec();
    for el in elements.chunks_mut(npe) {
        el.swap(0, 1);
    }
    Mesh::from_raw(mesh.vertices().to_vec(), elements, npe, mesh.colors().to_vec())
}
