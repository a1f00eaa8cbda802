//! Simplicial meshes of dimension 1 to 3 embedded in 3-space.

mod builders;
mod io;
mod ops;
mod search;

pub use builders::{build_cube, build_disk, build_sphere, build_square};
pub use io::{parse_msh, read_msh, write_msh, write_vtk, MshContent, VtkData, VtkField};
pub use ops::{boundary, clean, edge_stats, normals, swap, union, EdgeStats};
pub use search::{ElementLocator, PointLocator};

use crate::error::{invalid, Result};
use crate::geometry::{self, BBox, Point3};

/// A simplicial mesh: vertex table, element table and per-element color tags.
///
/// Elements are stored flat with `nodes_per_element` indices each.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point3>,
    elements: Vec<usize>,
    npe: usize,
    colors: Vec<i32>,
}

impl Mesh {
    /// Builds a mesh after checking indices and element measures.
    pub fn new(vertices: Vec<Point3>, elements: Vec<usize>, nodes_per_element: usize) -> Result<Self> {
        let ne = if nodes_per_element == 0 {
            0
        } else {
            elements.len() / nodes_per_element
        };
        Self::with_colors(vertices, elements, nodes_per_element, vec![0; ne])
    }

    pub fn with_colors(
        vertices: Vec<Point3>,
        elements: Vec<usize>,
        nodes_per_element: usize,
        colors: Vec<i32>,
    ) -> Result<Self> {
        if !(2..=4).contains(&nodes_per_element) {
            return invalid(format!(
                "elements must have 2, 3 or 4 vertices, got {nodes_per_element}"
            ));
        }
        if elements.len() % nodes_per_element != 0 {
            return invalid("element table length is not a multiple of the element size");
        }
        let ne = elements.len() / nodes_per_element;
        if colors.len() != ne {
            return invalid(format!("{} colors for {} elements", colors.len(), ne));
        }
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return invalid(format!("non-finite vertex {v:?}"));
        }
        let nv = vertices.len();
        if let Some(&i) = elements.iter().find(|&&i| i >= nv) {
            return invalid(format!("element index {i} out of range for {nv} vertices"));
        }
        let mesh = Mesh {
            vertices,
            elements,
            npe: nodes_per_element,
            colors,
        };
        for e in 0..ne {
            if mesh.is_degenerate(e) {
                return invalid(format!("element {e} has zero measure"));
            }
        }
        Ok(mesh)
    }

    pub(crate) fn from_raw(vertices: Vec<Point3>, elements: Vec<usize>, npe: usize, colors: Vec<i32>) -> Self {
        debug_assert_eq!(elements.len(), colors.len() * npe);
        Mesh {
            vertices,
            elements,
            npe,
            colors,
        }
    }

    /// Mesh without vertices or elements of the given dimension.
    pub fn empty(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "mesh dimension must be 1, 2 or 3");
        Mesh {
            vertices: vec![],
            elements: vec![],
            npe: dim + 1,
            colors: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.npe - 1
    }

    pub fn nodes_per_element(&self) -> usize {
        self.npe
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point3 {
        self.vertices[i]
    }

    /// Flat element table, `nodes_per_element` indices per element.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e * self.npe..(e + 1) * self.npe]
    }

    pub fn colors(&self) -> &[i32] {
        &self.colors
    }

    pub fn set_colors(&mut self, colors: Vec<i32>) -> Result<()> {
        if colors.len() != self.n_elements() {
            return invalid("color table length differs from the element count");
        }
        self.colors = colors;
        Ok(())
    }

    /// Vertex coordinates of element `e`; only the first `nodes_per_element` entries are used.
    pub fn element_points(&self, e: usize) -> [Point3; 4] {
        let mut p = [[0.0; 3]; 4];
        for (k, &i) in self.element(e).iter().enumerate() {
            p[k] = self.vertices[i];
        }
        p
    }

    pub fn measure(&self, e: usize) -> f64 {
        geometry::simplex_measure(&self.element_points(e)[..self.npe])
    }

    pub fn measures(&self) -> Vec<f64> {
        (0..self.n_elements()).map(|e| self.measure(e)).collect()
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.measure(e)).sum()
    }

    pub fn centroid(&self, e: usize) -> Point3 {
        let mut c = [0.0; 3];
        for &i in self.element(e) {
            c = geometry::add(c, self.vertices[i]);
        }
        geometry::scale(c, 1.0 / self.npe as f64)
    }

    pub fn circumradius(&self, e: usize) -> f64 {
        geometry::circumradius(&self.element_points(e)[..self.npe])
    }

    pub fn bbox(&self) -> BBox {
        BBox::from_points(&self.vertices)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        self.bbox().diameter()
    }

    /// True when the element is flat up to roundoff relative to its size.
    pub(crate) fn is_degenerate(&self, e: usize) -> bool {
        degenerate(&self.vertices, self.element(e))
    }

    /// Unique edges (sorted vertex pairs, in order of first appearance) and,
    /// for each element, the indices of its local edges.
    ///
    /// Local edge order: triangles `(1,2),(2,0),(0,1)` so that edge `i` is
    /// opposite vertex `i`; tetrahedra `(0,1),(0,2),(0,3),(1,2),(1,3),(2,3)`.
    pub fn edges(&self) -> (Vec<[usize; 2]>, Vec<usize>) {
        let local = local_edges(self.npe);
        let mut map = std::collections::HashMap::with_capacity(self.n_elements() * local.len());
        let mut edges = Vec::new();
        let mut elem_edges = Vec::with_capacity(self.n_elements() * local.len());
        for e in 0..self.n_elements() {
            let idx = self.element(e);
            for &(a, b) in local {
                let (i, j) = (idx[a].min(idx[b]), idx[a].max(idx[b]));
                let id = *map.entry((i, j)).or_insert_with(|| {
                    edges.push([i, j]);
                    edges.len() - 1
                });
                elem_edges.push(id);
            }
        }
        (edges, elem_edges)
    }
}

/// True when the simplex `idx` repeats a vertex or is flat up to roundoff.
pub(crate) fn degenerate(vertices: &[Point3], idx: &[usize]) -> bool {
    let n = idx.len();
    let mut h: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            if idx[a] == idx[b] {
                return true;
            }
            h = h.max(geometry::dist(vertices[idx[a]], vertices[idx[b]]));
        }
    }
    let p: Vec<Point3> = idx.iter().map(|&i| vertices[i]).collect();
    !(geometry::simplex_measure(&p) > 1e-14 * h.powi(n as i32 - 1))
}

pub(crate) fn local_edges(npe: usize) -> &'static [(usize, usize)] {
    match npe {
        2 => &[(0, 1)],
        3 => &[(1, 2), (2, 0), (0, 1)],
        4 => &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        _ => &[],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(Mesh::new(v.clone(), vec![0, 1, 3], 3).is_err());
        assert!(Mesh::new(v.clone(), vec![0, 1, 1], 3).is_err());
        assert!(Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], vec![0, 1, 2], 3).is_err());
        let m = Mesh::new(v, vec![0, 1, 2], 3).unwrap();
        assert_eq!(m.dim(), 2);
        assert!((m.total_measure() - 0.5).abs() < 1e-15);
        assert_eq!(m.colors(), &[0]);
    }

    #[test]
    fn edge_enumeration() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let m = Mesh::new(v, vec![0, 1, 2, 1, 3, 2], 3).unwrap();
        let (edges, local) = m.edges();
        assert_eq!(edges.len(), 5);
        // edge 0 of element 0 is (1,2), shared with edge 1 of element 1
        assert_eq!(local[0], local[4]);
        assert_eq!(edges[local[0]], [1, 2]);
    }
}
