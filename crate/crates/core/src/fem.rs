//! Lagrange (P0, P1, P2) and RWG finite element spaces and their
//! evaluation matrices at quadrature points.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, Point3};
use crate::mesh::{self, ElementLocator, Mesh, PointLocator};
use crate::quadrature::Domain;
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    P0,
    P1,
    P2,
    Rwg,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P0" => Ok(Family::P0),
            "P1" => Ok(Family::P1),
            "P2" => Ok(Family::P2),
            "RWG" => Ok(Family::Rwg),
            _ => invalid(format!(
                "unknown finite element family '{s}' (expected P0, P1, P2 or RWG)"
            )),
        }
    }
}

/// Differential operator applied to the basis functions at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Id,
    /// Gradient, tangential on surface meshes.
    Grad,
    /// Surface divergence of RWG functions.
    Div,
    /// `n × v` for RWG functions.
    Nx,
    /// `φ n` for scalar functions on surfaces.
    NTimes,
}

#[derive(Debug)]
struct DofMap {
    mesh: Arc<Mesh>,
    family: Family,
    /// Dofs of each element, `dofs_per_element` entries, `usize::MAX` when absent.
    elem_dofs: Vec<usize>,
    dofs_per_element: usize,
    /// RWG sign of each local edge function (+1 on T+, -1 on T-, 0 if absent).
    rwg_sign: Vec<f64>,
    locations: Vec<Point3>,
    /// Full dof -> free index (`usize::MAX` when constrained).
    free_index: Vec<usize>,
    free_dofs: Vec<usize>,
}

/// A finite element space with an operator tag and optional Dirichlet constraints.
#[derive(Debug, Clone)]
pub struct FemSpace {
    map: Arc<DofMap>,
    op: Op,
}

/// One sparse `M × N_free` matrix per component of the evaluated operator.
#[derive(Debug, Clone)]
pub struct EvalMatrix {
    pub comps: Vec<SparseMatrix<f64>>,
}

impl EvalMatrix {
    pub fn ncomps(&self) -> usize {
        self.comps.len()
    }

    pub fn nrows(&self) -> usize {
        self.comps[0].nrows()
    }

    pub fn ncols(&self) -> usize {
        self.comps[0].ncols()
    }
}

/// Builds the space of the named family (`"P0"`, `"P1"`, `"P2"`, `"RWG"`) on a mesh.
pub fn make_fem(mesh: Arc<Mesh>, family_name: &str) -> Result<FemSpace> {
    FemSpace::new(mesh, family_name.parse()?)
}

impl FemSpace {
    pub fn new(mesh: Arc<Mesh>, family: Family) -> Result<FemSpace> {
        let ne = mesh.n_elements();
        let npe = mesh.nodes_per_element();
        let (elem_dofs, dofs_per_element, rwg_sign, locations) = match family {
            Family::P0 => (
                (0..ne).collect(),
                1,
                vec![],
                (0..ne).map(|e| mesh.centroid(e)).collect(),
            ),
            Family::P1 => {
                let locs = mesh.vertices().to_vec();
                (mesh.elements().to_vec(), npe, vec![], locs)
            }
            Family::P2 => {
                let (edges, local) = mesh.edges();
                let nv = mesh.n_vertices();
                let nle = mesh::local_edges(npe).len();
                let mut dofs = Vec::with_capacity(ne * (npe + nle));
                for e in 0..ne {
                    dofs.extend_from_slice(mesh.element(e));
                    dofs.extend(local[e * nle..(e + 1) * nle].iter().map(|&k| nv + k));
                }
                let mut locs = mesh.vertices().to_vec();
                locs.extend(
                    edges
                        .iter()
                        .map(|&[a, b]| geometry::scale(geometry::add(mesh.vertex(a), mesh.vertex(b)), 0.5)),
                );
                (dofs, npe + nle, vec![], locs)
            }
            Family::Rwg => {
                if mesh.dim() != 2 {
                    return invalid("RWG elements need a triangle mesh");
                }
                let (edges, local) = mesh.edges();
                let mut owners: Vec<Vec<usize>> = vec![vec![]; edges.len()];
                for (k, &ed) in local.iter().enumerate() {
                    owners[ed].push(k);
                }
                let mut dof_of_edge = vec![usize::MAX; edges.len()];
                let mut locs = Vec::new();
                let mut sign = vec![0.0; 3 * ne];
                for (ed, own) in owners.iter().enumerate() {
                    match own.len() {
                        1 => {}
                        2 => {
                            dof_of_edge[ed] = locs.len();
                            let [a, b] = edges[ed];
                            locs.push(geometry::scale(geometry::add(mesh.vertex(a), mesh.vertex(b)), 0.5));
                            // own[] holds flat (element, local edge) slots in element order
                            sign[own[0]] = 1.0;
                            sign[own[1]] = -1.0;
                        }
                        n => return invalid(format!("edge {:?} is shared by {n} triangles", edges[ed])),
                    }
                }
                let dofs = local.iter().map(|&ed| dof_of_edge[ed]).collect();
                (dofs, 3, sign, locs)
            }
        };
        let n = locations.len();
        Ok(FemSpace {
            map: Arc::new(DofMap {
                mesh,
                family,
                elem_dofs,
                dofs_per_element,
                rwg_sign,
                locations,
                free_index: (0..n).collect(),
                free_dofs: (0..n).collect(),
            }),
            op: Op::Id,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.map.mesh
    }

    pub fn family(&self) -> Family {
        self.map.family
    }

    pub fn op(&self) -> Op {
        self.op
    }

    /// Same space with another operator tag.
    pub fn with_op(&self, op: Op) -> FemSpace {
        FemSpace {
            map: self.map.clone(),
            op,
        }
    }

    /// Number of dofs before Dirichlet elimination.
    pub fn n_dofs_full(&self) -> usize {
        self.map.locations.len()
    }

    /// Number of unconstrained dofs (the matrix dimension after elimination).
    pub fn n_dofs(&self) -> usize {
        self.map.free_dofs.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.map.free_dofs
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.map.free_index[dof] == usize::MAX
    }

    /// Dofs of element `e`, `usize::MAX` for absent RWG edge functions.
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        let k = self.map.dofs_per_element;
        &self.map.elem_dofs[e * k..(e + 1) * k]
    }

    /// Geometric location of every (full) dof.
    pub fn dof_locations(&self) -> &[Point3] {
        &self.map.locations
    }

    /// Locations of the unconstrained dofs, in matrix order.
    pub fn free_dof_locations(&self) -> Vec<Point3> {
        self.map.free_dofs.iter().map(|&d| self.map.locations[d]).collect()
    }

    pub fn is_vector_family(&self) -> bool {
        self.map.family == Family::Rwg
    }

    /// Number of components of the operator-applied basis functions.
    pub fn ncomps(&self) -> Result<usize> {
        let vector = self.is_vector_family();
        match (self.op, vector) {
            (Op::Id, false) => Ok(1),
            (Op::Id, true) => Ok(3),
            (Op::Grad, false) if self.map.family != Family::P0 => Ok(3),
            (Op::Div, true) => Ok(1),
            (Op::Nx, true) => Ok(3),
            (Op::NTimes, false) if self.mesh().dim() == 2 => Ok(3),
            (op, _) => Err(Error::Unsupported(format!(
                "operator {op:?} is not defined for {:?} on a dimension-{} mesh",
                self.map.family,
                self.mesh().dim()
            ))),
        }
    }

    /// Marks the dofs located on `boundary` as constrained.
    pub fn dirichlet(&self, boundary: &Mesh) -> Result<FemSpace> {
        if self.is_vector_family() {
            return Err(Error::Unsupported(
                "Dirichlet constraints apply to scalar families only".into(),
            ));
        }
        let mut constrained = vec![false; self.n_dofs_full()];
        if !boundary.is_empty() {
            let bspace = FemSpace::new(Arc::new(boundary.clone()), self.map.family)?;
            let tol = 1e-12 * self.mesh().diameter().max(boundary.diameter());
            let loc = PointLocator::new(bspace.dof_locations(), tol);
            for (d, &p) in self.map.locations.iter().enumerate() {
                if loc.find(p).is_some() {
                    constrained[d] = true;
                }
            }
        }
        for (d, &f) in self.map.free_index.iter().enumerate() {
            constrained[d] |= f == usize::MAX;
        }
        let mut free_index = vec![usize::MAX; constrained.len()];
        let mut free_dofs = Vec::new();
        for (d, &c) in constrained.iter().enumerate() {
            if !c {
                free_index[d] = free_dofs.len();
                free_dofs.push(d);
            }
        }
        let m = &self.map;
        Ok(FemSpace {
            map: Arc::new(DofMap {
                mesh: m.mesh.clone(),
                family: m.family,
                elem_dofs: m.elem_dofs.clone(),
                dofs_per_element: m.dofs_per_element,
                rwg_sign: m.rwg_sign.clone(),
                locations: m.locations.clone(),
                free_index,
                free_dofs,
            }),
            op: self.op,
        })
    }

    /// `N_full × N_free` matrix with one unit entry per free dof.
    pub fn elimination_map(&self) -> SparseMatrix<f64> {
        let t: Vec<_> = self
            .map
            .free_dofs
            .iter()
            .enumerate()
            .map(|(k, &d)| (d, k, 1.0))
            .collect();
        SparseMatrix::from_triplets(self.n_dofs_full(), self.n_dofs(), &t).expect("valid indices")
    }

    /// Extends free-dof coefficients by zeros on the constrained dofs.
    /// Free index of a full dof, `None` when absent or constrained.
    pub(crate) fn free_index_of(&self, dof: usize) -> Option<usize> {
        if dof == usize::MAX {
            return None;
        }
        match self.map.free_index[dof] {
            usize::MAX => None,
            j => Some(j),
        }
    }

    pub fn extend<T: Scalar>(&self, free: &[T]) -> Vec<T> {
        assert_eq!(free.len(), self.n_dofs());
        let mut full = vec![T::zero(); self.n_dofs_full()];
        for (k, &d) in self.map.free_dofs.iter().enumerate() {
            full[d] = free[k];
        }
        full
    }

    /// Values of the operator-applied local basis functions of element `e` at
    /// barycentric point `l`: `(local dof slot, value components)`.
    pub(crate) fn local_values(
        &self,
        e: usize,
        l: &[f64; 4],
        x: Point3,
        normal: Option<Point3>,
        out: &mut Vec<(usize, [f64; 3])>,
    ) {
        out.clear();
        let mesh = self.mesh();
        let npe = mesh.nodes_per_element();
        let p = mesh.element_points(e);
        match (self.map.family, self.op) {
            (Family::P0, Op::Id) => out.push((0, [1.0, 0.0, 0.0])),
            (Family::P1, Op::Id) => out.extend((0..npe).map(|i| (i, [l[i], 0.0, 0.0]))),
            (Family::P1, Op::Grad) => {
                let g = geometry::bary_gradients(&p[..npe]);
                out.extend((0..npe).map(|i| (i, g[i])));
            }
            (Family::P2, Op::Id) => {
                out.extend((0..npe).map(|i| (i, [l[i] * (2.0 * l[i] - 1.0), 0.0, 0.0])));
                for (k, &(a, b)) in mesh::local_edges(npe).iter().enumerate() {
                    out.push((npe + k, [4.0 * l[a] * l[b], 0.0, 0.0]));
                }
            }
            (Family::P2, Op::Grad) => {
                let g = geometry::bary_gradients(&p[..npe]);
                out.extend((0..npe).map(|i| (i, geometry::scale(g[i], 4.0 * l[i] - 1.0))));
                for (k, &(a, b)) in mesh::local_edges(npe).iter().enumerate() {
                    let v = geometry::add(geometry::scale(g[b], 4.0 * l[a]), geometry::scale(g[a], 4.0 * l[b]));
                    out.push((npe + k, v));
                }
            }
            (Family::P0 | Family::P1 | Family::P2, Op::NTimes) => {
                let n = normal.expect("normal for surface operator");
                let saved = self.op;
                let plain = FemSpace {
                    map: self.map.clone(),
                    op: Op::Id,
                };
                plain.local_values(e, l, x, None, out);
                debug_assert_eq!(saved, Op::NTimes);
                for v in out.iter_mut() {
                    v.1 = geometry::scale(n, v.1[0]);
                }
            }
            (Family::Rwg, op) => {
                let area = mesh.measure(e);
                for i in 0..3 {
                    let s = self.map.rwg_sign[3 * e + i];
                    if s == 0.0 {
                        continue;
                    }
                    let len = geometry::dist(p[(i + 1) % 3], p[(i + 2) % 3]);
                    let c = s * len / (2.0 * area);
                    let f = geometry::scale(geometry::sub(x, p[i]), c);
                    let v = match op {
                        Op::Id => f,
                        Op::Div => [2.0 * c, 0.0, 0.0],
                        Op::Nx => geometry::cross(normal.expect("normal for surface operator"), f),
                        _ => unreachable!("checked by ncomps"),
                    };
                    out.push((i, v));
                }
            }
            _ => unreachable!("checked by ncomps"),
        }
    }

    /// Basis values at the quadrature points of `dom` as sparse matrices over free dofs.
    ///
    /// The domain is either the space's own mesh or a boundary of it, in which
    /// case the traces of the basis functions are evaluated.
    pub fn eval_matrix(&self, dom: &Domain) -> Result<EvalMatrix> {
        let nc = self.ncomps()?;
        let rows = self.locate_points(dom)?;
        let needs_normal = matches!(self.op, Op::Nx | Op::NTimes);
        let normals = if needs_normal {
            Some(mesh::normals(self.mesh())?)
        } else {
            None
        };
        let q = dom.quadrature();
        let mut trip: Vec<Vec<(usize, usize, f64)>> = vec![Vec::with_capacity(q.len() * self.map.dofs_per_element); nc];
        let mut vals = Vec::new();
        for (k, &(e, l)) in rows.iter().enumerate() {
            self.local_values(e, &l, q.points[k], normals.as_ref().map(|n| n[e]), &mut vals);
            let dofs = self.element_dofs(e);
            for &(slot, v) in &vals {
                let dof = dofs[slot];
                if dof == usize::MAX {
                    continue;
                }
                let j = self.map.free_index[dof];
                if j == usize::MAX {
                    continue;
                }
                for (c, t) in trip.iter_mut().enumerate() {
                    if v[c] != 0.0 {
                        t.push((k, j, v[c]));
                    }
                }
            }
        }
        let comps = trip
            .iter()
            .map(|t| SparseMatrix::from_triplets(q.len(), self.n_dofs(), t))
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalMatrix { comps })
    }

    /// For each quadrature point of `dom`: the element of this space's mesh
    /// and the barycentric coordinates of the point in it.
    fn locate_points(&self, dom: &Domain) -> Result<Vec<(usize, [f64; 4])>> {
        let mesh = self.mesh();
        let rule = dom.rule();
        let same = Arc::ptr_eq(mesh, &dom.mesh) || **mesh == *dom.mesh;
        let mut rows = Vec::with_capacity(dom.len());
        if same {
            for e in 0..mesh.n_elements() {
                rows.extend(rule.bary.iter().map(|&b| (e, b)));
            }
            return Ok(rows);
        }
        if dom.mesh.dim() + 1 != mesh.dim() {
            return invalid("the quadrature domain is neither the space mesh nor a boundary of it");
        }
        if matches!(self.op, Op::Nx | Op::NTimes) {
            return Err(Error::Unsupported(
                "surface operators cannot be traced onto a boundary".into(),
            ));
        }
        // parent element and local slot of every face of the space mesh
        let npe = mesh.nodes_per_element();
        let mut faces: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
        for e in 0..mesh.n_elements() {
            let idx = mesh.element(e);
            for skip in 0..npe {
                let slots: Vec<usize> = (0..npe).filter(|&s| s != skip).collect();
                let mut key: Vec<usize> = slots.iter().map(|&s| idx[s]).collect();
                key.sort_unstable();
                faces.entry(key).or_insert((e, slots));
            }
        }
        let tol = 1e-12 * mesh.diameter().max(dom.mesh.diameter());
        let loc = PointLocator::new(mesh.vertices(), tol);
        for f in 0..dom.mesh.n_elements() {
            let ids: Option<Vec<usize>> = dom
                .mesh
                .element(f)
                .iter()
                .map(|&v| loc.find(dom.mesh.vertex(v)))
                .collect();
            let ids =
                ids.ok_or_else(|| Error::InvalidArgument(format!("boundary element {f} is not on the space mesh")))?;
            let mut key = ids.clone();
            key.sort_unstable();
            let (e, slots) = faces.get(&key).ok_or_else(|| {
                Error::InvalidArgument(format!("boundary element {f} is not a face of the space mesh"))
            })?;
            let idx = mesh.element(*e);
            for b in &rule.bary {
                let mut l = [0.0; 4];
                for (k, &v) in ids.iter().enumerate() {
                    let s = slots.iter().find(|&&s| idx[s] == v).expect("face vertex in parent");
                    l[*s] = b[k];
                }
                rows.push((*e, l));
            }
        }
        Ok(rows)
    }

    /// Evaluates `Σ c_j φ_j` (operator applied) at arbitrary points inside the mesh.
    ///
    /// `coeffs` holds either all dofs or only the free ones (constrained
    /// values are then zero). Returns one vector per component.
    pub fn interpolate<T: Scalar>(&self, coeffs: &[T], points: &[Point3]) -> Result<Vec<Vec<T>>> {
        let full = if coeffs.len() == self.n_dofs_full() {
            coeffs.to_vec()
        } else if coeffs.len() == self.n_dofs() {
            self.extend(coeffs)
        } else {
            return invalid(format!(
                "{} coefficients for a space with {} dofs ({} free)",
                coeffs.len(),
                self.n_dofs_full(),
                self.n_dofs()
            ));
        };
        let nc = self.ncomps()?;
        let locator = ElementLocator::new(self.mesh());
        let normals = if matches!(self.op, Op::Nx | Op::NTimes) {
            Some(mesh::normals(self.mesh())?)
        } else {
            None
        };
        let mut out = vec![vec![T::zero(); points.len()]; nc];
        let mut vals = Vec::new();
        for (k, &x) in points.iter().enumerate() {
            let (e, l) = locator
                .locate(x)
                .ok_or_else(|| Error::InvalidArgument(format!("point {x:?} is outside the mesh")))?;
            self.local_values(e, &l, x, normals.as_ref().map(|n| n[e]), &mut vals);
            let dofs = self.element_dofs(e);
            for &(slot, v) in &vals {
                if dofs[slot] == usize::MAX {
                    continue;
                }
                let c = full[dofs[slot]];
                for (comp, o) in out.iter_mut().enumerate() {
                    o[k] += c * v[comp];
                }
            }
        }
        Ok(out)
    }
}

pub fn grad(space: &FemSpace) -> FemSpace {
    space.with_op(Op::Grad)
}

pub fn div(space: &FemSpace) -> FemSpace {
    space.with_op(Op::Div)
}

pub fn nx(space: &FemSpace) -> FemSpace {
    space.with_op(Op::Nx)
}

pub fn ntimes(space: &FemSpace) -> FemSpace {
    space.with_op(Op::NTimes)
}

pub fn dirichlet(space: &FemSpace, boundary: &Mesh) -> Result<FemSpace> {
    space.dirichlet(boundary)
}
