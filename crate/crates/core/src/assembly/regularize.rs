//! Near-field corrections: semi-analytic minus Gauss×Gauss values of the
//! `1/r` singularity for close element pairs.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::bem::contraction;
use crate::error::{invalid, Error, Result};
use crate::fem::{Family, FemSpace, Op};
use crate::geometry::{self, Point3};
use crate::kernels::{analytic_triangle_integrals, guard, Kernel, Part, Radial, TriangleIntegrals};
use crate::mesh::{self, Mesh};
use crate::quadrature::{Domain, QuadratureSet};
use crate::sparse::SparseMatrix;

/// Pairs with centroid distance up to this many circumradii are corrected.
pub const NEAR_FIELD_FACTOR: f64 = 3.0;

fn singular_kernel(name: &str) -> Result<Kernel> {
    let k = Kernel::parse(name, 0.0)
        .map_err(|_| Error::Unsupported(format!("no regularization for '{name}' (expected [1/r] or grady[1/r])")))?;
    if k.radial != Radial::Laplace {
        return Err(Error::Unsupported(format!(
            "no regularization for '{name}' (expected [1/r] or grady[1/r])"
        )));
    }
    Ok(k)
}

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Trial basis functions of one element in affine form
/// `ψ_c(y) = v_c + β_c · (y - p0)`.
struct Affine {
    dof: usize,
    v: [f64; 3],
    beta: [Point3; 3],
}

fn affine_basis(space: &FemSpace, normals: Option<&[Point3]>, e: usize, out: &mut Vec<Affine>) -> Result<()> {
    out.clear();
    if space.family() == Family::P2 {
        return Err(Error::Unsupported("regularization of P2 spaces".into()));
    }
    let mesh = space.mesh();
    let p = mesh.element_points(e);
    let g = geometry::bary_gradients(&p[..3]);
    let dofs = space.element_dofs(e);
    let nrm = normals.map(|n| n[e]);
    let mut vals = Vec::new();
    let mut at: [Vec<(usize, [f64; 3])>; 3] = Default::default();
    for (i, slot) in at.iter_mut().enumerate() {
        let mut l = [0.0; 4];
        l[i] = 1.0;
        space.local_values(e, &l, p[i], nrm, &mut vals);
        *slot = vals.clone();
    }
    for (k, &(s, v0)) in at[0].iter().enumerate() {
        let Some(dof) = space.free_index_of(dofs[s]) else {
            continue;
        };
        let vs = [v0, at[1][k].1, at[2][k].1];
        debug_assert!(at[1][k].0 == s && at[2][k].0 == s);
        let mut beta = [[0.0; 3]; 3];
        for (c, b) in beta.iter_mut().enumerate() {
            for i in 0..3 {
                *b = geometry::axpy(*b, vs[i][c], g[i]);
            }
        }
        out.push(Affine { dof, v: v0, beta });
    }
    Ok(())
}

/// `∫_T K_b(x, y) ψ_c(y) dy` from the closed-form integrals.
fn analytic_value(
    kernel: &Kernel,
    ti: &TriangleIntegrals,
    f: &Affine,
    p0: Point3,
    x: Point3,
    b: usize,
    c: usize,
) -> f64 {
    let alpha = f.v[c] + geometry::dot(f.beta[c], geometry::sub(x, p0));
    let beta = f.beta[c];
    let comp = match kernel.part {
        Part::Value => return alpha * ti.i0 + geometry::dot(beta, ti.i1),
        Part::GradComponent(j) => j,
        Part::Grad => b,
    };
    alpha * ti.grad[comp] - (0..3).map(|d| beta[d] * ti.rr[d][comp]).sum::<f64>()
}

struct Grid {
    cell: f64,
    map: HashMap<[i64; 3], Vec<usize>>,
}

impl Grid {
    fn new(points: &[Point3], cell: f64) -> Grid {
        let cell = if cell > 0.0 { cell } else { 1.0 };
        let mut map: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(p, cell)).or_default().push(i);
        }
        Grid { cell, map }
    }

    fn key(p: &Point3, cell: f64) -> [i64; 3] {
        [0, 1, 2].map(|d| (p[d] / cell).floor() as i64)
    }

    fn query(&self, p: &Point3, r: f64, out: &mut Vec<usize>) {
        out.clear();
        let lo = Self::key(&[p[0] - r, p[1] - r, p[2] - r], self.cell);
        let hi = Self::key(&[p[0] + r, p[1] + r, p[2] + r], self.cell);
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    if let Some(v) = self.map.get(&[i, j, k]) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

struct TrialSide<'a> {
    space: &'a FemSpace,
    mesh: &'a Arc<Mesh>,
    q: QuadratureSet,
    nq: usize,
    normals: Option<Vec<Point3>>,
    centroids: Vec<Point3>,
    radii: Vec<f64>,
    grid: Grid,
    rmax: f64,
}

impl<'a> TrialSide<'a> {
    fn new(dom_y: &'a Domain, trial: &'a FemSpace) -> Result<Self> {
        if !same_mesh(&dom_y.mesh, trial.mesh()) {
            return invalid("the trial space must live on the y-domain mesh");
        }
        let mesh = &dom_y.mesh;
        if mesh.dim() != 2 {
            return invalid("regularization needs a triangle surface mesh");
        }
        trial.ncomps()?;
        let normals = if matches!(trial.op(), Op::Nx | Op::NTimes) {
            Some(mesh::normals(mesh)?)
        } else {
            None
        };
        let centroids: Vec<Point3> = (0..mesh.n_elements()).map(|e| mesh.centroid(e)).collect();
        let radii: Vec<f64> = (0..mesh.n_elements()).map(|e| mesh.circumradius(e)).collect();
        let rmax = radii.iter().cloned().fold(0.0, f64::max);
        let grid = Grid::new(&centroids, NEAR_FIELD_FACTOR * rmax);
        Ok(TrialSide {
            space: trial,
            mesh,
            q: dom_y.quadrature(),
            nq: dom_y.rule().len(),
            normals,
            centroids,
            radii,
            grid,
            rmax,
        })
    }

    fn triangle(&self, e: usize) -> [Point3; 3] {
        let p = self.mesh.element_points(e);
        [p[0], p[1], p[2]]
    }

    /// `D[b][c][f] = analytic - Gauss` of `∫ K_b ψ_c,f` at `x` for each basis `f`.
    fn correction_at(
        &self,
        kernel: &Kernel,
        e: usize,
        basis: &[Affine],
        x: Point3,
        eps: f64,
        out: &mut Vec<[[f64; 3]; 3]>,
    ) -> Result<()> {
        out.clear();
        let tri = self.triangle(e);
        let ti = analytic_triangle_integrals(&tri, x)?;
        let nb = kernel.ncomps();
        let mut kv = [num_complex::Complex64::new(0.0, 0.0); 3];
        let mut kern = vec![[0.0f64; 3]; self.nq];
        let mut masked = vec![false; self.nq];
        for l in 0..self.nq {
            let y = self.q.points[e * self.nq + l];
            if geometry::dist(x, y) < eps {
                masked[l] = true;
                continue;
            }
            kernel.eval_into(&x, &y, &mut kv);
            for b in 0..nb {
                kern[l][b] = kv[b].re;
            }
        }
        for f in basis {
            let mut d = [[0.0; 3]; 3];
            for (b, db) in d.iter_mut().enumerate().take(nb) {
                for (c, dbc) in db.iter_mut().enumerate() {
                    let mut gauss = 0.0;
                    for l in 0..self.nq {
                        if masked[l] {
                            continue;
                        }
                        let y = self.q.points[e * self.nq + l];
                        let psi = f.v[c] + geometry::dot(f.beta[c], geometry::sub(y, tri[0]));
                        gauss += self.q.weights[e * self.nq + l] * kern[l][b] * psi;
                    }
                    *dbc = analytic_value(kernel, &ti, f, tri[0], x, b, c) - gauss;
                }
            }
            out.push(d);
        }
        Ok(())
    }
}

/// Sparse correction turning the Gauss×Gauss values of a `[1/r]` or
/// `grady[1/r]` kernel into semi-analytic ones for close element pairs.
///
/// The `y` integral of each close pair is computed in closed form, the `x`
/// integral with the Gauss rule of `dom_x`. Far pairs are untouched.
pub fn regularize(
    dom_x: &Domain,
    dom_y: &Domain,
    test: &FemSpace,
    singular_name: &str,
    trial: &FemSpace,
) -> Result<SparseMatrix<f64>> {
    let kernel = singular_kernel(singular_name)?;
    if !same_mesh(&dom_x.mesh, test.mesh()) {
        return invalid("the test space must live on the x-domain mesh");
    }
    let ts = TrialSide::new(dom_y, trial)?;
    let na = test.ncomps()?;
    let nc = trial.ncomps()?;
    let terms = contraction(na, kernel.ncomps(), nc)?;
    let qx = dom_x.quadrature();
    let nqx = dom_x.rule().len();
    let eps = guard(&qx.points, &ts.q.points);
    let xmesh = &dom_x.mesh;
    let xnormals = if matches!(test.op(), Op::Nx | Op::NTimes) {
        Some(mesh::normals(xmesh)?)
    } else {
        None
    };
    let rule = dom_x.rule();

    let parts: Vec<Vec<(usize, usize, f64)>> = (0..xmesh.n_elements())
        .into_par_iter()
        .map(|ex| -> Result<Vec<(usize, usize, f64)>> {
            let mut trip = Vec::new();
            let cx = xmesh.centroid(ex);
            let rx = xmesh.circumradius(ex);
            let mut cand = Vec::new();
            ts.grid.query(&cx, NEAR_FIELD_FACTOR * rx.max(ts.rmax), &mut cand);
            let near: Vec<usize> = cand
                .into_iter()
                .filter(|&ey| geometry::dist(cx, ts.centroids[ey]) <= NEAR_FIELD_FACTOR * rx.max(ts.radii[ey]))
                .collect();
            if near.is_empty() {
                return Ok(trip);
            }
            let xdofs = test.element_dofs(ex);
            let mut phis: Vec<Vec<(usize, [f64; 3])>> = Vec::with_capacity(nqx);
            let mut vals = Vec::new();
            for k in 0..nqx {
                let x = qx.points[ex * nqx + k];
                test.local_values(ex, &rule.bary[k], x, xnormals.as_ref().map(|n| n[ex]), &mut vals);
                phis.push(
                    vals.iter()
                        .filter_map(|&(s, v)| test.free_index_of(xdofs[s]).map(|d| (d, v)))
                        .collect(),
                );
            }
            let mut basis = Vec::new();
            let mut d = Vec::new();
            for ey in near {
                affine_basis(ts.space, ts.normals.as_deref(), ey, &mut basis)?;
                if basis.is_empty() {
                    continue;
                }
                for k in 0..nqx {
                    let x = qx.points[ex * nqx + k];
                    let wx = qx.weights[ex * nqx + k];
                    ts.correction_at(&kernel, ey, &basis, x, eps, &mut d)?;
                    for &(a, b, c, s) in &terms {
                        for &(t, phi) in &phis[k] {
                            let coef = s * wx * phi[a];
                            if coef == 0.0 {
                                continue;
                            }
                            for (f, df) in basis.iter().zip(&d) {
                                trip.push((t, f.dof, coef * df[b][c]));
                            }
                        }
                    }
                }
            }
            Ok(trip)
        })
        .collect::<Result<_>>()?;
    let trip: Vec<(usize, usize, f64)> = parts.into_iter().flatten().collect();
    SparseMatrix::from_triplets(test.n_dofs(), trial.n_dofs(), &trip)
}

/// Point-evaluation analog of [`regularize`] for radiation matrices: points
/// within the near-field radius of an element get the closed-form value.
pub fn regularize_radiation(
    points: &[Point3],
    dom_y: &Domain,
    singular_name: &str,
    trial: &FemSpace,
) -> Result<SparseMatrix<f64>> {
    let kernel = singular_kernel(singular_name)?;
    let ts = TrialSide::new(dom_y, trial)?;
    let nc = trial.ncomps()?;
    let terms = contraction(1, kernel.ncomps(), nc)?;
    if points.is_empty() {
        return Ok(SparseMatrix::zeros(0, trial.n_dofs()));
    }
    let eps = guard(points, &ts.q.points);
    let parts: Vec<Vec<(usize, usize, f64)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| -> Result<Vec<(usize, usize, f64)>> {
            let mut trip = Vec::new();
            let mut cand = Vec::new();
            ts.grid.query(x, NEAR_FIELD_FACTOR * ts.rmax, &mut cand);
            let mut basis = Vec::new();
            let mut d = Vec::new();
            for ey in cand {
                if geometry::dist(*x, ts.centroids[ey]) > NEAR_FIELD_FACTOR * ts.radii[ey] {
                    continue;
                }
                affine_basis(ts.space, ts.normals.as_deref(), ey, &mut basis)?;
                ts.correction_at(&kernel, ey, &basis, *x, eps, &mut d)?;
                for &(_, b, c, s) in &terms {
                    for (f, df) in basis.iter().zip(&d) {
                        trip.push((i, f.dof, s * df[b][c]));
                    }
                }
            }
            Ok(trip)
        })
        .collect::<Result<_>>()?;
    let trip: Vec<(usize, usize, f64)> = parts.into_iter().flatten().collect();
    SparseMatrix::from_triplets(points.len(), trial.n_dofs(), &trip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::bem_dense;
    use crate::fem::make_fem;
    use crate::mesh::build_sphere;
    use crate::quadrature::make_domain;

    fn two_triangles(gap: f64) -> Arc<Mesh> {
        Arc::new(
            Mesh::new(
                vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0],
                    [gap, 0.0, 0.0],
                    [gap + 1.0, 0.0, 0.0],
                    [gap, 1.0, 0.0],
                ],
                vec![0, 1, 2, 3, 4, 5],
                3,
            )
            .unwrap(),
        )
    }

    #[test]
    fn far_pairs_are_untouched() {
        let m = two_triangles(20.0);
        let dom = make_domain(m.clone(), 3).unwrap();
        let v = make_fem(m.clone(), "P0").unwrap();
        let r = regularize(&dom, &dom, &v, "[1/r]", &v).unwrap();
        assert_eq!(r.get(0, 1), 0.0);
        assert_eq!(r.get(1, 0), 0.0);
        assert!(r.get(0, 0) > 0.0);
        assert!(regularize(&dom, &dom, &v, "[exp(ikr)/r]", &v).is_err());
    }

    #[test]
    fn correction_is_symmetric_for_galerkin_pairs() {
        let m = Arc::new(build_sphere(162, 1.0).unwrap());
        let dom = make_domain(m.clone(), 3).unwrap();
        let v = make_fem(m.clone(), "P1").unwrap();
        let r = regularize(&dom, &dom, &v, "[1/r]", &v).unwrap();
        let rt = r.transpose();
        let d = r.add_scaled(-1.0, &rt).unwrap();
        // the x integral is Gauss, the y integral exact: symmetric up to quadrature error
        assert!(d.max_abs() < 0.05 * r.max_abs(), "{} vs {}", d.max_abs(), r.max_abs());
    }

    #[test]
    fn corrected_single_layer_has_unit_density_potential() {
        let m = Arc::new(build_sphere(642, 1.0).unwrap());
        let dom = make_domain(m.clone(), 3).unwrap();
        let v = make_fem(m.clone(), "P1").unwrap();
        let a = bem_dense(&dom, &dom, &v, &Kernel::laplace(), &v).unwrap();
        let r = regularize(&dom, &dom, &v, "[1/r]", &v).unwrap();
        let ones = vec![1.0; v.n_dofs()];
        let mut s = vec![0.0; v.n_dofs()];
        for i in 0..v.n_dofs() {
            s[i] = (0..v.n_dofs()).map(|j| a[(i, j)].re).sum::<f64>();
        }
        r.matvec_add(1.0, &ones, &mut s);
        // (S 1)_i = ∫ φ_i · 4π on the unit sphere
        let mass = crate::assembly::bilinear(&dom, &v, &v).unwrap();
        let lumped = mass.matvec(&ones);
        for i in 0..v.n_dofs() {
            let u = s[i] / (4.0 * std::f64::consts::PI * lumped[i]);
            assert!((u - 1.0).abs() < 0.02, "dof {i}: {u}");
        }
    }

    #[test]
    fn radiation_correction_near_surface() {
        let m = Arc::new(build_sphere(162, 1.0).unwrap());
        let dom = make_domain(m.clone(), 3).unwrap();
        let v = make_fem(m.clone(), "P1").unwrap();
        let pts = [[0.0, 0.0, 5.0], m.centroid(0)];
        let r = regularize_radiation(&pts, &dom, "[1/r]", &v).unwrap();
        assert_eq!(r.row(0).0.len(), 0);
        assert!(!r.row(1).0.is_empty());
    }
}
