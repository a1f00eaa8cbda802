//! Boundary element matrices `Φᵀ Wx G Wy Ψ`, dense or hierarchical, and
//! radiation matrices towards observation points.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fem::FemSpace;
use crate::geometry::{self, BBox, Point3};
use crate::hmatrix::{
    aca, build_cluster_tree_with_boxes, BlockEval, BlockSource, HMatrix, LowRank, DEFAULT_ETA, DEFAULT_LEAF_SIZE,
};
use crate::kernels::{guard, Kernel};
use crate::mesh::PointLocator;
use crate::quadrature::Domain;
use crate::sparse::SparseMatrix;
use crate::C64;

/// Default memory cap for dense boundary element matrices, in bytes.
pub const DEFAULT_DENSE_CAP: u64 = 8_000_000_000;

const CHUNK: usize = 64;

/// `(test component, kernel component, trial component, sign)`.
pub(crate) type Term = (usize, usize, usize, f64);

/// How operator components are contracted with a scalar or vector kernel.
pub(crate) fn contraction(na: usize, nb: usize, nc: usize) -> Result<Vec<Term>> {
    Ok(match (na, nb, nc) {
        (1, 1, 1) => vec![(0, 0, 0, 1.0)],
        (3, 1, 3) => (0..3).map(|c| (c, 0, c, 1.0)).collect(),
        (3, 3, 1) => (0..3).map(|c| (c, c, 0, 1.0)).collect(),
        (1, 3, 3) => (0..3).map(|c| (0, c, c, 1.0)).collect(),
        // u · (K × v)
        (3, 3, 3) => vec![
            (0, 1, 2, 1.0),
            (0, 2, 1, -1.0),
            (1, 2, 0, 1.0),
            (1, 0, 2, -1.0),
            (2, 0, 1, 1.0),
            (2, 1, 0, -1.0),
        ],
        _ => {
            return invalid(format!(
            "cannot contract a {na}-component test operator, {nb}-component kernel and {nc}-component trial operator"
        ))
        }
    })
}

/// Quadrature points with weighted basis values, both point-major
/// (`N_points × N_dofs`) and dof-major, one matrix per component.
pub(crate) struct Side {
    pub points: Vec<Point3>,
    pub locations: Vec<Point3>,
    pub point_major: Vec<SparseMatrix<f64>>,
    pub dof_major: Vec<SparseMatrix<f64>>,
}

impl Side {
    pub fn from_space(dom: &Domain, space: &FemSpace) -> Result<Side> {
        let ev = space.eval_matrix(dom)?;
        let q = dom.quadrature();
        let point_major: Vec<SparseMatrix<f64>> = ev
            .comps
            .iter()
            .map(|c| SparseMatrix::from_diagonal(&q.weights).matmul(c))
            .collect::<Result<_>>()?;
        let dof_major = point_major.iter().map(|m| m.transpose()).collect();
        Ok(Side {
            points: q.points,
            locations: space.free_dof_locations(),
            point_major,
            dof_major,
        })
    }

    pub fn from_points(points: &[Point3]) -> Side {
        let id = SparseMatrix::identity(points.len());
        Side {
            points: points.to_vec(),
            locations: points.to_vec(),
            point_major: vec![id.clone()],
            dof_major: vec![id],
        }
    }

    pub fn ncomps(&self) -> usize {
        self.point_major.len()
    }

    pub fn ndofs(&self) -> usize {
        self.dof_major[0].nrows()
    }

    /// Box around each dof location and the points of its support.
    fn boxes(&self) -> Vec<BBox> {
        (0..self.ndofs())
            .map(|d| {
                let mut b = BBox::from_points([&self.locations[d]]);
                for m in &self.dof_major {
                    for &p in m.row(d).0 {
                        b.insert(self.points[p]);
                    }
                }
                b
            })
            .collect()
    }
}

fn dense_estimate(x: &Side, y: &Side, nb: usize, npairs: usize) -> u64 {
    let out = x.ndofs() as u64 * y.ndofs() as u64 * 16;
    let threads = rayon::current_num_threads() as u64 * 2;
    let per_chunk = (nb * CHUNK * y.points.len() + (npairs + 3) * CHUNK * y.ndofs()) as u64 * 16;
    out + threads * per_chunk
}

/// Contributions of x points `i0..i1` to the rows of the output.
fn dense_chunk(
    x: &Side,
    y: &Side,
    kernel: &Kernel,
    terms: &[Term],
    eps: f64,
    strict: bool,
    i0: usize,
    i1: usize,
) -> Result<Vec<(usize, Vec<C64>)>> {
    let zero = C64::new(0.0, 0.0);
    let nyq = y.points.len();
    let n = y.ndofs();
    let nb = kernel.ncomps();
    let m = i1 - i0;
    let mut g = vec![zero; nb * m * nyq];
    let mut v = [zero; 3];
    for ii in 0..m {
        let xp = &x.points[i0 + ii];
        for (l, yp) in y.points.iter().enumerate() {
            let r = geometry::dist(*xp, *yp);
            if r < eps {
                if strict {
                    return Err(Error::SingularEvaluation {
                        row: i0 + ii,
                        col: l,
                        distance: r,
                    });
                }
                continue;
            }
            kernel.eval_into(xp, yp, &mut v);
            for b in 0..nb {
                g[(b * m + ii) * nyq + l] = v[b];
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = terms.iter().map(|t| (t.1, t.2)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut t = vec![vec![zero; m * n]; pairs.len()];
    for (p, &(b, c)) in pairs.iter().enumerate() {
        let tp = &mut t[p];
        for ii in 0..m {
            let grow = &g[(b * m + ii) * nyq..(b * m + ii + 1) * nyq];
            let trow = &mut tp[ii * n..(ii + 1) * n];
            for (l, &gv) in grow.iter().enumerate() {
                if gv == zero {
                    continue;
                }
                let (cols, vals) = y.point_major[c].row(l);
                for (&j, &val) in cols.iter().zip(vals) {
                    trow[j] += gv * val;
                }
            }
        }
    }
    let mut rows: BTreeMap<usize, Vec<C64>> = BTreeMap::new();
    for &(a, b, c, s) in terms {
        let p = pairs.binary_search(&(b, c)).unwrap();
        for ii in 0..m {
            let (ts, phis) = x.point_major[a].row(i0 + ii);
            let trow = &t[p][ii * n..(ii + 1) * n];
            for (&dof, &phi) in ts.iter().zip(phis) {
                let coef = s * phi;
                let row = rows.entry(dof).or_insert_with(|| vec![zero; n]);
                for (o, &tv) in row.iter_mut().zip(trow) {
                    *o += tv * coef;
                }
            }
        }
    }
    Ok(rows.into_iter().collect())
}

fn dense_product(x: &Side, y: &Side, kernel: &Kernel, terms: &[Term], strict: bool, cap: u64) -> Result<Mat<C64>> {
    let mut pairs: Vec<(usize, usize)> = terms.iter().map(|t| (t.1, t.2)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let need = dense_estimate(x, y, kernel.ncomps(), pairs.len());
    if need > cap {
        return Err(Error::DenseTooLarge { required: need, cap });
    }
    let mut out = Mat::<C64>::zeros(x.ndofs(), y.ndofs());
    if x.points.is_empty() || y.points.is_empty() {
        return Ok(out);
    }
    let eps = guard(&x.points, &y.points);
    let chunks: Vec<(usize, usize)> = (0..x.points.len())
        .step_by(CHUNK)
        .map(|i| (i, (i + CHUNK).min(x.points.len())))
        .collect();
    let batch = rayon::current_num_threads() * 2;
    for group in chunks.chunks(batch) {
        let parts: Vec<Vec<(usize, Vec<C64>)>> = group
            .par_iter()
            .map(|&(i0, i1)| dense_chunk(x, y, kernel, terms, eps, strict, i0, i1))
            .collect::<Result<_>>()?;
        for part in parts {
            for (dof, row) in part {
                for (j, v) in row.into_iter().enumerate() {
                    out[(dof, j)] += v;
                }
            }
        }
    }
    Ok(out)
}

/// Dense Galerkin matrix of `∫∫ op(φ_i)(x) G(x, y) op(ψ_j)(y)`, rows for `test`.
///
/// Pairs of coincident quadrature points contribute zero; the singular part
/// is recovered by [`regularize`](super::regularize).
pub fn bem_dense(
    dom_x: &Domain,
    dom_y: &Domain,
    test: &FemSpace,
    kernel: &Kernel,
    trial: &FemSpace,
) -> Result<Mat<C64>> {
    bem_dense_capped(dom_x, dom_y, test, kernel, trial, DEFAULT_DENSE_CAP)
}

/// As [`bem_dense`] with an explicit memory cap in bytes.
pub fn bem_dense_capped(
    dom_x: &Domain,
    dom_y: &Domain,
    test: &FemSpace,
    kernel: &Kernel,
    trial: &FemSpace,
    cap: u64,
) -> Result<Mat<C64>> {
    let x = Side::from_space(dom_x, test)?;
    let y = Side::from_space(dom_y, trial)?;
    let terms = contraction(x.ncomps(), kernel.ncomps(), y.ncomps())?;
    dense_product(&x, &y, kernel, &terms, false, cap)
}

/// `C_ij = Σ_l G(x_i, y_l) w_l op(ψ_j)(y_l)` for observation points `x_i`.
pub fn radiation(points: &[Point3], dom_y: &Domain, kernel: &Kernel, trial: &FemSpace) -> Result<Mat<C64>> {
    let y = Side::from_space(dom_y, trial)?;
    let terms = contraction(1, kernel.ncomps(), y.ncomps())?;
    if points.is_empty() {
        return Ok(Mat::zeros(0, y.ndofs()));
    }
    let x = Side::from_points(points);
    dense_product(&x, &y, kernel, &terms, true, DEFAULT_DENSE_CAP)
}

/// `B_ij = Σ_k w_k op(φ_i)(x_k) G(x_k, y_j)`: the `N × P` transposed shape.
pub fn radiation_adjoint(dom_x: &Domain, test: &FemSpace, kernel: &Kernel, points: &[Point3]) -> Result<Mat<C64>> {
    let x = Side::from_space(dom_x, test)?;
    let terms = contraction(x.ncomps(), kernel.ncomps(), 1)?;
    if points.is_empty() {
        return Ok(Mat::zeros(x.ndofs(), 0));
    }
    let y = Side::from_points(points);
    dense_product(&x, &y, kernel, &terms, true, DEFAULT_DENSE_CAP)
}

/// Parameters of a hierarchical build.
#[derive(Debug, Clone, Copy)]
pub struct HOptions {
    pub tol: f64,
    pub eta: f64,
    pub leaf_size: usize,
}

impl HOptions {
    pub fn new(tol: f64) -> Self {
        HOptions {
            tol,
            eta: DEFAULT_ETA,
            leaf_size: DEFAULT_LEAF_SIZE,
        }
    }
}

struct Local {
    pts: Vec<Point3>,
    /// `rows[comp][local dof]` lists `(local point, weighted value)`.
    rows: Vec<Vec<Vec<(usize, f64)>>>,
}

fn gather(side: &Side, ids: &[usize]) -> Local {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut pts = Vec::new();
    let rows = side
        .dof_major
        .iter()
        .map(|m| {
            ids.iter()
                .map(|&d| {
                    let (ps, vs) = m.row(d);
                    ps.iter()
                        .zip(vs)
                        .map(|(&p, &v)| {
                            let k = *map.entry(p).or_insert_with(|| {
                                pts.push(side.points[p]);
                                pts.len() - 1
                            });
                            (k, v)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Local { pts, rows }
}

struct BemSource<'a> {
    x: &'a Side,
    y: &'a Side,
    kernel: Kernel,
    terms: Vec<Term>,
    eps: f64,
}

struct BemBlock<'a> {
    src: &'a BemSource<'a>,
    xl: Local,
    yl: Local,
}

impl BlockSource for BemSource<'_> {
    fn nrows(&self) -> usize {
        self.x.ndofs()
    }
    fn ncols(&self) -> usize {
        self.y.ndofs()
    }
    fn block<'b>(&'b self, rows: &'b [usize], cols: &'b [usize]) -> Box<dyn BlockEval + 'b> {
        Box::new(BemBlock {
            src: self,
            xl: gather(self.x, rows),
            yl: gather(self.y, cols),
        })
    }
}

impl BemBlock<'_> {
    /// Kernel values between `xs` (few) and `ys`: index `(k * nb + b) * ys.len() + l`.
    fn kernel_rows(&self, xs: &[Point3], ys: &[Point3], swap: bool) -> Vec<C64> {
        let nb = self.src.kernel.ncomps();
        let mut g = vec![C64::new(0.0, 0.0); xs.len() * nb * ys.len()];
        let mut v = [C64::new(0.0, 0.0); 3];
        for (k, a) in xs.iter().enumerate() {
            for (l, b) in ys.iter().enumerate() {
                let (p, q) = if swap { (b, a) } else { (a, b) };
                self.src.kernel.eval_masked(p, q, self.src.eps, &mut v);
                for c in 0..nb {
                    g[(k * nb + c) * ys.len() + l] = v[c];
                }
            }
        }
        g
    }
}

fn support(rows: &[Vec<Vec<(usize, f64)>>], i: usize) -> Vec<usize> {
    let mut s: Vec<usize> = rows.iter().flat_map(|r| r[i].iter().map(|e| e.0)).collect();
    s.sort_unstable();
    s.dedup();
    s
}

impl BlockEval for BemBlock<'_> {
    fn row(&self, i: usize, out: &mut [C64]) {
        let zero = C64::new(0.0, 0.0);
        let nb = self.src.kernel.ncomps();
        let ny = self.yl.pts.len();
        let sup = support(&self.xl.rows, i);
        let xs: Vec<Point3> = sup.iter().map(|&p| self.xl.pts[p]).collect();
        let g = self.kernel_rows(&xs, &self.yl.pts, false);
        let nc = self.yl.rows.len();
        let mut h = vec![zero; nc * ny];
        for &(a, b, c, s) in &self.src.terms {
            for &(p, phi) in &self.xl.rows[a][i] {
                let k = sup.binary_search(&p).unwrap();
                let coef = s * phi;
                let gr = &g[(k * nb + b) * ny..(k * nb + b + 1) * ny];
                for (hv, &gv) in h[c * ny..(c + 1) * ny].iter_mut().zip(gr) {
                    *hv += gv * coef;
                }
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = zero;
            for c in 0..nc {
                for &(l, psi) in &self.yl.rows[c][j] {
                    acc += h[c * ny + l] * psi;
                }
            }
            *o = acc;
        }
    }

    fn col(&self, j: usize, out: &mut [C64]) {
        let zero = C64::new(0.0, 0.0);
        let nb = self.src.kernel.ncomps();
        let nx = self.xl.pts.len();
        let sup = support(&self.yl.rows, j);
        let ys: Vec<Point3> = sup.iter().map(|&p| self.yl.pts[p]).collect();
        let g = self.kernel_rows(&ys, &self.xl.pts, true);
        let na = self.xl.rows.len();
        let mut h = vec![zero; na * nx];
        for &(a, b, c, s) in &self.src.terms {
            for &(p, psi) in &self.yl.rows[c][j] {
                let k = sup.binary_search(&p).unwrap();
                let coef = s * psi;
                let gr = &g[(k * nb + b) * nx..(k * nb + b + 1) * nx];
                for (hv, &gv) in h[a * nx..(a + 1) * nx].iter_mut().zip(gr) {
                    *hv += gv * coef;
                }
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = zero;
            for a in 0..na {
                for &(l, phi) in &self.xl.rows[a][i] {
                    acc += h[a * nx + l] * phi;
                }
            }
            *o = acc;
        }
    }

    /// Cross approximation of the kernel between the quadrature points of the
    /// two clusters, projected on the dofs: each point row costs one kernel
    /// evaluation per point instead of one per pair of support points.
    fn low_rank(&self, tol: f64) -> Option<LowRank> {
        let (xs, ys) = (&self.xl.pts, &self.yl.pts);
        let m = self.xl.rows[0].len();
        let n = self.yl.rows[0].len();
        let kernel = self.src.kernel;
        let eps = self.src.eps;
        let mut comps: Vec<usize> = self.src.terms.iter().map(|t| t.1).collect();
        comps.sort_unstable();
        comps.dedup();
        let mut acc = LowRank::zeros(m, n);
        let mut v = [C64::new(0.0, 0.0); 3];
        for b in comps {
            let g = aca(
                xs.len(),
                ys.len(),
                tol,
                |i, out: &mut [C64]| {
                    for (o, y) in out.iter_mut().zip(ys) {
                        kernel.eval_masked(&xs[i], y, eps, &mut v);
                        *o = v[b];
                    }
                },
                |j, out: &mut [C64]| {
                    let mut w = [C64::new(0.0, 0.0); 3];
                    for (o, x) in out.iter_mut().zip(xs) {
                        kernel.eval_masked(x, &ys[j], eps, &mut w);
                        *o = w[b];
                    }
                },
            );
            let r = g.rank();
            if r == 0 {
                continue;
            }
            for &(a, _, c, sign) in self.src.terms.iter().filter(|t| t.1 == b) {
                let u = Mat::from_fn(m, r, |i, k| {
                    self.xl.rows[a][i]
                        .iter()
                        .map(|&(p, phi)| g.u[(p, k)] * (sign * phi))
                        .sum::<C64>()
                });
                let w = Mat::from_fn(n, r, |j, k| {
                    self.yl.rows[c][j]
                        .iter()
                        .map(|&(l, psi)| g.v[(l, k)] * psi)
                        .sum::<C64>()
                });
                acc.append(&LowRank::new(u, w));
            }
        }
        if acc.rank() > 0 {
            acc.recompress(tol);
        }
        Some(acc)
    }

    fn dense(&self) -> Mat<C64> {
        let zero = C64::new(0.0, 0.0);
        let nb = self.src.kernel.ncomps();
        let (nx, ny) = (self.xl.pts.len(), self.yl.pts.len());
        let m = self.xl.rows[0].len();
        let n = self.yl.rows[0].len();
        let g = self.kernel_rows(&self.xl.pts, &self.yl.pts, false);
        let mut out = Mat::zeros(m, n);
        let mut t = vec![zero; nx * n];
        for &(a, b, c, s) in &self.src.terms {
            for p in 0..nx {
                let grow = &g[(p * nb + b) * ny..(p * nb + b + 1) * ny];
                for (tv, col) in t[p * n..(p + 1) * n].iter_mut().zip(&self.yl.rows[c]) {
                    *tv = col.iter().map(|&(l, psi)| grow[l] * psi).sum();
                }
            }
            for (i, row) in self.xl.rows[a].iter().enumerate() {
                for &(p, phi) in row {
                    let coef = s * phi;
                    for j in 0..n {
                        out[(i, j)] += t[p * n + j] * coef;
                    }
                }
            }
        }
        out
    }
}

fn h_product(x: &Side, y: &Side, kernel: &Kernel, terms: Vec<Term>, same: bool, opts: &HOptions) -> Result<HMatrix> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return invalid(format!("tolerance must lie in (0, 1), got {}", opts.tol));
    }
    let eps = guard(&x.points, &y.points);
    let rt = Arc::new(build_cluster_tree_with_boxes(&x.locations, &x.boxes(), opts.leaf_size));
    let ct = if same {
        rt.clone()
    } else {
        Arc::new(build_cluster_tree_with_boxes(&y.locations, &y.boxes(), opts.leaf_size))
    };
    let src = BemSource {
        x,
        y,
        kernel: *kernel,
        terms,
        eps,
    };
    HMatrix::build(&src, rt, ct, opts.tol, opts.eta)
}

/// Hierarchical approximation of [`bem_dense`] to relative accuracy `tol`.
pub fn bem_h(
    dom_x: &Domain,
    dom_y: &Domain,
    test: &FemSpace,
    kernel: &Kernel,
    trial: &FemSpace,
    tol: f64,
) -> Result<HMatrix> {
    bem_h_with(dom_x, dom_y, test, kernel, trial, &HOptions::new(tol))
}

pub fn bem_h_with(
    dom_x: &Domain,
    dom_y: &Domain,
    test: &FemSpace,
    kernel: &Kernel,
    trial: &FemSpace,
    opts: &HOptions,
) -> Result<HMatrix> {
    let x = Side::from_space(dom_x, test)?;
    let y = Side::from_space(dom_y, trial)?;
    let terms = contraction(x.ncomps(), kernel.ncomps(), y.ncomps())?;
    let same = x.points == y.points && x.locations == y.locations;
    h_product(&x, &y, kernel, terms, same, opts)
}

/// Hierarchical approximation of [`radiation`].
pub fn radiation_h(
    points: &[Point3],
    dom_y: &Domain,
    kernel: &Kernel,
    trial: &FemSpace,
    opts: &HOptions,
) -> Result<HMatrix> {
    let y = Side::from_space(dom_y, trial)?;
    let terms = contraction(1, kernel.ncomps(), y.ncomps())?;
    if points.is_empty() {
        return invalid("no observation points");
    }
    let eps = guard(points, &y.points);
    let loc = PointLocator::new(&y.points, eps);
    for (i, p) in points.iter().enumerate() {
        if let Some(l) = loc.find(*p) {
            return Err(Error::SingularEvaluation {
                row: i,
                col: l,
                distance: geometry::dist(*p, y.points[l]),
            });
        }
    }
    let x = Side::from_points(points);
    h_product(&x, &y, kernel, terms, false, opts)
}
