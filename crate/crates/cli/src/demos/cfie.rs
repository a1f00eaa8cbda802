//! Scattering of an electromagnetic plane wave by the perfectly conducting
//! unit sphere with the combined field integral equation on RWG elements.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{ensure, Result};
use galerkin::assembly::{bilinear, linear, regularize};
use galerkin::fem::{div, nx, FemSpace};
use galerkin::geometry::{self, Point3};
use galerkin::kernels::Kernel;
use galerkin::linsolve::SparseCholesky;
use galerkin::mesh::{self, Mesh, VtkData, VtkField};
use galerkin::quadrature::{make_domain, Domain};
use galerkin::C64;

use super::{frequency, BemOp, Storage, Wave};
use crate::report::{OutDir, RunReport};

pub const DIRECTION: Point3 = [0.0, 0.0, -1.0];
pub const POLARIZATION: Point3 = [0.0, 1.0, 0.0];
pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct CfieConfig {
    pub n: usize,
    pub wave: Wave,
    /// Weight of the electric equation, in `[0, 1]`.
    pub beta: f64,
    pub storage: Storage,
}

pub struct CfieOutcome {
    pub report: RunReport,
    pub k: f64,
    pub mesh: Arc<Mesh>,
    pub domain: Domain,
    pub space: FemSpace,
    pub current: Vec<C64>,
    pub residual: f64,
    pub converged: bool,
    pub gram_spd: bool,
}

impl CfieOutcome {
    /// Values of the current at the quadrature points, one vector per component.
    fn current_at(&self, dom: &Domain) -> Result<Vec<Vec<C64>>> {
        let b = self.space.eval_matrix(dom)?;
        Ok(b.comps
            .iter()
            .map(|c| {
                let mut v = vec![C64::new(0.0, 0.0); c.nrows()];
                c.matvec_add(C64::new(1.0, 0.0), &self.current, &mut v);
                v
            })
            .collect())
    }

    /// Bistatic radar cross section `4π |E_∞|²` for a unit incident field.
    pub fn rcs(&self, dirs: &[Point3]) -> Result<Vec<f64>> {
        let q = self.domain.quadrature();
        let j = self.current_at(&self.domain)?;
        Ok(dirs
            .iter()
            .map(|d| {
                let mut jt = [C64::new(0.0, 0.0); 3];
                for (l, (y, w)) in q.points.iter().zip(&q.weights).enumerate() {
                    let ph = C64::from_polar(*w, -self.k * geometry::dot(*d, *y));
                    for c in 0..3 {
                        jt[c] += ph * j[c][l];
                    }
                }
                let along: C64 = (0..3).map(|c| jt[c] * d[c]).sum();
                let perp2: f64 = (0..3).map(|c| (jt[c] - along * d[c]).norm_sqr()).sum();
                self.k * self.k * perp2 / (4.0 * PI)
            })
            .collect())
    }

    pub fn write(&self, out: &OutDir) -> Result<()> {
        let centers = Domain::centroid(self.mesh.clone())?;
        let j = self.current_at(&centers)?;
        let mag: Vec<f64> = (0..self.mesh.n_elements())
            .map(|e| (0..3).map(|c| j[c][e].norm_sqr()).sum::<f64>().sqrt())
            .collect();
        mesh::write_vtk(
            out.file("current.vtk")?,
            &self.mesh,
            &[VtkField::cell("abs_j", VtkData::Real(&mag))],
        )?;
        Ok(())
    }
}

pub fn cfie_sphere(cfg: &CfieConfig) -> Result<CfieOutcome> {
    let beta = cfg.beta;
    ensure!((0.0..=1.0).contains(&beta), "--beta must lie in [0, 1], got {beta}");
    let mesh = Arc::new(mesh::build_sphere(cfg.n, 1.0)?);
    let k = cfg.wave.wavenumber(mesh::edge_stats(&mesh)?.max_len);
    ensure!(k > 0.0, "the electromagnetic problem needs a positive wavenumber");
    let sigma = make_domain(mesh.clone(), 3)?;
    let vh = FemSpace::new(mesh.clone(), "RWG".parse()?)?;
    let gxy = Kernel::helmholtz(k);
    let hxy = gxy.grad();
    let i = C64::new(0.0, 1.0);
    let quarter = 1.0 / (4.0 * PI);

    let t0 = Instant::now();
    let id = bilinear(&sigma, &vh, &vh)?;
    let gram_spd = SparseCholesky::new(&id).is_ok();
    let mut lhs: Option<BemOp> = None;
    let mut parts = Vec::new();
    if beta > 0.0 {
        let c1 = -beta * i * k * quarter;
        let c2 = beta * i * quarter / k;
        parts.push((
            BemOp::assemble(&sigma, &vh, &gxy, &vh, c1, &cfg.storage)?,
            c1,
            "[1/r]",
            vh.clone(),
            vh.clone(),
        ));
        let dv = div(&vh);
        parts.push((
            BemOp::assemble(&sigma, &dv, &gxy, &dv, c2, &cfg.storage)?,
            c2,
            "[1/r]",
            dv.clone(),
            dv,
        ));
    }
    if beta < 1.0 {
        let c = C64::new(-(1.0 - beta) * quarter, 0.0);
        let nv = nx(&vh);
        parts.push((
            BemOp::assemble(&sigma, &nv, &hxy, &vh, c, &cfg.storage)?,
            c,
            "grady[1/r]",
            nv,
            vh.clone(),
        ));
    }
    let t_ass = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    for (mut op, c, name, test, trial) in parts {
        op.add_sparse(c, &regularize(&sigma, &sigma, &test, name, &trial)?)?;
        lhs = Some(match lhs {
            None => op,
            Some(acc) => acc.add(&op)?,
        });
    }
    let mut lhs = lhs.expect("at least one equation is active");
    if beta < 1.0 {
        lhs.add_sparse(C64::new(0.5 * (1.0 - beta), 0.0), &id)?;
    }
    let t_reg = t0.elapsed().as_secs_f64();

    let e_dir = POLARIZATION;
    let h_dir = geometry::cross(DIRECTION, POLARIZATION);
    let comp = |v: Point3, c: usize| {
        move |x: &[Point3]| -> Vec<C64> {
            x.iter()
                .map(|p| C64::from_polar(v[c], k * geometry::dot(*p, DIRECTION)))
                .collect()
        }
    };
    let (e0, e1, e2) = (comp(e_dir, 0), comp(e_dir, 1), comp(e_dir, 2));
    let (h0, h1, h2) = (comp(h_dir, 0), comp(h_dir, 1), comp(h_dir, 2));
    let fe = linear(&sigma, &vh, &[&e0, &e1, &e2])?;
    let fh = linear(&sigma, &nx(&vh), &[&h0, &h1, &h2])?;
    let rhs: Vec<C64> = fe.iter().zip(&fh).map(|(e, h)| beta * e - (1.0 - beta) * h).collect();

    let t0 = Instant::now();
    let current = lhs.lu()?.solve(&rhs)?;
    let t_sol = t0.elapsed().as_secs_f64();
    let residual = lhs.residual(&current, &rhs)?;
    let converged = residual <= cfg.storage.tol.map_or(super::SOLVER_TOL, |t| 10.0 * t);

    let mut report = RunReport::new("cfie-sphere");
    report.set("n", cfg.n);
    report.set("n_vertices", mesh.n_vertices());
    report.set("n_dof", vh.n_dofs());
    report.set("k", k);
    report.set("freq_hz", frequency(k));
    report.set("beta", beta);
    report.set("storage", cfg.storage.label());
    if let Some(tol) = cfg.storage.tol {
        report.set("tol", tol);
    }
    report.set("t_ass", t_ass);
    report.set("t_reg", t_reg);
    report.set("t_sol", t_sol);
    report.set("residual", residual);
    report.set("converged", converged);
    report.set("gram_spd", gram_spd);

    let out = CfieOutcome {
        report,
        k,
        mesh,
        domain: sigma,
        space: vh,
        current,
        residual,
        converged,
        gram_spd,
    };
    let rcs = out.rcs(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])?;
    let mut report = out.report.clone();
    report.set("rcs_back", rcs[0]);
    report.set("rcs_forward", rcs[1]);
    Ok(CfieOutcome { report, ..out })
}
