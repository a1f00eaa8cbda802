//! Sound-soft scattering of a plane wave by the unit sphere with the single
//! layer formulation.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use galerkin::assembly::{linear, radiation, radiation_h, regularize, regularize_radiation, HOptions};
use galerkin::fem::FemSpace;
use galerkin::geometry::{self, Point3};
use galerkin::kernels::Kernel;
use galerkin::mesh::{self, Mesh, VtkData, VtkField};
use galerkin::quadrature::{make_domain, Domain};
use galerkin::C64;

use super::{frequency, BemOp, Storage, Wave};
use crate::report::{OutDir, RunReport};

/// Propagation direction of the incident wave.
pub const DIRECTION: Point3 = [0.0, 0.0, -1.0];

#[derive(Debug, Clone, Copy)]
pub struct HelmholtzConfig {
    pub n: usize,
    pub wave: Wave,
    pub storage: Storage,
    /// Evaluate the total field on the observation square.
    pub radiate: bool,
    /// Factor and solve; assembly only when off.
    pub solve: bool,
}

impl HelmholtzConfig {
    pub fn new(n: usize, wave: Wave, tol: Option<f64>) -> Self {
        HelmholtzConfig {
            n,
            wave,
            storage: Storage::new(tol),
            radiate: true,
            solve: true,
        }
    }
}

pub struct HelmholtzOutcome {
    pub report: RunReport,
    pub k: f64,
    pub mesh: Arc<Mesh>,
    pub domain: Domain,
    pub space: FemSpace,
    pub lambda: Vec<C64>,
    pub residual: f64,
    pub converged: bool,
    pub t_ass: f64,
    pub t_reg: f64,
    pub t_sol: f64,
    /// Observation square and `|p_tot|` at its vertices.
    pub square: Option<(Mesh, Vec<f64>)>,
}

fn plane_wave(k: f64, x: &Point3) -> C64 {
    C64::from_polar(1.0, k * geometry::dot(*x, DIRECTION))
}

impl HelmholtzOutcome {
    /// Far-field pattern `F(x̂)` of the scattered wave, `p_sca ~ F(x̂) exp(ik|x|)/|x|`.
    pub fn far_field(&self, dirs: &[Point3]) -> Result<Vec<C64>> {
        let q = self.domain.quadrature();
        let b = self.space.eval_matrix(&self.domain)?;
        let mut rho = vec![C64::new(0.0, 0.0); q.len()];
        b.comps[0].matvec_add(C64::new(1.0, 0.0), &self.lambda, &mut rho);
        Ok(dirs
            .iter()
            .map(|d| {
                let s: C64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .zip(&rho)
                    .map(|((y, w), r)| C64::from_polar(*w, -self.k * geometry::dot(*d, *y)) * r)
                    .sum();
                -s / (4.0 * PI)
            })
            .collect())
    }

    /// Total field `p_inc - S λ` at arbitrary points, near-field corrected.
    pub fn total_field(&self, points: &[Point3]) -> Result<Vec<C64>> {
        let kernel = Kernel::helmholtz(self.k);
        let s = radiation(points, &self.domain, &kernel, &self.space)?;
        let reg = regularize_radiation(points, &self.domain, "[1/r]", &self.space)?;
        let mut sl = vec![C64::new(0.0, 0.0); points.len()];
        reg.matvec_add(C64::new(1.0, 0.0), &self.lambda, &mut sl);
        Ok(points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let dense: C64 = (0..s.ncols()).map(|j| s[(i, j)] * self.lambda[j]).sum();
                plane_wave(self.k, x) - (dense + sl[i]) / (4.0 * PI)
            })
            .collect())
    }

    pub fn write(&self, out: &OutDir) -> Result<()> {
        out.check(&["sphere.vtk", "total_field.vtk"])?;
        let nodal = self
            .space
            .interpolate(&self.lambda, self.mesh.vertices())?
            .swap_remove(0);
        mesh::write_vtk(
            out.file("sphere.vtk")?,
            &self.mesh,
            &[VtkField::point("lambda", VtkData::Complex(&nodal))],
        )?;
        if let Some((sq, p)) = &self.square {
            mesh::write_vtk(
                out.file("total_field.vtk")?,
                sq,
                &[VtkField::point("abs_p_tot", VtkData::Real(p))],
            )?;
        }
        Ok(())
    }
}

/// The `5 × 5` observation square in the `xz` plane, meshed with about `5n` vertices.
pub fn observation_square(n: usize) -> Result<Mesh> {
    let sq = mesh::build_square(5 * n, [5.0, 5.0])?;
    let vtx: Vec<Point3> = sq.vertices().iter().map(|v| [v[0], 0.0, v[1]]).collect();
    let rotated = Mesh::new(vtx, sq.elements().to_vec(), 3)?;
    Ok(mesh::swap(&rotated))
}

pub fn helmholtz_sphere(cfg: &HelmholtzConfig) -> Result<HelmholtzOutcome> {
    let mesh = Arc::new(mesh::build_sphere(cfg.n, 1.0)?);
    let stats = mesh::edge_stats(&mesh)?;
    let k = cfg.wave.wavenumber(stats.max_len);
    log::info!("sphere: {} vertices, k = {k:.4}", mesh.n_vertices());
    let s2 = make_domain(mesh.clone(), 3)?;
    let vh = FemSpace::new(mesh.clone(), "P1".parse()?)?;
    let kernel = Kernel::helmholtz(k);
    let quarter = C64::new(1.0 / (4.0 * PI), 0.0);

    let t0 = Instant::now();
    let mut lhs = BemOp::assemble(&s2, &vh, &kernel, &vh, quarter, &cfg.storage)?;
    let t_ass = t0.elapsed().as_secs_f64();
    log::info!("assembled in {t_ass:.2} s");

    let t0 = Instant::now();
    let reg = regularize(&s2, &s2, &vh, "[1/r]", &vh)?;
    lhs.add_sparse(quarter, &reg)?;
    let t_reg = t0.elapsed().as_secs_f64();
    log::info!("regularized in {t_reg:.2} s");

    let pw = |x: &[Point3]| x.iter().map(|p| plane_wave(k, p)).collect::<Vec<C64>>();
    let rhs = linear(&s2, &vh, &[&pw])?;

    let mut report = RunReport::new("helmholtz-sphere");
    report.set("n", cfg.n);
    report.set("n_vertices", mesh.n_vertices());
    report.set("n_dof", vh.n_dofs());
    report.set("k", k);
    report.set("freq_hz", frequency(k));
    report.set("storage", cfg.storage.label());
    if let Some(tol) = cfg.storage.tol {
        report.set("tol", tol);
    }
    report.set("stored_entries", lhs.storage());
    report.set("t_ass", t_ass);
    report.set("t_reg", t_reg);

    let mut out = HelmholtzOutcome {
        report,
        k,
        mesh: mesh.clone(),
        domain: s2,
        space: vh,
        lambda: Vec::new(),
        residual: f64::NAN,
        converged: false,
        t_ass,
        t_reg,
        t_sol: f64::NAN,
        square: None,
    };
    if !cfg.solve {
        out.report.set("t_sol", "nan");
        return Ok(out);
    }

    let t0 = Instant::now();
    let lambda = lhs.lu()?.solve(&rhs)?;
    out.t_sol = t0.elapsed().as_secs_f64();
    log::info!("solved in {:.2} s", out.t_sol);
    out.residual = lhs.residual(&lambda, &rhs)?;
    out.converged = out.residual <= cfg.storage.tol.map_or(super::SOLVER_TOL, |t| 10.0 * t);
    out.lambda = lambda;
    drop(lhs);

    let ff = out.far_field(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])?;
    let r = &mut out.report;
    r.set("t_sol", out.t_sol);
    r.set("residual", out.residual);
    r.set("converged", out.converged);
    r.set(
        "lambda_abs_max",
        out.lambda.iter().map(|v| v.norm()).fold(0.0, f64::max),
    );
    r.set("far_field_back_abs", ff[0].norm());
    r.set("far_field_forward_abs", ff[1].norm());

    if cfg.radiate {
        let t0 = Instant::now();
        let sq = observation_square(cfg.n)?;
        let pts = sq.vertices().to_vec();
        let sdom = match cfg.storage.tol {
            Some(tol) => {
                let h = radiation_h(&pts, &out.domain, &kernel, &out.space, &HOptions::new(tol))?;
                h.matvec(&out.lambda)?
            }
            None => {
                let m = radiation(&pts, &out.domain, &kernel, &out.space)?;
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * out.lambda[j]).sum())
                    .collect()
            }
        };
        let reg = regularize_radiation(&pts, &out.domain, "[1/r]", &out.space)?;
        let mut near = vec![C64::new(0.0, 0.0); pts.len()];
        reg.matvec_add(C64::new(1.0, 0.0), &out.lambda, &mut near);
        let p: Vec<f64> = pts
            .iter()
            .zip(sdom.iter().zip(&near))
            .map(|(x, (s, n))| (plane_wave(k, x) - (s + n) / (4.0 * PI)).norm())
            .collect();
        out.report.set("n_observation", pts.len());
        out.report.set("p_tot_abs_max", p.iter().cloned().fold(0.0, f64::max));
        out.report.set("t_rad", t0.elapsed().as_secs_f64());
        out.square = Some((sq, p));
    }
    Ok(out)
}
