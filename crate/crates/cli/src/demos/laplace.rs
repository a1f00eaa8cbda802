//! Laplace problems on the unit disk with Neumann and Fourier (Robin)
//! boundary conditions.

use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use galerkin::assembly::{bilinear, linear};
use galerkin::fem::{grad, FemSpace};
use galerkin::geometry::Point3;
use galerkin::mesh::{self, Mesh, VtkData, VtkField};
use galerkin::quadrature::make_domain;

use super::{spd_solve, SOLVER_TOL};
use crate::report::{OutDir, RunReport};

pub struct FemOutcome {
    pub report: RunReport,
    pub space: FemSpace,
    pub u: Vec<f64>,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

impl FemOutcome {
    pub fn converged(&self) -> bool {
        self.residual <= SOLVER_TOL
    }

    pub fn eval(&self, points: &[Point3]) -> Result<Vec<f64>> {
        Ok(self.space.interpolate(&self.u, points)?.swap_remove(0))
    }

    pub fn write_vtk(&self, out: &OutDir) -> Result<()> {
        let mesh = self.space.mesh();
        let nodal = self.eval(mesh.vertices())?;
        mesh::write_vtk(out.file("u.vtk")?, mesh, &[VtkField::point("u", VtkData::Real(&nodal))])?;
        Ok(())
    }
}

/// `-Δu + u = f` in the disk, `∂u/∂n = 0` on its boundary; P1 elements.
pub fn laplace_neumann(n: usize, source: &dyn Fn(Point3) -> f64) -> Result<FemOutcome> {
    let t0 = Instant::now();
    let mesh = Arc::new(mesh::build_disk(n, 1.0)?);
    let omega = make_domain(mesh.clone(), 3)?;
    let vh = FemSpace::new(mesh.clone(), "P1".parse()?)?;
    let k = bilinear(&omega, &grad(&vh), &grad(&vh))?.add(&bilinear(&omega, &vh, &vh)?)?;
    let f = |x: &[Point3]| x.iter().map(|p| source(*p)).collect::<Vec<f64>>();
    let rhs = linear(&omega, &vh, &[&f])?;
    let t_ass = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (u, residual) = spd_solve(&k, &rhs)?;
    let t_sol = t1.elapsed().as_secs_f64();

    let ones = |x: &[Point3]| vec![1.0; x.len()];
    let mass = linear(&omega, &vh, &[&ones])?;
    let integral: f64 = u.iter().zip(&mass).map(|(a, b)| a * b).sum();
    let mut out = FemOutcome {
        report: RunReport::new("laplace-neumann"),
        space: vh,
        u,
        residual,
    };
    let u0 = out.eval(&[[0.0; 3]])?[0];
    let r = &mut out.report;
    describe(r, n, &mesh, &out.space);
    r.set("t_ass", t_ass);
    r.set("t_sol", t_sol);
    r.set("residual", residual);
    r.set("u_origin", u0);
    r.set("u_integral", integral);
    r.set("u_max", out.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    r.set("u_min", out.u.iter().cloned().fold(f64::INFINITY, f64::min));
    Ok(out)
}

/// `-Δu + u = 0` in the disk, `∂u/∂n + u = g` on its boundary; P2 elements.
pub fn laplace_fourier(n: usize, g: f64) -> Result<FemOutcome> {
    let t0 = Instant::now();
    let mesh = Arc::new(mesh::build_disk(n, 1.0)?);
    let meshb = Arc::new(mesh::boundary(&mesh)?);
    let omega = make_domain(mesh.clone(), 7)?;
    let sigma = make_domain(meshb, 3)?;
    let vh = FemSpace::new(mesh.clone(), "P2".parse()?)?;
    let k = bilinear(&omega, &grad(&vh), &grad(&vh))?
        .add(&bilinear(&omega, &vh, &vh)?)?
        .add(&bilinear(&sigma, &vh, &vh)?)?;
    let gf = |x: &[Point3]| vec![g; x.len()];
    let rhs = linear(&sigma, &vh, &[&gf])?;
    let t_ass = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (u, residual) = spd_solve(&k, &rhs)?;
    let t_sol = t1.elapsed().as_secs_f64();

    let mut out = FemOutcome {
        report: RunReport::new("laplace-fourier"),
        space: vh,
        u,
        residual,
    };
    let u0 = out.eval(&[[0.0; 3]])?[0];
    let ring: Vec<Point3> = (0..16)
        .map(|i| {
            let t = i as f64 * std::f64::consts::PI / 8.0;
            [0.5 * t.cos(), 0.5 * t.sin(), 0.0]
        })
        .collect();
    let on_ring = out.eval(&ring)?;
    let r = &mut out.report;
    describe(r, n, &mesh, &out.space);
    r.set("t_ass", t_ass);
    r.set("t_sol", t_sol);
    r.set("residual", residual);
    r.set("u_origin", u0);
    r.set("u_r05_min", on_ring.iter().cloned().fold(f64::INFINITY, f64::min));
    r.set("u_r05_max", on_ring.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(out)
}

fn describe(r: &mut RunReport, n: usize, mesh: &Mesh, space: &FemSpace) {
    r.set("n", n);
    r.set("n_vertices", mesh.n_vertices());
    r.set("n_elements", mesh.n_elements());
    r.set("n_dof", space.n_dofs());
}
