//! Dirichlet eigenvalues of the Laplacian on the box `[0,1]×[0,½]×[0,½]`.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{ensure, Result};
use galerkin::assembly::bilinear;
use galerkin::fem::{grad, FemSpace};
use galerkin::linsolve::{eig_smallest_generalized, EIGEN_RESIDUAL};
use galerkin::mesh;
use galerkin::quadrature::make_domain;

use crate::report::{OutDir, RunReport};

pub const BOX: [f64; 3] = [1.0, 0.5, 0.5];

pub struct EigenOutcome {
    pub report: RunReport,
    pub exact: Vec<f64>,
    pub computed: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl EigenOutcome {
    pub fn relative_errors(&self) -> Vec<f64> {
        self.exact
            .iter()
            .zip(&self.computed)
            .map(|(e, c)| (c - e).abs() / e)
            .collect()
    }

    pub fn converged(&self) -> bool {
        self.residuals.iter().all(|r| *r <= EIGEN_RESIDUAL)
    }

    pub fn table_csv(&self) -> String {
        let mut s = String::from("index,exact,computed,relative_error\n");
        for (i, ((e, c), r)) in self
            .exact
            .iter()
            .zip(&self.computed)
            .zip(self.relative_errors())
            .enumerate()
        {
            let _ = writeln!(s, "{},{e:.4},{c:.4},{r:.4}", i + 1);
        }
        s
    }

    pub fn write(&self, out: &OutDir) -> Result<()> {
        out.write("eigenvalues.csv", &self.table_csv())
    }
}

/// The `count` smallest values of `π²(l²/Lx² + m²/Ly² + n²/Lz²)`, `l, m, n ≥ 1`,
/// with multiplicity.
pub fn exact_eigenvalues(count: usize) -> Vec<f64> {
    let pi2 = std::f64::consts::PI.powi(2);
    let lim = count + 2;
    let mut v = Vec::with_capacity(lim * lim * lim);
    for l in 1..=lim {
        for m in 1..=lim {
            for n in 1..=lim {
                let s = (l * l) as f64 / (BOX[0] * BOX[0])
                    + (m * m) as f64 / (BOX[1] * BOX[1])
                    + (n * n) as f64 / (BOX[2] * BOX[2]);
                v.push(pi2 * s);
            }
        }
    }
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

pub fn eigencube(n: usize, neig: usize) -> Result<EigenOutcome> {
    ensure!(neig > 0, "--neig must be positive");
    let t0 = Instant::now();
    let mesh = Arc::new(mesh::build_cube(n, BOX)?);
    let bound = mesh::boundary(&mesh)?;
    let omega = make_domain(mesh.clone(), 4)?;
    let vh = FemSpace::new(mesh.clone(), "P1".parse()?)?.dirichlet(&bound)?;
    let k = bilinear(&omega, &grad(&vh), &grad(&vh))?;
    let m = bilinear(&omega, &vh, &vh)?;
    let t_ass = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let pairs = eig_smallest_generalized(&k, &m, neig)?;
    let t_sol = t1.elapsed().as_secs_f64();

    let out = EigenOutcome {
        report: RunReport::new("eigencube"),
        exact: exact_eigenvalues(neig),
        computed: pairs.values,
        residuals: pairs.residuals,
    };
    let mut report = out.report.clone();
    report.set("n", n);
    report.set("neig", neig);
    report.set("n_vertices", mesh.n_vertices());
    report.set("n_elements", mesh.n_elements());
    report.set("n_dof", vh.n_dofs());
    report.set("t_ass", t_ass);
    report.set("t_sol", t_sol);
    report.set("eigenvalues", join(&out.computed));
    report.set("relative_errors", join(&out.relative_errors()));
    report.set("max_residual", out.residuals.iter().cloned().fold(0.0, f64::max));
    Ok(EigenOutcome { report, ..out })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}
