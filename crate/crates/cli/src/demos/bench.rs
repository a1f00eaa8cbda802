//! Timing sweep of the sphere scattering problem over mesh sizes.

use std::fmt::Write as _;

use anyhow::{ensure, Result};

use super::helmholtz::{helmholtz_sphere, HelmholtzConfig};
use super::{Storage, Wave};
use crate::report::OutDir;

pub const BENCH_HEADER: &str = "n_dof,t_ass,t_reg,t_sol,freq_hz";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n_dof: usize,
    pub t_ass: f64,
    pub t_reg: f64,
    /// NaN when the solve was skipped.
    pub t_sol: f64,
    pub freq_hz: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// `Wave::Freq` for a fixed frequency, `Wave::AutoK` to follow the mesh.
    pub wave: Wave,
    pub storage: Storage,
    pub solve: bool,
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{BENCH_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.4},{:.4},{:.4},{:.1}",
            r.n_dof, r.t_ass, r.t_reg, r.t_sol, r.freq_hz
        );
    }
    s
}

/// Least-squares slope of `log t` against `log n`.
pub fn scaling_exponent(n: &[f64], t: &[f64]) -> f64 {
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs the sweep, writing `bench.csv` after every size when `out` is given.
pub fn hmatrix_bench(cfg: &BenchConfig, out: Option<&OutDir>) -> Result<Vec<BenchRow>> {
    ensure!(!cfg.sizes.is_empty(), "--n needs at least one size");
    if let Some(o) = out {
        o.check(&["bench.csv"])?;
    }
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let h = HelmholtzConfig {
            n,
            wave: cfg.wave,
            storage: cfg.storage,
            radiate: false,
            solve: cfg.solve,
        };
        let res = helmholtz_sphere(&h)?;
        ensure!(
            !cfg.solve || res.converged,
            "solve did not converge at n = {n} (residual {:e})",
            res.residual
        );
        rows.push(BenchRow {
            n_dof: res.space.n_dofs(),
            t_ass: res.t_ass,
            t_reg: res.t_reg,
            t_sol: res.t_sol,
            freq_hz: super::frequency(res.k),
        });
        log::info!("{}", bench_csv(&rows).lines().last().unwrap_or_default());
        if let Some(o) = out {
            std::fs::write(o.path().join("bench.csv"), bench_csv(&rows))?;
        }
    }
    Ok(rows)
}
