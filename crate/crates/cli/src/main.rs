use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use galerkin_cli::demos::bench::{bench_csv, hmatrix_bench, BenchConfig};
use galerkin_cli::demos::cfie::{cfie_sphere, CfieConfig, DEFAULT_BETA};
use galerkin_cli::demos::eigencube::eigencube;
use galerkin_cli::demos::helmholtz::{helmholtz_sphere, HelmholtzConfig};
use galerkin_cli::demos::laplace::{laplace_fourier, laplace_neumann};
use galerkin_cli::demos::{Storage, Wave};
use galerkin_cli::report::OutDir;

/// FEM and BEM demos: Laplace problems, eigenvalues and sphere scattering.
#[derive(Parser)]
#[command(name = "galerkin", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GALERKIN_THREADS")]
    threads: Option<usize>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct WaveArgs {
    /// Frequency in Hz (sound speed 340 m/s).
    #[arg(long, conflicts_with_all = ["auto_k", "k"])]
    freq: Option<f64>,

    /// Wavenumber 1 / (longest edge); the default.
    #[arg(long)]
    auto_k: bool,

    /// Wavenumber.
    #[arg(long, conflicts_with = "auto_k")]
    k: Option<f64>,
}

impl WaveArgs {
    fn wave(&self) -> Wave {
        match (self.freq, self.k) {
            (Some(f), _) => Wave::Freq(f),
            (_, Some(k)) => Wave::Wavenumber(k),
            _ => Wave::AutoK,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// -Δu + u = x² on the unit disk with Neumann conditions (P1).
    LaplaceNeumann {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// -Δu + u = 0 on the unit disk with ∂u/∂n + u = 1 (P2).
    LaplaceFourier {
        #[arg(long, default_value_t = 4000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dirichlet eigenvalues on [0,1]×[0,½]×[0,½] (P1).
    Eigencube {
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        neig: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sound-soft scattering by the unit sphere.
    HelmholtzSphere {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[command(flatten)]
        wave: WaveArgs,
        /// H-matrix tolerance; dense storage when omitted.
        #[arg(long)]
        tol: Option<f64>,
        /// Memory cap of dense assembly in bytes.
        #[arg(long)]
        dense_cap: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perfectly conducting sphere with the combined field integral equation (RWG).
    CfieSphere {
        #[arg(long, default_value_t = 642)]
        n: usize,
        #[command(flatten)]
        wave: WaveArgs,
        /// Weight of the electric equation: 1 is EFIE, 0 is MFIE.
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        /// H-matrix tolerance; dense storage when omitted.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assembly, regularization and solve timings of helmholtz-sphere.
    HmatrixBench {
        /// Comma separated vertex counts.
        #[arg(long, value_delimiter = ',', default_values_t = [2562, 10242, 40962])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Fixed frequency in Hz.
        #[arg(long, num_args = 0..=1, default_missing_value = "316", conflicts_with = "scaled_freq")]
        fixed_freq: Option<f64>,
        /// Frequency following the mesh, k = 1 / (longest edge); the default.
        #[arg(long)]
        scaled_freq: bool,
        /// Time assembly and regularization only.
        #[arg(long)]
        skip_solve: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs the command; `Ok(false)` when a solver did not converge.
fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let force = cli.force;
    match cli.cmd {
        Command::LaplaceNeumann { n, out } => {
            let out = OutDir::create(out, force)?;
            out.check(&["u.vtk", "report.csv", "report.txt"])?;
            let res = laplace_neumann(n, &|x| x[0] * x[0])?;
            res.write_vtk(&out)?;
            finish(&res.report, &out)?;
            Ok(res.converged())
        }
        Command::LaplaceFourier { n, out } => {
            let out = OutDir::create(out, force)?;
            out.check(&["u.vtk", "report.csv", "report.txt"])?;
            let res = laplace_fourier(n, 1.0)?;
            res.write_vtk(&out)?;
            finish(&res.report, &out)?;
            Ok(res.converged())
        }
        Command::Eigencube { n, neig, out } => {
            let out = OutDir::create(out, force)?;
            out.check(&["eigenvalues.csv", "report.csv", "report.txt"])?;
            let res = eigencube(n, neig)?;
            res.write(&out)?;
            print!("{}", res.table_csv());
            finish(&res.report, &out)?;
            Ok(res.converged())
        }
        Command::HelmholtzSphere {
            n,
            wave,
            tol,
            dense_cap,
            out,
        } => {
            let out = OutDir::create(out, force)?;
            out.check(&["sphere.vtk", "total_field.vtk", "report.csv", "report.txt"])?;
            let mut cfg = HelmholtzConfig::new(n, wave.wave(), tol);
            if let Some(c) = dense_cap {
                cfg.storage.dense_cap = c;
            }
            let res = helmholtz_sphere(&cfg)?;
            res.write(&out)?;
            finish(&res.report, &out)?;
            Ok(res.converged)
        }
        Command::CfieSphere {
            n,
            wave,
            beta,
            tol,
            out,
        } => {
            let out = OutDir::create(out, force)?;
            out.check(&["current.vtk", "report.csv", "report.txt"])?;
            let cfg = CfieConfig {
                n,
                wave: wave.wave(),
                beta,
                storage: Storage::new(tol),
            };
            let res = cfie_sphere(&cfg)?;
            res.write(&out)?;
            finish(&res.report, &out)?;
            Ok(res.converged)
        }
        Command::HmatrixBench {
            n,
            tol,
            fixed_freq,
            scaled_freq: _,
            skip_solve,
            out,
        } => {
            let out = OutDir::create(out, force)?;
            let cfg = BenchConfig {
                sizes: n,
                wave: fixed_freq.map_or(Wave::AutoK, Wave::Freq),
                storage: Storage::new(Some(tol)),
                solve: !skip_solve,
            };
            let rows = hmatrix_bench(&cfg, Some(&out))?;
            print!("{}", bench_csv(&rows));
            Ok(true)
        }
    }
}

fn finish(report: &galerkin_cli::report::RunReport, out: &OutDir) -> Result<()> {
    report.write(out)?;
    print!("{}", report.to_text());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: the solver did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
