//! The worked examples: FEM problems on a disk and a box, and scattering by
//! the unit sphere.

pub mod bench;
pub mod cfie;
pub mod eigencube;
pub mod helmholtz;
pub mod laplace;

use anyhow::{bail, Result};
use faer::Mat;
use galerkin::assembly::{bem_dense_capped, bem_h, DEFAULT_DENSE_CAP};
use galerkin::fem::FemSpace;
use galerkin::hmatrix::{HLu, HMatrix};
use galerkin::kernels::Kernel;
use galerkin::linsolve::{DenseLu, LinearOperator, SparseCholesky};
use galerkin::quadrature::Domain;
use galerkin::scalar::{norm2, Scalar};
use galerkin::sparse::SparseMatrix;
use galerkin::C64;

/// Relative residual below which a direct sparse solve counts as converged.
pub const SOLVER_TOL: f64 = 1e-8;

/// Speed of sound used to convert between wavenumber and frequency.
pub const SOUND_SPEED: f64 = 340.0;

/// How the wavenumber of a scattering run is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    /// Frequency in Hz.
    Freq(f64),
    /// `k = 1 / (longest mesh edge)`.
    AutoK,
    Wavenumber(f64),
}

impl Wave {
    pub fn wavenumber(&self, max_edge: f64) -> f64 {
        match *self {
            Wave::Freq(f) => 2.0 * std::f64::consts::PI * f / SOUND_SPEED,
            Wave::AutoK => 1.0 / max_edge,
            Wave::Wavenumber(k) => k,
        }
    }
}

pub fn frequency(k: f64) -> f64 {
    k * SOUND_SPEED / (2.0 * std::f64::consts::PI)
}

/// Dense or hierarchical storage of boundary element operators.
#[derive(Debug, Clone, Copy)]
pub struct Storage {
    /// Compression tolerance; dense assembly when `None`.
    pub tol: Option<f64>,
    /// Memory cap of dense assembly in bytes.
    pub dense_cap: u64,
}

impl Storage {
    pub fn new(tol: Option<f64>) -> Self {
        Storage {
            tol,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn label(&self) -> &'static str {
        if self.tol.is_some() {
            "hmatrix"
        } else {
            "dense"
        }
    }
}

pub enum BemOp {
    Dense(Mat<C64>),
    H(HMatrix),
}

pub enum BemLu {
    Dense(DenseLu),
    H(HLu),
}

impl BemLu {
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        Ok(match self {
            BemLu::Dense(lu) => lu.solve(b)?,
            BemLu::H(lu) => lu.solve(b)?,
        })
    }
}

impl BemOp {
    /// `alpha ∫∫ test · G · trial`.
    pub fn assemble(
        dom: &Domain,
        test: &FemSpace,
        kernel: &Kernel,
        trial: &FemSpace,
        alpha: C64,
        storage: &Storage,
    ) -> Result<BemOp> {
        let mut op = match storage.tol {
            Some(tol) => BemOp::H(bem_h(dom, dom, test, kernel, trial, tol)?),
            None => BemOp::Dense(bem_dense_capped(dom, dom, test, kernel, trial, storage.dense_cap)?),
        };
        op.scale(alpha);
        Ok(op)
    }

    pub fn nrows(&self) -> usize {
        match self {
            BemOp::Dense(m) => m.nrows(),
            BemOp::H(h) => h.nrows(),
        }
    }

    pub fn scale(&mut self, alpha: C64) {
        match self {
            BemOp::Dense(m) => {
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        m[(i, j)] *= alpha;
                    }
                }
            }
            BemOp::H(h) => h.scale(alpha),
        }
    }

    /// Adds `alpha * s`.
    pub fn add_sparse<T: Scalar>(&mut self, alpha: C64, s: &SparseMatrix<T>) -> Result<()> {
        match self {
            BemOp::Dense(m) => {
                for (i, j, v) in s.triplets() {
                    m[(i, j)] += alpha * v.to_c64();
                }
            }
            BemOp::H(h) => {
                let scaled = s.map(|v| alpha * v.to_c64());
                h.add_sparse(&scaled)?;
            }
        }
        Ok(())
    }

    pub fn add(self, other: &BemOp) -> Result<BemOp> {
        Ok(match (self, other) {
            (BemOp::Dense(mut a), BemOp::Dense(b)) => {
                for j in 0..a.ncols() {
                    for i in 0..a.nrows() {
                        a[(i, j)] += b[(i, j)];
                    }
                }
                BemOp::Dense(a)
            }
            (BemOp::H(a), BemOp::H(b)) => {
                let tol = a.tol().min(b.tol());
                BemOp::H(a.add(b, tol)?)
            }
            _ => bail!("cannot add dense and hierarchical operators"),
        })
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        Ok(match self {
            BemOp::Dense(m) => {
                let mut y = vec![C64::new(0.0, 0.0); m.nrows()];
                m.apply(x, &mut y);
                y
            }
            BemOp::H(h) => h.matvec(x)?,
        })
    }

    pub fn lu(&self) -> Result<BemLu> {
        Ok(match self {
            BemOp::Dense(m) => BemLu::Dense(DenseLu::new(m)?),
            BemOp::H(h) => BemLu::H(h.lu()?),
        })
    }

    /// `‖A x - b‖ / ‖b‖`.
    pub fn residual(&self, x: &[C64], b: &[C64]) -> Result<f64> {
        let ax = self.matvec(x)?;
        let r: Vec<C64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
        Ok(relative(norm2(&r), norm2(b)))
    }

    pub fn storage(&self) -> usize {
        match self {
            BemOp::Dense(m) => m.nrows() * m.ncols(),
            BemOp::H(h) => h.storage(),
        }
    }
}

fn relative(r: f64, b: f64) -> f64 {
    if b == 0.0 {
        r
    } else {
        r / b
    }
}

/// Sparse Cholesky solve; returns the solution and its relative residual.
pub fn spd_solve(a: &SparseMatrix<f64>, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let x = SparseCholesky::new(a)?.solve(b);
    let ax = a.matvec(&x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
    Ok((x, relative(norm2(&r), norm2(b))))
}
