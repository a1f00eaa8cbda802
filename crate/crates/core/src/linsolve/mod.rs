//! Linear solvers: Krylov methods, dense LU and generalized eigenpairs.

mod eigen;
mod krylov;

use faer::linalg::solvers::Solve;
use faer::Mat;

pub use eigen::{eig_smallest_generalized, EigenPairs, SparseCholesky, EIGEN_RESIDUAL};
pub use krylov::{cg, gmres, GmresOptions, SolveResult};

use crate::error::{invalid, Error, Result};
use crate::hmatrix::HMatrix;
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;
use crate::C64;

/// A square linear map.
pub trait LinearOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

impl<T: Scalar> LinearOperator<T> for SparseMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        y.fill(T::zero());
        self.matvec_add(T::one(), x, y);
    }
}

impl LinearOperator<C64> for HMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let r = self.matvec(x).expect("dimension checked by the solver");
        y.copy_from_slice(&r);
    }
}

impl LinearOperator<C64> for Mat<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    pub n: usize,
    pub f: F,
}

impl<T: Scalar, F: Fn(&[T], &mut [T]) + Sync> LinearOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        (self.f)(x, y)
    }
}

/// Dense LU with partial pivoting.
pub struct DenseLu {
    lu: faer::linalg::solvers::PartialPivLu<C64>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: &Mat<C64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return invalid("LU needs a square matrix");
        }
        Ok(DenseLu {
            lu: a.partial_piv_lu(),
            n: a.nrows(),
        })
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return invalid(format!("right-hand side has length {}, expected {}", b.len(), self.n));
        }
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        let out: Vec<C64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("singular matrix".into()));
        }
        Ok(out)
    }
}

pub fn dense_solve(a: &Mat<C64>, b: &[C64]) -> Result<Vec<C64>> {
    DenseLu::new(a)?.solve(b)
}
