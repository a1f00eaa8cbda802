//! Galerkin assembly: finite element forms, boundary element operators,
//! radiation matrices and their near-field corrections.

mod bem;
mod fem_forms;
mod regularize;

use faer::Mat;

pub use bem::{
    bem_dense, bem_dense_capped, bem_h, bem_h_with, radiation, radiation_adjoint, radiation_h, HOptions,
    DEFAULT_DENSE_CAP,
};
pub use fem_forms::{bilinear, bilinear_weighted, linear, PointFn};
pub use regularize::{regularize, regularize_radiation, NEAR_FIELD_FACTOR};

use crate::error::{invalid, Result};
use crate::hmatrix::HMatrix;
use crate::sparse::SparseMatrix;
use crate::C64;

/// An assembled operator; rows belong to the test space.
#[derive(Debug, Clone)]
pub enum AssembledOperator {
    Sparse(SparseMatrix<f64>),
    Dense(Mat<C64>),
    H(HMatrix),
}

impl AssembledOperator {
    pub fn nrows(&self) -> usize {
        match self {
            AssembledOperator::Sparse(s) => s.nrows(),
            AssembledOperator::Dense(d) => d.nrows(),
            AssembledOperator::H(h) => h.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            AssembledOperator::Sparse(s) => s.ncols(),
            AssembledOperator::Dense(d) => d.ncols(),
            AssembledOperator::H(h) => h.ncols(),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols() {
            return invalid(format!("vector has length {}, expected {}", x.len(), self.ncols()));
        }
        Ok(match self {
            AssembledOperator::Sparse(s) => {
                let mut y = vec![C64::new(0.0, 0.0); s.nrows()];
                s.matvec_add(C64::new(1.0, 0.0), x, &mut y);
                y
            }
            AssembledOperator::Dense(d) => (0..d.nrows())
                .map(|i| (0..d.ncols()).map(|j| d[(i, j)] * x[j]).sum())
                .collect(),
            AssembledOperator::H(h) => h.matvec(x)?,
        })
    }
}
