//! Galerkin finite and boundary element assembly.
//!
//! Operators are assembled in factorized form: a bilinear form becomes
//! `Bᵀ W C` with sparse basis-evaluation matrices `B`, `C` and the diagonal of
//! quadrature weights `W`; boundary integral operators become
//! `Φᵀ Wx G Wy Ψ` with a dense or hierarchical kernel matrix `G`, corrected by
//! sparse semi-analytic near-field terms.

pub mod assembly;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod hmatrix;
pub mod kernels;
pub mod linsolve;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
