//! Worked examples of the galerkin toolkit as library functions, shared by
//! the `galerkin` binary and the acceptance tests.

pub mod demos;
pub mod report;
