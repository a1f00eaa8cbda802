//! Finite element forms `Σ_c B_cᵀ W C_c` and load vectors.

use crate::error::{invalid, Result};
use crate::fem::{EvalMatrix, FemSpace};
use crate::geometry::Point3;
use crate::quadrature::Domain;
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

fn checked_pair(dom: &Domain, test: &FemSpace, trial: &FemSpace) -> Result<(EvalMatrix, EvalMatrix)> {
    let b = test.eval_matrix(dom)?;
    let c = trial.eval_matrix(dom)?;
    if b.ncomps() != c.ncomps() {
        return invalid(format!(
            "test operator has {} components but trial operator has {}",
            b.ncomps(),
            c.ncomps()
        ));
    }
    Ok((b, c))
}

fn weighted_sum(b: &EvalMatrix, w: &[f64], c: &EvalMatrix) -> Result<SparseMatrix<f64>> {
    let mut acc: Option<SparseMatrix<f64>> = None;
    for (bc, cc) in b.comps.iter().zip(&c.comps) {
        let term = bc.transpose().weighted_matmul(Some(w), cc)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.expect("at least one component"))
}

/// `A_ij = ∫ op(φ_i) · op(ψ_j)` over the free dofs of both spaces, rows for `test`.
pub fn bilinear(dom: &Domain, test: &FemSpace, trial: &FemSpace) -> Result<SparseMatrix<f64>> {
    let (b, c) = checked_pair(dom, test, trial)?;
    weighted_sum(&b, &dom.quadrature().weights, &c)
}

/// `A_ij = ∫ f op(φ_i) · op(ψ_j)`.
pub fn bilinear_weighted<F>(dom: &Domain, test: &FemSpace, f: F, trial: &FemSpace) -> Result<SparseMatrix<f64>>
where
    F: Fn(&[Point3]) -> Vec<f64>,
{
    let (b, c) = checked_pair(dom, test, trial)?;
    let q = dom.quadrature();
    let fv = f(&q.points);
    if fv.len() != q.len() {
        return invalid(format!(
            "coefficient returned {} values for {} points",
            fv.len(),
            q.len()
        ));
    }
    let w: Vec<f64> = q.weights.iter().zip(&fv).map(|(w, f)| w * f).collect();
    weighted_sum(&b, &w, &c)
}

/// A vectorized function of the quadrature points.
pub type PointFn<'a, T> = &'a dyn Fn(&[Point3]) -> Vec<T>;

/// `I_i = ∫ f · op(φ_i)`; one function per operator component.
pub fn linear<T: Scalar>(dom: &Domain, space: &FemSpace, f: &[PointFn<'_, T>]) -> Result<Vec<T>> {
    let b = space.eval_matrix(dom)?;
    if f.len() != b.ncomps() {
        return invalid(format!(
            "{} functions given for an operator with {} components",
            f.len(),
            b.ncomps()
        ));
    }
    let q = dom.quadrature();
    let mut out = vec![T::zero(); space.n_dofs()];
    for (fc, bc) in f.iter().zip(&b.comps) {
        let vals = fc(&q.points);
        if vals.len() != q.len() {
            return invalid(format!(
                "function returned {} values for {} points",
                vals.len(),
                q.len()
            ));
        }
        let wf: Vec<T> = vals.iter().zip(&q.weights).map(|(&v, &w)| v * w).collect();
        bc.transpose().matvec_add(T::one(), &wf, &mut out);
    }
    Ok(out)
}
