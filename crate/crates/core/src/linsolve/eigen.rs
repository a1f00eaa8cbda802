//! Smallest eigenpairs of `K v = λ M v` by shift-invert Lanczos.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{invalid, Error, Result};
use crate::sparse::SparseMatrix;

/// Required relative residual `‖K v − λ M v‖ / ‖K v‖`.
pub const EIGEN_RESIDUAL: f64 = 1e-8;

fn to_faer(a: &SparseMatrix<f64>) -> Result<SparseColMat<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = a
        .triplets()
        .into_iter()
        .map(|(i, j, v)| Triplet::new(i, j, v))
        .collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &trip).map_err(|e| Error::Factorization(format!("{e:?}")))
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct SparseCholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl SparseCholesky {
    pub fn new(a: &SparseMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return invalid("Cholesky needs a square matrix");
        }
        let llt = to_faer(a)?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("sparse Cholesky: {e:?}")))?;
        Ok(SparseCholesky { llt, n: a.nrows() })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues in ascending order with `M`-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// The `n_eig` smallest eigenpairs of `K v = λ M v` for symmetric positive
/// definite `K` and `M`.
///
/// Block Lanczos on `K⁻¹ M` in the `M` inner product with full
/// reorthogonalization and Rayleigh-Ritz extraction; the block size covers
/// repeated eigenvalues. `K` is factored once by sparse Cholesky.
pub fn eig_smallest_generalized(k: &SparseMatrix<f64>, m: &SparseMatrix<f64>, n_eig: usize) -> Result<EigenPairs> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return invalid("K and M must be square with equal sizes");
    }
    if n_eig == 0 || n_eig > n {
        return invalid(format!("cannot compute {n_eig} eigenpairs of a problem of size {n}"));
    }
    let chol = SparseCholesky::new(k)?;
    let p = n_eig.clamp(3, 10).min(n);
    let mut seed = 0x9e37_79b9_7f4a_7c15u64;
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        })
        .collect();
    // basis Q, M Q and K⁻¹ M Q
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut mq: Vec<Vec<f64>> = Vec::new();
    let mut w: Vec<Vec<f64>> = Vec::new();
    loop {
        let before = q.len();
        for mut v in block.drain(..) {
            let n0 = {
                let mv = m.matvec(&v);
                dot(&v, &mv).max(0.0).sqrt()
            };
            if !(n0 > 0.0) {
                continue;
            }
            for _ in 0..2 {
                for (qi, mqi) in q.iter().zip(&mq) {
                    let c = dot(mqi, &v);
                    v.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
                }
            }
            let mv = m.matvec(&v);
            let nv = dot(&v, &mv).max(0.0).sqrt();
            if !(nv > 1e-10 * n0) {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let mv: Vec<f64> = mv.into_iter().map(|x| x / nv).collect();
            let kv = chol.solve(&mv);
            if kv.iter().any(|x| !x.is_finite()) {
                return Err(Error::Factorization("non-finite solve with K".into()));
            }
            q.push(v);
            mq.push(mv);
            w.push(kv);
        }
        let j = q.len();
        let grew = j > before;
        if j >= n_eig && (j >= (n_eig + p).min(n) || !grew) {
            let t = Mat::from_fn(j, j, |r, c| 0.5 * (dot(&mq[r], &w[c]) + dot(&mq[c], &w[r])));
            let evd = t
                .as_ref()
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Factorization(format!("projected eigensolver: {e:?}")))?;
            let s = evd.S();
            let u = evd.U();
            let mut values = Vec::with_capacity(n_eig);
            let mut vectors = Vec::with_capacity(n_eig);
            let mut residuals = Vec::with_capacity(n_eig);
            let mut ok = true;
            // largest θ of K⁻¹M are the smallest λ
            for r in 0..n_eig {
                let idx = j - 1 - r;
                let theta = s[idx];
                if !(theta > 0.0) {
                    return Err(Error::Factorization("K is not positive definite".into()));
                }
                let lam = 1.0 / theta;
                let mut x = vec![0.0; n];
                for (c, qc) in q.iter().enumerate() {
                    let y = u[(c, idx)];
                    x.iter_mut().zip(qc).for_each(|(xi, qi)| *xi += y * qi);
                }
                let mx = m.matvec(&x);
                let xn = dot(&x, &mx).sqrt();
                x.iter_mut().for_each(|xi| *xi /= xn);
                let kx = k.matvec(&x);
                let mx = m.matvec(&x);
                let res = kx
                    .iter()
                    .zip(&mx)
                    .map(|(a, b)| (a - lam * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    / dot(&kx, &kx).sqrt();
                ok &= res <= EIGEN_RESIDUAL;
                values.push(lam);
                vectors.push(x);
                residuals.push(res);
            }
            if ok {
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residuals,
                });
            }
            if !grew || j == n {
                return Err(Error::Factorization(format!(
                    "eigenpairs did not converge (worst residual {:e})",
                    residuals.iter().cloned().fold(0.0, f64::max)
                )));
            }
        }
        if !grew {
            return Err(Error::Factorization("Krylov space exhausted".into()));
        }
        block = w[before..].to_vec();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pencil() {
        let id = SparseMatrix::<f64>::identity(6);
        let e = eig_smallest_generalized(&id, &id, 3).unwrap();
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_pencil() {
        let k = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let id = SparseMatrix::<f64>::identity(3);
        let e = eig_smallest_generalized(&k, &id, 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 2.0).abs() < 1e-12);
        assert!(eig_smallest_generalized(&k, &id, 4).is_err());
    }

    #[test]
    fn laplacian_1d() {
        let n = 400;
        let h = 1.0 / (n + 1) as f64;
        let mut kt = Vec::new();
        let mut mt = Vec::new();
        for i in 0..n {
            kt.push((i, i, 2.0 / h));
            mt.push((i, i, 4.0 * h / 6.0));
            if i + 1 < n {
                kt.push((i, i + 1, -1.0 / h));
                kt.push((i + 1, i, -1.0 / h));
                mt.push((i, i + 1, h / 6.0));
                mt.push((i + 1, i, h / 6.0));
            }
        }
        let k = SparseMatrix::from_triplets(n, n, &kt).unwrap();
        let m = SparseMatrix::from_triplets(n, n, &mt).unwrap();
        let e = eig_smallest_generalized(&k, &m, 5).unwrap();
        for (i, v) in e.values.iter().enumerate() {
            let exact = ((i + 1) as f64 * std::f64::consts::PI).powi(2);
            assert!((v - exact).abs() < 1e-3 * exact);
            assert!(e.residuals[i] <= EIGEN_RESIDUAL);
        }
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for a in 0..5 {
            let ma = m.matvec(&e.vectors[a]);
            for b in 0..5 {
                let d = dot(&e.vectors[b], &ma);
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        let not_spd = SparseMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(eig_smallest_generalized(&not_spd, &SparseMatrix::identity(2), 1).is_err());
    }
}
