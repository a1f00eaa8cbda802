//! Low-rank factors `A = U Vᵀ` and dense helpers.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::C64;

/// `dst (+)= alpha * a * b`, sequential.
pub(crate) fn gemm(dst: MatMut<'_, C64>, accum: Accum, a: MatRef<'_, C64>, b: MatRef<'_, C64>, alpha: C64) {
    if dst.nrows() == 0 || dst.ncols() == 0 {
        return;
    }
    if a.ncols() == 0 {
        if accum == Accum::Replace {
            let mut dst = dst;
            dst.fill(C64::new(0.0, 0.0));
        }
        return;
    }
    matmul(dst, accum, a, b, alpha, Par::Seq);
}

pub(crate) fn frob2(a: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s
}

/// Number of leading singular values to keep so that the discarded tail has
/// Frobenius norm at most `tol` times the total.
pub(crate) fn truncation_rank(s: &[f64], tol: f64) -> usize {
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return 0;
    }
    let bound = tol * tol * total;
    let mut tail = 0.0;
    let mut k = s.len();
    while k > 0 {
        let t = tail + s[k - 1] * s[k - 1];
        if t > bound {
            break;
        }
        tail = t;
        k -= 1;
    }
    k
}

#[derive(Clone, Debug)]
pub struct LowRank {
    pub u: Mat<C64>,
    pub v: Mat<C64>,
}

impl LowRank {
    pub fn zeros(m: usize, n: usize) -> Self {
        LowRank {
            u: Mat::zeros(m, 0),
            v: Mat::zeros(n, 0),
        }
    }

    pub fn new(u: Mat<C64>, v: Mat<C64>) -> Self {
        assert_eq!(u.ncols(), v.ncols());
        LowRank { u, v }
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn storage(&self) -> usize {
        self.rank() * (self.nrows() + self.ncols())
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut d = Mat::zeros(self.nrows(), self.ncols());
        gemm(
            d.as_mut(),
            Accum::Replace,
            self.u.as_ref(),
            self.v.transpose(),
            C64::new(1.0, 0.0),
        );
        d
    }

    /// Truncated SVD of a dense block.
    pub fn from_dense(a: MatRef<'_, C64>, tol: f64) -> Self {
        let (m, n) = (a.nrows(), a.ncols());
        if m == 0 || n == 0 || frob2(a) == 0.0 {
            return LowRank::zeros(m, n);
        }
        let svd = match a.thin_svd() {
            Ok(s) => s,
            Err(_) => return LowRank::new(a.to_owned(), Mat::identity(n, n)),
        };
        let s: Vec<f64> = (0..m.min(n)).map(|i| svd.S()[i].re).collect();
        let k = truncation_rank(&s, tol);
        let u = Mat::from_fn(m, k, |i, j| svd.U()[(i, j)] * s[j]);
        let v = Mat::from_fn(n, k, |i, j| svd.V()[(i, j)].conj());
        LowRank { u, v }
    }

    pub fn scale(&mut self, alpha: C64) {
        for j in 0..self.u.ncols() {
            for x in self.u.col_as_slice_mut(j) {
                *x *= alpha;
            }
        }
    }

    /// Appends the factors of `other` (same shape) without recompressing.
    pub fn append(&mut self, other: &LowRank) {
        assert_eq!(self.nrows(), other.nrows());
        assert_eq!(self.ncols(), other.ncols());
        let (r1, r2) = (self.rank(), other.rank());
        if r2 == 0 {
            return;
        }
        let cat = |a: &Mat<C64>, b: &Mat<C64>| {
            Mat::from_fn(
                a.nrows(),
                r1 + r2,
                |i, j| if j < r1 { a[(i, j)] } else { b[(i, j - r1)] },
            )
        };
        self.u = cat(&self.u, &other.u);
        self.v = cat(&self.v, &other.v);
    }

    /// QR of both factors followed by an SVD of the small core.
    pub fn recompress(&mut self, tol: f64) {
        let (m, n, r) = (self.nrows(), self.ncols(), self.rank());
        if r == 0 {
            return;
        }
        let qu = self.u.as_ref().qr();
        let qv = self.v.as_ref().qr();
        let ru = qu.thin_R();
        let rv = qv.thin_R();
        let mut core = Mat::zeros(ru.nrows(), rv.nrows());
        gemm(core.as_mut(), Accum::Replace, ru, rv.transpose(), C64::new(1.0, 0.0));
        if frob2(core.as_ref()) == 0.0 {
            *self = LowRank::zeros(m, n);
            return;
        }
        let Ok(svd) = core.as_ref().thin_svd() else {
            return;
        };
        let kmax = core.nrows().min(core.ncols());
        let s: Vec<f64> = (0..kmax).map(|i| svd.S()[i].re).collect();
        let k = truncation_rank(&s, tol);
        let x = Mat::from_fn(core.nrows(), k, |i, j| svd.U()[(i, j)] * s[j]);
        let y = Mat::from_fn(core.ncols(), k, |i, j| svd.V()[(i, j)].conj());
        let qum = qu.compute_thin_Q();
        let qvm = qv.compute_thin_Q();
        let mut u = Mat::zeros(m, k);
        let mut v = Mat::zeros(n, k);
        gemm(u.as_mut(), Accum::Replace, qum.as_ref(), x.as_ref(), C64::new(1.0, 0.0));
        gemm(v.as_mut(), Accum::Replace, qvm.as_ref(), y.as_ref(), C64::new(1.0, 0.0));
        self.u = u;
        self.v = v;
    }

    /// `y += alpha * U Vᵀ x`
    pub fn matvec_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        let r = self.rank();
        for k in 0..r {
            let vk = self.v.col_as_slice(k);
            let t: C64 = vk.iter().zip(x).map(|(a, b)| a * b).sum::<C64>() * alpha;
            if t == C64::new(0.0, 0.0) {
                continue;
            }
            for (yi, ui) in y.iter_mut().zip(self.u.col_as_slice(k)) {
                *yi += ui * t;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_mat(m: usize, n: usize, seed: u64) -> Mat<C64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Mat::from_fn(m, n, |_, _| C64::new(next(), next()))
    }

    fn diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
        let d = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)]);
        frob2(d.as_ref()).sqrt()
    }

    #[test]
    fn recompress_exact_rank() {
        let u = rand_mat(40, 3, 1);
        let v = rand_mat(30, 3, 2);
        let lr = LowRank::new(u, v);
        let full = lr.to_dense();
        let mut doubled = lr.clone();
        doubled.append(&lr);
        assert_eq!(doubled.rank(), 6);
        doubled.recompress(1e-10);
        assert_eq!(doubled.rank(), 3);
        let mut twice = full.clone();
        for j in 0..30 {
            for i in 0..40 {
                twice[(i, j)] *= 2.0;
            }
        }
        assert!(diff(doubled.to_dense().as_ref(), twice.as_ref()) < 1e-10 * frob2(twice.as_ref()).sqrt());
    }

    #[test]
    fn from_dense_truncates() {
        let lr = LowRank::new(rand_mat(20, 2, 5), rand_mat(25, 2, 6));
        let d = lr.to_dense();
        let c = LowRank::from_dense(d.as_ref(), 1e-12);
        assert_eq!(c.rank(), 2);
        assert!(diff(c.to_dense().as_ref(), d.as_ref()) < 1e-11 * frob2(d.as_ref()).sqrt());
        let z = LowRank::from_dense(Mat::<C64>::zeros(4, 5).as_ref(), 1e-3);
        assert_eq!(z.rank(), 0);
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(truncation_rank(&[1.0, 1e-3, 1e-6], 1e-2), 1);
        assert_eq!(truncation_rank(&[1.0, 1e-3, 1e-6], 1e-4), 2);
        assert_eq!(truncation_rank(&[0.0, 0.0], 1e-4), 0);
    }

    #[test]
    fn matvec_matches_dense() {
        let lr = LowRank::new(rand_mat(7, 2, 9), rand_mat(5, 2, 10));
        let d = lr.to_dense();
        let x: Vec<C64> = (0..5).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut y = vec![C64::new(0.0, 0.0); 7];
        lr.matvec_add(C64::new(2.0, 0.0), &x, &mut y);
        for i in 0..7 {
            let e: C64 = (0..5).map(|j| d[(i, j)] * x[j]).sum::<C64>() * 2.0;
            assert!((e - y[i]).norm() < 1e-12);
        }
    }
}
