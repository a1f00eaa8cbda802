//! Formatted addition, multiplication and LU factorization.

use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_unit_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::{Accum, Mat, MatMut, MatRef, Par};

use super::lowrank::{gemm, LowRank};
use super::{empty_block, Block, HBlock, HMatrix};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;
use crate::C64;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const MINUS_ONE: C64 = C64 { re: -1.0, im: 0.0 };

/// An update covering global rows `r0..r0+m` and columns `c0..c0+n`.
#[derive(Clone, Copy)]
enum Upd<'a> {
    Dense(MatRef<'a, C64>),
    LowRank(MatRef<'a, C64>, MatRef<'a, C64>),
}

impl<'a> Upd<'a> {
    fn shape(&self) -> (usize, usize) {
        match self {
            Upd::Dense(d) => (d.nrows(), d.ncols()),
            Upd::LowRank(u, v) => (u.nrows(), v.nrows()),
        }
    }

    fn sub(&self, i: usize, j: usize, m: usize, n: usize) -> Upd<'a> {
        match *self {
            Upd::Dense(d) => Upd::Dense(d.submatrix(i, j, m, n)),
            Upd::LowRank(u, v) => Upd::LowRank(u.subrows(i, m), v.subrows(j, n)),
        }
    }
}

fn add_update(t: &mut HBlock, upd: Upd<'_>, r0: usize, c0: usize, tol: f64) {
    let (m, n) = upd.shape();
    let ir = [t.r[0].max(r0), t.r[1].min(r0 + m)];
    let ic = [t.c[0].max(c0), t.c[1].min(c0 + n)];
    if ir[0] >= ir[1] || ic[0] >= ic[1] {
        return;
    }
    let (nr, nc) = (ir[1] - ir[0], ic[1] - ic[0]);
    let upd = upd.sub(ir[0] - r0, ic[0] - c0, nr, nc);
    let (oi, oj) = (ir[0] - t.r[0], ic[0] - t.c[0]);
    let (tm, tn) = (t.nrows(), t.ncols());
    match &mut t.block {
        Block::Dense(d) => {
            let mut dst = d.as_mut().submatrix_mut(oi, oj, nr, nc);
            match upd {
                Upd::Dense(s) => {
                    for j in 0..nc {
                        for i in 0..nr {
                            dst[(i, j)] += s[(i, j)];
                        }
                    }
                }
                Upd::LowRank(u, v) => gemm(dst, Accum::Add, u, v.transpose(), ONE),
            }
        }
        Block::LowRank(lr) => {
            let piece = match upd {
                Upd::Dense(s) => LowRank::from_dense(s, tol),
                Upd::LowRank(u, v) => LowRank::new(u.to_owned(), v.to_owned()),
            };
            let k = piece.rank();
            if k == 0 {
                return;
            }
            let mut pu = Mat::zeros(tm, k);
            let mut pv = Mat::zeros(tn, k);
            pu.as_mut().submatrix_mut(oi, 0, nr, k).copy_from(piece.u.as_ref());
            pv.as_mut().submatrix_mut(oj, 0, nc, k).copy_from(piece.v.as_ref());
            lr.append(&LowRank::new(pu, pv));
            lr.recompress(tol);
        }
        Block::Hier(ch) => {
            for c in ch.iter_mut() {
                add_update(c, upd, ir[0], ic[0], tol);
            }
        }
    }
}

fn add_block(t: &mut HBlock, src: &HBlock, tol: f64) {
    match &src.block {
        Block::Dense(d) => add_update(t, Upd::Dense(d.as_ref()), src.r[0], src.c[0], tol),
        Block::LowRank(lr) => {
            if lr.rank() > 0 {
                add_update(t, Upd::LowRank(lr.u.as_ref(), lr.v.as_ref()), src.r[0], src.c[0], tol)
            }
        }
        Block::Hier(ch) => ch.iter().for_each(|c| add_block(t, c, tol)),
    }
}

fn scaled(a: MatRef<'_, C64>, alpha: C64) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * alpha)
}

/// Agglomerates a block into a single recompressed low-rank factor.
fn to_lowrank(b: &HBlock, tol: f64) -> LowRank {
    match &b.block {
        Block::Dense(d) => LowRank::from_dense(d.as_ref(), tol),
        Block::LowRank(lr) => lr.clone(),
        Block::Hier(ch) => {
            let mut acc = LowRank::zeros(b.nrows(), b.ncols());
            for c in ch.iter() {
                let p = to_lowrank(c, tol);
                let k = p.rank();
                if k == 0 {
                    continue;
                }
                let mut pu = Mat::zeros(b.nrows(), k);
                let mut pv = Mat::zeros(b.ncols(), k);
                pu.as_mut()
                    .submatrix_mut(c.r[0] - b.r[0], 0, c.nrows(), k)
                    .copy_from(p.u.as_ref());
                pv.as_mut()
                    .submatrix_mut(c.c[0] - b.c[0], 0, c.ncols(), k)
                    .copy_from(p.v.as_ref());
                acc.append(&LowRank::new(pu, pv));
            }
            acc.recompress(tol);
            acc
        }
    }
}

/// A zero block of shape `m × n` with the storage kind of `b`.
fn zero_like(b: &HBlock, m: usize, n: usize) -> Block {
    match &b.block {
        Block::Dense(_) => Block::Dense(Mat::zeros(m, n)),
        _ => Block::LowRank(LowRank::zeros(m, n)),
    }
}

/// `c += alpha * a * b`.
fn mul_add(c: &mut HBlock, alpha: C64, a: &HBlock, b: &HBlock, tol: f64) {
    let (m, n) = (a.nrows(), b.ncols());
    match (&a.block, &b.block) {
        (Block::LowRank(la), _) => {
            if la.rank() == 0 {
                return;
            }
            let mut w = Mat::zeros(n, la.rank());
            b.apply_t(ONE, la.v.as_ref(), w.as_mut());
            let u = scaled(la.u.as_ref(), alpha);
            add_update(c, Upd::LowRank(u.as_ref(), w.as_ref()), a.r[0], b.c[0], tol);
        }
        (_, Block::LowRank(lb)) => {
            if lb.rank() == 0 {
                return;
            }
            let mut z = Mat::zeros(m, lb.rank());
            a.apply(alpha, lb.u.as_ref(), z.as_mut());
            add_update(c, Upd::LowRank(z.as_ref(), lb.v.as_ref()), a.r[0], b.c[0], tol);
        }
        (Block::Dense(da), _) => {
            let k = da.ncols();
            if k <= m {
                let bd = b.to_dense();
                let u = scaled(da.as_ref(), alpha);
                add_update(c, Upd::LowRank(u.as_ref(), bd.transpose()), a.r[0], b.c[0], tol);
            } else {
                let mut z = Mat::zeros(n, m);
                b.apply_t(alpha, da.transpose(), z.as_mut());
                let id = Mat::<C64>::identity(m, m);
                add_update(c, Upd::LowRank(id.as_ref(), z.as_ref()), a.r[0], b.c[0], tol);
            }
        }
        (_, Block::Dense(db)) => {
            let k = db.nrows();
            if k <= n {
                let ad = a.to_dense();
                let u = scaled(ad.as_ref(), alpha);
                add_update(c, Upd::LowRank(u.as_ref(), db.transpose()), a.r[0], b.c[0], tol);
            } else {
                let mut z = Mat::zeros(m, n);
                a.apply(alpha, db.as_ref(), z.as_mut());
                add_update(c, Upd::Dense(z.as_ref()), a.r[0], b.c[0], tol);
            }
        }
        (Block::Hier(ach), Block::Hier(bch)) => {
            if let Block::Hier(cch) = &mut c.block {
                for i in 0..2 {
                    for j in 0..2 {
                        for l in 0..2 {
                            mul_add(&mut cch[2 * i + j], alpha, &ach[2 * i + l], &bch[2 * l + j], tol);
                        }
                    }
                }
                return;
            }
            let kid = |x: &HBlock, y: &HBlock| HBlock {
                row: x.row,
                col: y.col,
                r: x.r,
                c: y.c,
                block: zero_like(c, x.nrows(), y.ncols()),
            };
            let mut tmp = HBlock {
                row: c.row,
                col: c.col,
                r: c.r,
                c: c.c,
                block: Block::Hier(Box::new([
                    kid(&ach[0], &bch[0]),
                    kid(&ach[0], &bch[1]),
                    kid(&ach[2], &bch[0]),
                    kid(&ach[2], &bch[1]),
                ])),
            };
            mul_add(&mut tmp, alpha, a, b, tol);
            match &mut c.block {
                Block::Dense(_) => add_block(c, &tmp, tol),
                _ => {
                    let lr = to_lowrank(&tmp, tol);
                    if lr.rank() > 0 {
                        add_update(c, Upd::LowRank(lr.u.as_ref(), lr.v.as_ref()), tmp.r[0], tmp.c[0], tol);
                    }
                }
            }
        }
    }
}

fn dense_lu(d: &mut Mat<C64>, offset: usize) -> Result<()> {
    let n = d.nrows();
    let scale = (0..n).map(|i| d[(i, i)].norm()).fold(0.0, f64::max).max(1e-300);
    for k in 0..n {
        let p = d[(k, k)];
        if !(p.norm() > 1e-14 * scale) {
            return Err(Error::Factorization(format!("zero pivot at row {}", offset + k)));
        }
        let inv = ONE / p;
        for i in k + 1..n {
            d[(i, k)] *= inv;
        }
        for j in k + 1..n {
            let akj = d[(k, j)];
            if akj == C64::new(0.0, 0.0) {
                continue;
            }
            for i in k + 1..n {
                let lik = d[(i, k)];
                d[(i, j)] -= lik * akj;
            }
        }
    }
    Ok(())
}

fn structure_err<T>() -> Result<T> {
    Err(Error::Structure("low-rank block on the diagonal".into()))
}

/// Solves `L X = B` in place with the unit lower factor stored in `l`.
fn trsm_lower(l: &HBlock, x: MatMut<'_, C64>) -> Result<()> {
    match &l.block {
        Block::Dense(d) => {
            solve_unit_lower_triangular_in_place(d.as_ref(), x, Par::Seq);
            Ok(())
        }
        Block::Hier(ch) => {
            let (mut x0, mut x1) = x.split_at_row_mut(ch[0].nrows());
            trsm_lower(&ch[0], x0.as_mut())?;
            ch[2].apply(MINUS_ONE, x0.as_ref(), x1.as_mut());
            trsm_lower(&ch[3], x1)
        }
        Block::LowRank(_) => structure_err(),
    }
}

/// Solves `U X = B` in place.
fn trsm_upper(u: &HBlock, x: MatMut<'_, C64>) -> Result<()> {
    match &u.block {
        Block::Dense(d) => {
            solve_upper_triangular_in_place(d.as_ref(), x, Par::Seq);
            Ok(())
        }
        Block::Hier(ch) => {
            let (mut x0, mut x1) = x.split_at_row_mut(ch[0].nrows());
            trsm_upper(&ch[3], x1.as_mut())?;
            ch[1].apply(MINUS_ONE, x1.as_ref(), x0.as_mut());
            trsm_upper(&ch[0], x0)
        }
        Block::LowRank(_) => structure_err(),
    }
}

/// Solves `Uᵀ X = B` in place.
fn trsm_upper_t(u: &HBlock, x: MatMut<'_, C64>) -> Result<()> {
    match &u.block {
        Block::Dense(d) => {
            solve_lower_triangular_in_place(d.transpose(), x, Par::Seq);
            Ok(())
        }
        Block::Hier(ch) => {
            let (mut x0, mut x1) = x.split_at_row_mut(ch[0].ncols());
            trsm_upper_t(&ch[0], x0.as_mut())?;
            ch[1].apply_t(MINUS_ONE, x0.as_ref(), x1.as_mut());
            trsm_upper_t(&ch[3], x1)
        }
        Block::LowRank(_) => structure_err(),
    }
}

/// `B ← L⁻¹ B`.
fn solve_lower_left(l: &HBlock, b: &mut HBlock, tol: f64) -> Result<()> {
    match &mut b.block {
        Block::Dense(d) => trsm_lower(l, d.as_mut()),
        Block::LowRank(lr) => trsm_lower(l, lr.u.as_mut()),
        Block::Hier(bch) => {
            let Block::Hier(lch) = &l.block else {
                return structure_err();
            };
            let [b00, b01, b10, b11] = &mut **bch;
            solve_lower_left(&lch[0], b00, tol)?;
            solve_lower_left(&lch[0], b01, tol)?;
            mul_add(b10, MINUS_ONE, &lch[2], b00, tol);
            mul_add(b11, MINUS_ONE, &lch[2], b01, tol);
            solve_lower_left(&lch[3], b10, tol)?;
            solve_lower_left(&lch[3], b11, tol)
        }
    }
}

/// `B ← B U⁻¹`.
fn solve_upper_right(u: &HBlock, b: &mut HBlock, tol: f64) -> Result<()> {
    match &mut b.block {
        Block::Dense(d) => {
            let mut dt = d.transpose().to_owned();
            trsm_upper_t(u, dt.as_mut())?;
            *d = dt.transpose().to_owned();
            Ok(())
        }
        Block::LowRank(lr) => trsm_upper_t(u, lr.v.as_mut()),
        Block::Hier(bch) => {
            let Block::Hier(uch) = &u.block else {
                return structure_err();
            };
            let [b00, b01, b10, b11] = &mut **bch;
            solve_upper_right(&uch[0], b00, tol)?;
            solve_upper_right(&uch[0], b10, tol)?;
            mul_add(b01, MINUS_ONE, b00, &uch[1], tol);
            mul_add(b11, MINUS_ONE, b10, &uch[1], tol);
            solve_upper_right(&uch[3], b01, tol)?;
            solve_upper_right(&uch[3], b11, tol)
        }
    }
}

fn lu_in_place(a: &mut HBlock, tol: f64) -> Result<()> {
    let off = a.r[0];
    match &mut a.block {
        Block::Dense(d) => dense_lu(d, off),
        Block::LowRank(_) => structure_err(),
        Block::Hier(ch) => {
            let [a00, a01, a10, a11] = &mut **ch;
            lu_in_place(a00, tol)?;
            solve_lower_left(a00, a01, tol)?;
            solve_upper_right(a00, a10, tol)?;
            mul_add(a11, MINUS_ONE, a10, a01, tol);
            lu_in_place(a11, tol)
        }
    }
}

fn split_block(b: &HBlock, lower: bool) -> HBlock {
    let block = if b.r == b.c {
        match &b.block {
            Block::Dense(d) => {
                let n = d.nrows();
                Block::Dense(Mat::from_fn(n, n, |i, j| {
                    if lower {
                        if i == j {
                            ONE
                        } else if i > j {
                            d[(i, j)]
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    } else if i <= j {
                        d[(i, j)]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }))
            }
            Block::Hier(ch) => Block::Hier(Box::new([
                split_block(&ch[0], lower),
                split_block(&ch[1], lower),
                split_block(&ch[2], lower),
                split_block(&ch[3], lower),
            ])),
            Block::LowRank(lr) => Block::LowRank(lr.clone()),
        }
    } else {
        let below = b.r[0] >= b.c[1];
        if below == lower {
            b.block.clone()
        } else {
            zero_tree(b)
        }
    };
    HBlock {
        row: b.row,
        col: b.col,
        r: b.r,
        c: b.c,
        block,
    }
}

fn zero_tree(b: &HBlock) -> Block {
    match &b.block {
        Block::Hier(ch) => Block::Hier(Box::new(std::array::from_fn(|i| HBlock {
            row: ch[i].row,
            col: ch[i].col,
            r: ch[i].r,
            c: ch[i].c,
            block: zero_tree(&ch[i]),
        }))),
        _ => zero_like(b, b.nrows(), b.ncols()),
    }
}

fn add_entries(b: &mut HBlock, entries: &[(usize, usize, C64)], tol: f64) {
    if entries.is_empty() {
        return;
    }
    let (r0, c0) = (b.r[0], b.c[0]);
    let (m, n) = (b.nrows(), b.ncols());
    match &mut b.block {
        Block::Dense(d) => {
            for &(i, j, v) in entries {
                d[(i - r0, j - c0)] += v;
            }
        }
        Block::LowRank(lr) => {
            let mut rows: Vec<usize> = entries.iter().map(|e| e.0).collect();
            rows.sort_unstable();
            rows.dedup();
            let q = rows.len();
            let mut u = Mat::zeros(m, q);
            let mut v = Mat::zeros(n, q);
            for (t, &r) in rows.iter().enumerate() {
                u[(r - r0, t)] = ONE;
            }
            for &(i, j, val) in entries {
                let t = rows.binary_search(&i).unwrap();
                v[(j - c0, t)] += val;
            }
            lr.append(&LowRank::new(u, v));
            lr.recompress(tol);
        }
        Block::Hier(ch) => {
            for c in ch.iter_mut() {
                let sub: Vec<_> = entries
                    .iter()
                    .copied()
                    .filter(|&(i, j, _)| i >= c.r[0] && i < c.r[1] && j >= c.c[0] && j < c.c[1])
                    .collect();
                add_entries(c, &sub, tol);
            }
        }
    }
}

/// H-LU factors stored in one block structure: unit lower `L` strictly below
/// the diagonal, `U` on and above it.
#[derive(Clone, Debug)]
pub struct HLu {
    lu: HMatrix,
}

impl HLu {
    pub fn lower(&self) -> HMatrix {
        let h = &self.lu;
        HMatrix::from_parts(h.rows.clone(), h.cols.clone(), split_block(&h.root, true), h.tol, h.eta)
    }

    pub fn upper(&self) -> HMatrix {
        let h = &self.lu;
        HMatrix::from_parts(
            h.rows.clone(),
            h.cols.clone(),
            split_block(&h.root, false),
            h.tol,
            h.eta,
        )
    }

    pub fn factors(&self) -> (HMatrix, HMatrix) {
        (self.lower(), self.upper())
    }

    /// Solves `A x = b` in the original ordering.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let h = &self.lu;
        if b.len() != h.nrows() {
            return invalid(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                h.nrows()
            ));
        }
        let mut x = Mat::from_fn(h.nrows(), 1, |k, _| b[h.rows.perm[k]]);
        trsm_lower(&h.root, x.as_mut())?;
        trsm_upper(&h.root, x.as_mut())?;
        let mut out = vec![C64::new(0.0, 0.0); h.ncols()];
        for (k, &i) in h.cols.perm.iter().enumerate() {
            out[i] = x[(k, 0)];
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("non-finite solution".into()));
        }
        Ok(out)
    }
}

impl HMatrix {
    /// Formatted sum `self + other` on the partition of `self`.
    pub fn add(&self, other: &HMatrix, tol: f64) -> Result<HMatrix> {
        if !self.rows.same_as(&other.rows) || !self.cols.same_as(&other.cols) {
            return invalid("H-matrix sum requires identical cluster trees");
        }
        let mut out = self.clone();
        add_block(out.root_mut(), &other.root, tol);
        Ok(out)
    }

    /// Formatted product on the partition induced by the outer trees.
    pub fn mul(&self, other: &HMatrix, tol: f64) -> Result<HMatrix> {
        if !self.cols.same_as(&other.rows) {
            return invalid("H-matrix product requires matching inner cluster trees");
        }
        let mut root = empty_block(&self.rows, &other.cols, 0, 0, self.eta);
        mul_add(&mut root, ONE, &self.root, &other.root, tol);
        Ok(HMatrix::from_parts(
            self.rows.clone(),
            other.cols.clone(),
            root,
            tol,
            self.eta,
        ))
    }

    /// Adds a sparse matrix given in the original ordering. Low-rank leaves
    /// that receive entries are recompressed.
    pub fn add_sparse<T: Scalar>(&mut self, s: &SparseMatrix<T>) -> Result<()> {
        if s.nrows() != self.nrows() || s.ncols() != self.ncols() {
            return invalid(format!(
                "sparse matrix is {}x{}, expected {}x{}",
                s.nrows(),
                s.ncols(),
                self.nrows(),
                self.ncols()
            ));
        }
        let rows = self.rows.clone();
        let cols = self.cols.clone();
        let entries: Vec<(usize, usize, C64)> = s
            .triplets()
            .into_iter()
            .map(|(i, j, v)| (rows.iperm[i], cols.iperm[j], v.to_c64()))
            .collect();
        let tol = self.tol;
        add_entries(self.root_mut(), &entries, tol);
        Ok(())
    }

    pub fn lu(&self) -> Result<HLu> {
        if !self.rows.same_as(&self.cols) {
            return invalid("H-LU requires a square matrix with one cluster tree");
        }
        let mut lu = self.clone();
        let tol = lu.tol;
        lu_in_place(lu.root_mut(), tol)?;
        Ok(HLu { lu })
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.lu()?.solve(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmatrix::lowrank::frob2;
    use crate::hmatrix::tests::{helmholtz, sphere_points};

    fn rel(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
        let d = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)]);
        (frob2(d.as_ref()) / frob2(b.as_ref())).sqrt()
    }

    fn dense_mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
        let mut c = Mat::zeros(a.nrows(), b.ncols());
        gemm(c.as_mut(), Accum::Replace, a, b, ONE);
        c
    }

    fn test_matrix(n: usize, tol: f64) -> (HMatrix, Mat<C64>) {
        let p = sphere_points(n);
        let f = helmholtz(&p, 1.5);
        let h = HMatrix::from_fn(&p, &p, &f, tol, 1.0, 24).unwrap();
        let d = Mat::from_fn(n, n, |i, j| f(i, j));
        (h, d)
    }

    #[test]
    fn sum_and_product() {
        let (h, d) = test_matrix(400, 1e-8);
        let s = h.add(&h, 1e-8).unwrap();
        let d2 = Mat::from_fn(400, 400, |i, j| d[(i, j)] * 2.0);
        assert!(rel(s.to_dense().as_ref(), d2.as_ref()) < 1e-7);
        let p = h.mul(&h, 1e-8).unwrap();
        let dp = dense_mul(d.as_ref(), d.as_ref());
        let e = rel(p.to_dense().as_ref(), dp.as_ref());
        assert!(e < 1e-6, "product error {e}");
    }

    #[test]
    fn lu_reproduces_matrix() {
        let tol = 1e-6;
        let (h, d) = test_matrix(500, tol);
        let lu = h.lu().unwrap();
        let (l, u) = lu.factors();
        let prod = dense_mul(l.to_dense().as_ref(), u.to_dense().as_ref());
        let e = rel(prod.as_ref(), d.as_ref());
        assert!(e < 10.0 * tol, "lu error {e}");
        let x: Vec<C64> = (0..500).map(|i| C64::new(1.0, (i as f64 * 0.1).sin())).collect();
        let b: Vec<C64> = (0..500).map(|i| (0..500).map(|j| d[(i, j)] * x[j]).sum()).collect();
        let y = lu.solve(&b).unwrap();
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let nx: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / nx < 1e-4, "solve error {}", err / nx);
    }

    #[test]
    fn deep_trees_mix_storage_kinds() {
        // small leaves give admissible targets of products of subdivided blocks
        let tol = 1e-6;
        let n = 700;
        let p = sphere_points(n);
        let f = helmholtz(&p, 1.5);
        let h = HMatrix::from_fn(&p, &p, &f, tol, 1.0, 6).unwrap();
        let d = Mat::from_fn(n, n, |i, j| f(i, j));
        let prod = h.mul(&h, tol).unwrap();
        let e = rel(prod.to_dense().as_ref(), dense_mul(d.as_ref(), d.as_ref()).as_ref());
        assert!(e < 10.0 * tol, "product error {e}");
        let (l, u) = h.lu().unwrap().factors();
        let e = rel(
            dense_mul(l.to_dense().as_ref(), u.to_dense().as_ref()).as_ref(),
            d.as_ref(),
        );
        assert!(e < 10.0 * tol, "lu error {e}");
    }

    #[test]
    fn sparse_addition() {
        let (mut h, mut d) = test_matrix(200, 1e-10);
        let trip = vec![(0, 0, 2.0), (5, 150, -1.0), (199, 3, 0.5), (5, 150, 1.5)];
        let s = SparseMatrix::from_triplets(200, 200, &trip).unwrap();
        h.add_sparse(&s).unwrap();
        d[(0, 0)] += 2.0;
        d[(5, 150)] += 0.5;
        d[(199, 3)] += 0.5;
        assert!(rel(h.to_dense().as_ref(), d.as_ref()) < 1e-9);
        let bad = SparseMatrix::<f64>::zeros(3, 3);
        assert!(h.add_sparse(&bad).is_err());
    }

    #[test]
    fn singular_leaf_reports_error() {
        let p = sphere_points(10);
        let h = HMatrix::from_fn(&p, &p, |_, _| C64::new(0.0, 0.0), 1e-6, 1.0, 16).unwrap();
        assert!(matches!(h.lu(), Err(Error::Factorization(_))));
    }
}
