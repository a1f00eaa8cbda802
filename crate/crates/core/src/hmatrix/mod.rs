//! Hierarchical matrices: cluster trees, adaptive cross approximation,
//! recompression, formatted arithmetic and H-LU.

mod aca;
mod algebra;
mod cluster;
mod lowrank;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use faer::{Accum, Mat, MatMut, MatRef};

pub use aca::aca;
pub use algebra::HLu;
pub use cluster::{admissible, build_cluster_tree, build_cluster_tree_with_boxes, ClusterNode, ClusterTree};
pub use lowrank::LowRank;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point3;
use crate::C64;
use lowrank::gemm;

pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_LEAF_SIZE: usize = 64;

/// Entry access for a matrix that is approximated block by block.
pub trait BlockSource: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// Evaluator for the sub-block with the given original row/column indices.
    fn block<'a>(&'a self, rows: &'a [usize], cols: &'a [usize]) -> Box<dyn BlockEval + 'a>;
}

pub trait BlockEval {
    /// Row `i` of the sub-block (length = number of columns).
    fn row(&self, i: usize, out: &mut [C64]);
    fn col(&self, j: usize, out: &mut [C64]);
    fn dense(&self) -> Mat<C64>;
    /// A compressed form of an admissible block when the source has a cheaper
    /// route than cross approximation on its entries.
    fn low_rank(&self, _tol: f64) -> Option<LowRank> {
        None
    }
}

/// Block source backed by an entry function.
pub struct FnSource<F> {
    pub nrows: usize,
    pub ncols: usize,
    pub f: F,
}

struct FnEval<'a, F> {
    f: &'a F,
    rows: &'a [usize],
    cols: &'a [usize],
}

impl<F: Fn(usize, usize) -> C64 + Sync> BlockSource for FnSource<F> {
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn block<'a>(&'a self, rows: &'a [usize], cols: &'a [usize]) -> Box<dyn BlockEval + 'a> {
        Box::new(FnEval { f: &self.f, rows, cols })
    }
}

impl<F: Fn(usize, usize) -> C64> BlockEval for FnEval<'_, F> {
    fn row(&self, i: usize, out: &mut [C64]) {
        let r = self.rows[i];
        for (o, &c) in out.iter_mut().zip(self.cols) {
            *o = (self.f)(r, c);
        }
    }
    fn col(&self, j: usize, out: &mut [C64]) {
        let c = self.cols[j];
        for (o, &r) in out.iter_mut().zip(self.rows) {
            *o = (self.f)(r, c);
        }
    }
    fn dense(&self) -> Mat<C64> {
        Mat::from_fn(self.rows.len(), self.cols.len(), |i, j| {
            (self.f)(self.rows[i], self.cols[j])
        })
    }
}

#[derive(Clone, Debug)]
pub enum Block {
    Dense(Mat<C64>),
    LowRank(LowRank),
    /// Children ordered `[r0c0, r0c1, r1c0, r1c1]`.
    Hier(Box<[HBlock; 4]>),
}

/// A block with its row/column cluster nodes and their index ranges in the
/// permuted ordering.
#[derive(Clone, Debug)]
pub struct HBlock {
    pub row: usize,
    pub col: usize,
    pub r: [usize; 2],
    pub c: [usize; 2],
    pub block: Block,
}

impl HBlock {
    pub fn nrows(&self) -> usize {
        self.r[1] - self.r[0]
    }

    pub fn ncols(&self) -> usize {
        self.c[1] - self.c[0]
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a HBlock>) {
        match &self.block {
            Block::Hier(ch) => ch.iter().for_each(|c| c.leaves(out)),
            _ => out.push(self),
        }
    }

    /// `y += alpha * A x`; `x` spans the column range, `y` the row range.
    pub(crate) fn apply(&self, alpha: C64, x: MatRef<'_, C64>, y: MatMut<'_, C64>) {
        match &self.block {
            Block::Dense(d) => gemm(y, Accum::Add, d.as_ref(), x, alpha),
            Block::LowRank(lr) => {
                if lr.rank() == 0 {
                    return;
                }
                let mut t = Mat::zeros(lr.rank(), x.ncols());
                gemm(t.as_mut(), Accum::Replace, lr.v.transpose(), x, alpha);
                gemm(y, Accum::Add, lr.u.as_ref(), t.as_ref(), C64::new(1.0, 0.0));
            }
            Block::Hier(ch) => {
                let rs = ch[0].nrows();
                let cs = ch[0].ncols();
                let (x0, x1) = x.split_at_row(cs);
                let (y0, y1) = y.split_at_row_mut(rs);
                let top = |mut y: MatMut<'_, C64>, a: &HBlock, b: &HBlock| {
                    a.apply(alpha, x0, y.as_mut());
                    b.apply(alpha, x1, y);
                };
                if self.nrows() * self.ncols() > 1 << 16 {
                    rayon::join(|| top(y0, &ch[0], &ch[1]), || top(y1, &ch[2], &ch[3]));
                } else {
                    top(y0, &ch[0], &ch[1]);
                    top(y1, &ch[2], &ch[3]);
                }
            }
        }
    }

    /// `y += alpha * Aᵀ x`; `x` spans the row range, `y` the column range.
    pub(crate) fn apply_t(&self, alpha: C64, x: MatRef<'_, C64>, y: MatMut<'_, C64>) {
        match &self.block {
            Block::Dense(d) => gemm(y, Accum::Add, d.transpose(), x, alpha),
            Block::LowRank(lr) => {
                if lr.rank() == 0 {
                    return;
                }
                let mut t = Mat::zeros(lr.rank(), x.ncols());
                gemm(t.as_mut(), Accum::Replace, lr.u.transpose(), x, alpha);
                gemm(y, Accum::Add, lr.v.as_ref(), t.as_ref(), C64::new(1.0, 0.0));
            }
            Block::Hier(ch) => {
                let rs = ch[0].nrows();
                let cs = ch[0].ncols();
                let (x0, x1) = x.split_at_row(rs);
                let (mut y0, mut y1) = y.split_at_row_mut(cs);
                ch[0].apply_t(alpha, x0, y0.as_mut());
                ch[2].apply_t(alpha, x1, y0);
                ch[1].apply_t(alpha, x0, y1.as_mut());
                ch[3].apply_t(alpha, x1, y1);
            }
        }
    }

    /// Dense copy in permuted ordering.
    pub(crate) fn to_dense(&self) -> Mat<C64> {
        let mut d = Mat::zeros(self.nrows(), self.ncols());
        self.write_dense(d.as_mut(), self.r[0], self.c[0]);
        d
    }

    fn write_dense(&self, mut dst: MatMut<'_, C64>, r0: usize, c0: usize) {
        let (i, j) = (self.r[0] - r0, self.c[0] - c0);
        let sub = dst.as_mut().submatrix_mut(i, j, self.nrows(), self.ncols());
        match &self.block {
            Block::Dense(d) => {
                let mut sub = sub;
                sub.copy_from(d.as_ref());
            }
            Block::LowRank(lr) => {
                gemm(sub, Accum::Replace, lr.u.as_ref(), lr.v.transpose(), C64::new(1.0, 0.0));
            }
            Block::Hier(ch) => ch.iter().for_each(|c| c.write_dense(dst.as_mut(), r0, c0)),
        }
    }

    fn scale(&mut self, alpha: C64) {
        match &mut self.block {
            Block::Dense(d) => {
                for j in 0..d.ncols() {
                    d.col_as_slice_mut(j).iter_mut().for_each(|x| *x *= alpha);
                }
            }
            Block::LowRank(lr) => lr.scale(alpha),
            Block::Hier(ch) => ch.iter_mut().for_each(|c| c.scale(alpha)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    Dense,
    LowRank,
}

/// One leaf of the block partition, in cluster-permuted index ranges.
#[derive(Clone, Copy, Debug)]
pub struct RankEntry {
    pub row_lo: usize,
    pub row_hi: usize,
    pub col_lo: usize,
    pub col_hi: usize,
    pub kind: LeafKind,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct HMatrix {
    rows: Arc<ClusterTree>,
    cols: Arc<ClusterTree>,
    root: HBlock,
    tol: f64,
    eta: f64,
}

struct Builder<'a> {
    src: &'a dyn BlockSource,
    rt: &'a ClusterTree,
    ct: &'a ClusterTree,
    tol: f64,
    eta: f64,
}

impl Builder<'_> {
    fn build(&self, r: usize, c: usize) -> HBlock {
        let rn = &self.rt.nodes[r];
        let cn = &self.ct.nodes[c];
        let (m, n) = (rn.len(), cn.len());
        let ri = &self.rt.perm[rn.lo..rn.hi];
        let ci = &self.ct.perm[cn.lo..cn.hi];
        let block = if admissible(&rn.bbox, &cn.bbox, self.eta) {
            let ev = self.src.block(ri, ci);
            let lr = ev.low_rank(self.tol).unwrap_or_else(|| {
                let mut lr = aca(m, n, self.tol, |i, o| ev.row(i, o), |j, o| ev.col(j, o));
                if lr.rank() > 0 {
                    lr.recompress(self.tol);
                }
                lr
            });
            if lr.storage() >= m * n {
                Block::Dense(ev.dense())
            } else {
                Block::LowRank(lr)
            }
        } else if let (Some([r0, r1]), Some([c0, c1])) = (rn.children, cn.children) {
            let big = m * n > 4096;
            let pair = |a: usize, b: usize, x: usize, y: usize| {
                if big {
                    rayon::join(|| self.build(a, x), || self.build(b, y))
                } else {
                    (self.build(a, x), self.build(b, y))
                }
            };
            let ((b00, b01), (b10, b11)) = if big {
                rayon::join(|| pair(r0, r0, c0, c1), || pair(r1, r1, c0, c1))
            } else {
                (pair(r0, r0, c0, c1), pair(r1, r1, c0, c1))
            };
            Block::Hier(Box::new([b00, b01, b10, b11]))
        } else {
            Block::Dense(self.src.block(ri, ci).dense())
        };
        HBlock {
            row: r,
            col: c,
            r: [rn.lo, rn.hi],
            c: [cn.lo, cn.hi],
            block,
        }
    }
}

/// Block partition with zero leaves: rank-0 admissible blocks and dense
/// zeros elsewhere.
pub(crate) fn empty_block(rt: &ClusterTree, ct: &ClusterTree, r: usize, c: usize, eta: f64) -> HBlock {
    let rn = &rt.nodes[r];
    let cn = &ct.nodes[c];
    let block = if admissible(&rn.bbox, &cn.bbox, eta) {
        Block::LowRank(LowRank::zeros(rn.len(), cn.len()))
    } else if let (Some([r0, r1]), Some([c0, c1])) = (rn.children, cn.children) {
        Block::Hier(Box::new([
            empty_block(rt, ct, r0, c0, eta),
            empty_block(rt, ct, r0, c1, eta),
            empty_block(rt, ct, r1, c0, eta),
            empty_block(rt, ct, r1, c1, eta),
        ]))
    } else {
        Block::Dense(Mat::zeros(rn.len(), cn.len()))
    };
    HBlock {
        row: r,
        col: c,
        r: [rn.lo, rn.hi],
        c: [cn.lo, cn.hi],
        block,
    }
}

impl HMatrix {
    /// Approximates `src` on the block partition induced by the two trees.
    pub fn build(
        src: &dyn BlockSource,
        rows: Arc<ClusterTree>,
        cols: Arc<ClusterTree>,
        tol: f64,
        eta: f64,
    ) -> Result<Self> {
        if src.nrows() != rows.len() || src.ncols() != cols.len() {
            return invalid(format!(
                "source is {}x{} but cluster trees cover {}x{}",
                src.nrows(),
                src.ncols(),
                rows.len(),
                cols.len()
            ));
        }
        if !(tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        if rows.is_empty() || cols.is_empty() {
            return invalid("empty cluster tree");
        }
        let b = Builder {
            src,
            rt: &rows,
            ct: &cols,
            tol,
            eta,
        };
        let root = b.build(0, 0);
        Ok(HMatrix {
            rows,
            cols,
            root,
            tol,
            eta,
        })
    }

    /// Convenience constructor from an entry function and point sets.
    pub fn from_fn<F>(
        row_points: &[Point3],
        col_points: &[Point3],
        f: F,
        tol: f64,
        eta: f64,
        leaf: usize,
    ) -> Result<Self>
    where
        F: Fn(usize, usize) -> C64 + Sync,
    {
        let rt = Arc::new(build_cluster_tree(row_points, leaf));
        let ct = Arc::new(build_cluster_tree(col_points, leaf));
        let src = FnSource {
            nrows: row_points.len(),
            ncols: col_points.len(),
            f,
        };
        Self::build(&src, rt, ct, tol, eta)
    }

    pub(crate) fn from_parts(rows: Arc<ClusterTree>, cols: Arc<ClusterTree>, root: HBlock, tol: f64, eta: f64) -> Self {
        HMatrix {
            rows,
            cols,
            root,
            tol,
            eta,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn row_tree(&self) -> &Arc<ClusterTree> {
        &self.rows
    }

    pub fn col_tree(&self) -> &Arc<ClusterTree> {
        &self.cols
    }

    pub fn root(&self) -> &HBlock {
        &self.root
    }

    pub(crate) fn root_mut(&mut self) -> &mut HBlock {
        &mut self.root
    }

    /// `A x` in the original ordering.
    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.ncols() {
            return invalid(format!("vector has length {}, expected {}", x.len(), self.ncols()));
        }
        let xp = Mat::from_fn(self.ncols(), 1, |k, _| x[self.cols.perm[k]]);
        let mut yp = Mat::zeros(self.nrows(), 1);
        self.root.apply(C64::new(1.0, 0.0), xp.as_ref(), yp.as_mut());
        let mut y = vec![C64::new(0.0, 0.0); self.nrows()];
        for (k, &i) in self.rows.perm.iter().enumerate() {
            y[i] = yp[(k, 0)];
        }
        Ok(y)
    }

    /// Dense matrix in the original ordering.
    pub fn to_dense(&self) -> Mat<C64> {
        let d = self.root.to_dense();
        Mat::from_fn(self.nrows(), self.ncols(), |i, j| {
            d[(self.rows.iperm[i], self.cols.iperm[j])]
        })
    }

    pub fn scale(&mut self, alpha: C64) {
        self.root.scale(alpha);
    }

    pub fn leaves(&self) -> Vec<RankEntry> {
        let mut v = Vec::new();
        self.root.leaves(&mut v);
        v.into_iter()
            .map(|b| {
                let (kind, rank) = match &b.block {
                    Block::Dense(_) => (LeafKind::Dense, b.nrows().min(b.ncols())),
                    Block::LowRank(lr) => (LeafKind::LowRank, lr.rank()),
                    Block::Hier(_) => unreachable!(),
                };
                RankEntry {
                    row_lo: b.r[0],
                    row_hi: b.r[1],
                    col_lo: b.c[0],
                    col_hi: b.c[1],
                    kind,
                    rank,
                }
            })
            .collect()
    }

    /// Stored complex entries over all leaves.
    pub fn storage(&self) -> usize {
        let mut v = Vec::new();
        self.root.leaves(&mut v);
        v.iter()
            .map(|b| match &b.block {
                Block::Dense(d) => d.nrows() * d.ncols(),
                Block::LowRank(lr) => lr.storage(),
                Block::Hier(_) => 0,
            })
            .sum()
    }

    pub fn compression_ratio(&self) -> f64 {
        self.storage() as f64 / (self.nrows() as f64 * self.ncols() as f64)
    }

    pub fn rank_map_csv(&self) -> String {
        let mut s = String::from("row_lo,row_hi,col_lo,col_hi,kind,rank\n");
        for e in self.leaves() {
            let kind = match e.kind {
                LeafKind::Dense => "dense",
                LeafKind::LowRank => "lowrank",
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                e.row_lo, e.row_hi, e.col_lo, e.col_hi, kind, e.rank
            );
        }
        s
    }

    pub fn write_rank_map(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.rank_map_csv()).map_err(Error::from)
    }
}
