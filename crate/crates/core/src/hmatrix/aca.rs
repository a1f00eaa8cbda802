//! Adaptive cross approximation with partial pivoting.

use faer::Mat;

use super::lowrank::LowRank;
use crate::C64;

const MAX_ZERO_ROWS: usize = 4;

/// Relative size below which a final cross is rounding noise and is dropped.
const NOISE: f64 = 1e-12;

/// Builds `A ≈ U Vᵀ` from on-demand rows and columns.
///
/// Stops once `‖u_r‖‖v_r‖ <= tol ‖S_r‖_F`, where `S_r` is the running
/// approximation whose norm is updated incrementally. The result is not
/// recompressed.
pub fn aca<R, C>(m: usize, n: usize, tol: f64, mut row: R, mut col: C) -> LowRank
where
    R: FnMut(usize, &mut [C64]),
    C: FnMut(usize, &mut [C64]),
{
    let zero = C64::new(0.0, 0.0);
    let maxr = m.min(n);
    let mut us: Vec<Vec<C64>> = Vec::new();
    let mut vs: Vec<Vec<C64>> = Vec::new();
    let mut used_row = vec![false; m];
    let mut used_col = vec![false; n];
    let mut a = vec![zero; n];
    let mut b = vec![zero; m];
    let mut norm2 = 0.0f64;
    let mut i = 0usize;
    let mut zero_rows = 0;

    while us.len() < maxr {
        used_row[i] = true;
        row(i, &mut a);
        for (u, v) in us.iter().zip(&vs) {
            let c = u[i];
            for (x, y) in a.iter_mut().zip(v) {
                *x -= c * y;
            }
        }
        let mut j = usize::MAX;
        let mut best = -1.0;
        for (k, x) in a.iter().enumerate() {
            if !used_col[k] && x.norm() > best {
                best = x.norm();
                j = k;
            }
        }
        let scale = if norm2 > 0.0 {
            (norm2 / (m * n) as f64).sqrt()
        } else {
            0.0
        };
        if j == usize::MAX || best == 0.0 || best <= 1e-14 * scale {
            zero_rows += 1;
            match (0..m).find(|&k| !used_row[k]) {
                Some(k) if zero_rows <= MAX_ZERO_ROWS => {
                    i = k;
                    continue;
                }
                _ => break,
            }
        }
        zero_rows = 0;
        used_col[j] = true;
        let piv = a[j];
        let v: Vec<C64> = a.iter().map(|x| x / piv).collect();
        col(j, &mut b);
        for (u, vk) in us.iter().zip(&vs) {
            let c = vk[j];
            for (x, y) in b.iter_mut().zip(u) {
                *x -= c * y;
            }
        }
        let u = b.clone();

        let nu2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
        let nv2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let mut cross = 0.0;
        for (uk, vk) in us.iter().zip(&vs) {
            let a: C64 = uk.iter().zip(&u).map(|(p, q)| p.conj() * q).sum();
            let b: C64 = vk.iter().zip(&v).map(|(p, q)| p.conj() * q).sum();
            cross += (a * b).re;
        }
        norm2 = (norm2 + 2.0 * cross + nu2 * nv2).max(0.0);

        let mut next = usize::MAX;
        let mut best = -1.0;
        for (k, x) in u.iter().enumerate() {
            if !used_row[k] && x.norm() > best {
                best = x.norm();
                next = k;
            }
        }
        let step = (nu2 * nv2).sqrt();
        if step <= NOISE * norm2.sqrt() {
            break;
        }
        us.push(u);
        vs.push(v);
        if step <= tol * norm2.sqrt() || next == usize::MAX {
            break;
        }
        i = next;
    }

    let r = us.len();
    LowRank::new(Mat::from_fn(m, r, |i, k| us[k][i]), Mat::from_fn(n, r, |j, k| vs[k][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmatrix::lowrank::frob2;

    #[test]
    fn smooth_kernel_block() {
        let m = 60;
        let n = 50;
        let xs: Vec<f64> = (0..m).map(|i| i as f64 / m as f64).collect();
        let ys: Vec<f64> = (0..n).map(|j| 3.0 + j as f64 / n as f64).collect();
        let f = |i: usize, j: usize| C64::new(1.0 / (ys[j] - xs[i]), 0.0);
        let evals = std::cell::Cell::new(0usize);
        let lr = aca(
            m,
            n,
            1e-8,
            |i, out| {
                evals.set(evals.get() + n);
                for (j, o) in out.iter_mut().enumerate() {
                    *o = f(i, j);
                }
            },
            |j, out| {
                evals.set(evals.get() + m);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = f(i, j);
                }
            },
        );
        let evals = evals.get();
        assert!(lr.rank() < 15, "rank {}", lr.rank());
        assert!(evals < m * n);
        let d = lr.to_dense();
        let exact = Mat::from_fn(m, n, f);
        let err = Mat::from_fn(m, n, |i, j| d[(i, j)] - exact[(i, j)]);
        assert!(frob2(err.as_ref()).sqrt() < 1e-6 * frob2(exact.as_ref()).sqrt());
    }

    #[test]
    fn exact_rank_is_not_padded_with_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let (m, n) = (120, 90);
        for r in 1..12 {
            let mut gen = |len: usize| -> Vec<C64> {
                (0..len * r)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            };
            let (u, v) = (gen(m), gen(n));
            let f = |i: usize, j: usize| (0..r).map(|q| u[i * r + q] * v[j * r + q]).sum::<C64>();
            let lr = aca(
                m,
                n,
                1e-10,
                |i, o| o.iter_mut().enumerate().for_each(|(j, x)| *x = f(i, j)),
                |j, o| o.iter_mut().enumerate().for_each(|(i, x)| *x = f(i, j)),
            );
            assert_eq!(lr.rank(), r);
        }
    }

    #[test]
    fn zero_block_has_rank_zero() {
        let lr = aca(
            10,
            12,
            1e-6,
            |_, o| o.fill(C64::new(0.0, 0.0)),
            |_, o| o.fill(C64::new(0.0, 0.0)),
        );
        assert_eq!(lr.rank(), 0);
    }

    #[test]
    fn exact_low_rank_recovered() {
        let m = 30;
        let n = 20;
        let f = |i: usize, j: usize| {
            C64::new((i as f64).sin() * (j as f64 + 1.0), 0.0) + C64::new(0.0, (i * i) as f64 * 0.01) * (j as f64).cos()
        };
        let lr = aca(
            m,
            n,
            1e-12,
            |i, o| o.iter_mut().enumerate().for_each(|(j, x)| *x = f(i, j)),
            |j, o| o.iter_mut().enumerate().for_each(|(i, x)| *x = f(i, j)),
        );
        assert!(lr.rank() <= 3);
        let d = lr.to_dense();
        for i in 0..m {
            for j in 0..n {
                assert!((d[(i, j)] - f(i, j)).norm() < 1e-9);
            }
        }
    }
}
