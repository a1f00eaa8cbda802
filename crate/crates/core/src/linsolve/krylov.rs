//! Restarted GMRES and conjugate gradients.

use crate::error::{invalid, Error, Result};
use crate::scalar::{axpy, dotc, norm2, Scalar};

use super::LinearOperator;

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub maxit: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-6,
            restart: 50,
            maxit: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Relative residual after each iteration (index 0: initial guess).
    pub history: Vec<f64>,
    pub converged: bool,
}

impl<T> SolveResult<T> {
    pub fn residual(&self) -> f64 {
        *self.history.last().unwrap_or(&f64::NAN)
    }
}

fn breakdown<T: Scalar>(iterations: usize, residual: f64, x: &[T]) -> Error {
    Error::Breakdown {
        iterations,
        residual,
        iterate: x.iter().map(|v| v.to_c64()).collect(),
    }
}

fn residual<T: Scalar>(a: &dyn LinearOperator<T>, x: &[T], b: &[T], r: &mut [T]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = *bi - *ri;
    }
}

/// Complex Givens rotation `(c, s, r)` with `[c s; -s̄ c] [a; b] = [r; 0]`.
fn givens<T: Scalar>(a: T, b: T) -> (f64, T, T) {
    let (na, nb) = (a.abs(), b.abs());
    if nb == 0.0 {
        return (1.0, T::zero(), a);
    }
    if na == 0.0 {
        return (0.0, T::one(), b);
    }
    let nrm = na.hypot(nb);
    let phase = a * (1.0 / na);
    (na / nrm, phase * b.conj() * (1.0 / nrm), phase * nrm)
}

/// Right-preconditioned restarted GMRES for `A x = b`, starting from zero.
///
/// Returns the last iterate with `converged = false` if `maxit` iterations
/// do not reach `‖b - A x‖ ≤ tol ‖b‖`.
pub fn gmres<T: Scalar>(
    a: &dyn LinearOperator<T>,
    b: &[T],
    opts: &GmresOptions,
    precond: Option<&dyn LinearOperator<T>>,
) -> Result<SolveResult<T>> {
    let n = a.dim();
    if b.len() != n {
        return invalid(format!("right-hand side has length {}, expected {n}", b.len()));
    }
    if !(opts.tol > 0.0) || opts.restart == 0 {
        return invalid("GMRES needs tol > 0 and restart >= 1");
    }
    if let Some(p) = precond {
        if p.dim() != n {
            return invalid("preconditioner dimension mismatch");
        }
    }
    let bn = norm2(b);
    let mut x = vec![T::zero(); n];
    if bn == 0.0 {
        return Ok(SolveResult {
            x,
            iterations: 0,
            history: vec![0.0],
            converged: true,
        });
    }
    let m = opts.restart.min(n.max(1));
    let mut history = vec![1.0];
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut it = 0;
    r.copy_from_slice(b);
    loop {
        let beta = norm2(&r);
        if !beta.is_finite() {
            return Err(breakdown(it, f64::NAN, &x));
        }
        if beta <= opts.tol * bn {
            return Ok(SolveResult {
                x,
                iterations: it,
                history,
                converged: true,
            });
        }
        if it >= opts.maxit {
            return Ok(SolveResult {
                x,
                iterations: it,
                history,
                converged: false,
            });
        }
        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&ri| ri * (1.0 / beta)).collect()];
        let mut h: Vec<Vec<T>> = Vec::new();
        let mut cs: Vec<(f64, T)> = Vec::new();
        let mut g = vec![T::from_f64(beta)];
        let mut k = 0;
        while k < m && it < opts.maxit {
            let src: &[T] = match precond {
                Some(p) => {
                    p.apply(&v[k], &mut z);
                    &z
                }
                None => &v[k],
            };
            a.apply(src, &mut w);
            let mut col = vec![T::zero(); k + 2];
            for _ in 0..2 {
                for (j, vj) in v.iter().enumerate() {
                    let hij = dotc(vj, &w);
                    col[j] += hij;
                    axpy(-hij, vj, &mut w);
                }
            }
            let hn = norm2(&w);
            if !hn.is_finite() {
                return Err(breakdown(it, f64::NAN, &x));
            }
            col[k + 1] = T::from_f64(hn);
            for (j, &(c, s)) in cs.iter().enumerate() {
                let (p, q) = (col[j], col[j + 1]);
                col[j] = p * c + s * q;
                col[j + 1] = q * c - s.conj() * p;
            }
            let (c, s, rr) = givens(col[k], col[k + 1]);
            col[k] = rr;
            col[k + 1] = T::zero();
            cs.push((c, s));
            let gk = g[k];
            g[k] = gk * c;
            g.push(-(s.conj() * gk));
            h.push(col);
            it += 1;
            k += 1;
            let est = g[k].abs() / bn;
            history.push(est);
            if est <= opts.tol || hn <= f64::EPSILON * beta {
                break;
            }
            v.push(w.iter().map(|&wi| wi * (1.0 / hn)).collect());
        }
        // back substitution for y, x += M⁻¹ V y
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            if h[i][i].abs() == 0.0 {
                return Err(breakdown(it, history.last().copied().unwrap_or(f64::NAN), &x));
            }
            y[i] = s / h[i][i];
        }
        let mut upd = vec![T::zero(); n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &v[j], &mut upd);
        }
        match precond {
            Some(p) => {
                p.apply(&upd, &mut z);
                axpy(T::one(), &z, &mut x);
            }
            None => axpy(T::one(), &upd, &mut x),
        }
        residual(a, &x, b, &mut r);
        let true_res = norm2(&r) / bn;
        *history.last_mut().unwrap() = true_res;
    }
}

/// Conjugate gradients for Hermitian positive definite `A`.
pub fn cg<T: Scalar>(a: &dyn LinearOperator<T>, b: &[T], tol: f64, maxit: usize) -> Result<SolveResult<T>> {
    let n = a.dim();
    if b.len() != n {
        return invalid(format!("right-hand side has length {}, expected {n}", b.len()));
    }
    if !(tol > 0.0) {
        return invalid("CG needs tol > 0");
    }
    let bn = norm2(b);
    let mut x = vec![T::zero(); n];
    if bn == 0.0 {
        return Ok(SolveResult {
            x,
            iterations: 0,
            history: vec![0.0],
            converged: true,
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![T::zero(); n];
    let mut rr = dotc(&r, &r);
    let mut history = vec![1.0];
    for it in 1..=maxit {
        a.apply(&p, &mut ap);
        let pap = dotc(&p, &ap);
        if !(pap.abs() > 0.0) || !pap.is_finite() {
            return Err(breakdown(it - 1, history.last().copied().unwrap(), &x));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dotc(&r, &r);
        let res = rr_new.abs().sqrt() / bn;
        history.push(res);
        if res <= tol {
            // confirm with the true residual
            let mut t = vec![T::zero(); n];
            residual(a, &x, b, &mut t);
            let true_res = norm2(&t) / bn;
            *history.last_mut().unwrap() = true_res;
            if true_res <= tol {
                return Ok(SolveResult {
                    x,
                    iterations: it,
                    history,
                    converged: true,
                });
            }
            r = t;
            p = r.clone();
            rr = dotc(&r, &r);
            continue;
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = *ri + beta * *pi;
        }
        rr = rr_new;
    }
    Ok(SolveResult {
        x,
        iterations: maxit,
        history,
        converged: false,
    })
}
