//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

use std::sync::OnceLock;

pub type P3 = [f64; 3];

pub fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: P3, b: P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: P3, s: f64) -> P3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

fn gl_sum(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> (f64, f64) {
    let h = b - a;
    let mut s = 0.0;
    let mut m = 0.0;
    for &(t, w) in rule {
        let v = f(a + h * t);
        s += w * v;
        m += w * v.abs();
    }
    (s * h, m * h.abs())
}

/// Adaptive Gauss-Legendre quadrature on `[a, b]`: an interval is accepted
/// when the 10- and 20-point rules agree to `tol` (absolute) or to rounding.
pub fn adapt(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    static RULES: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    let (lo, hi) = RULES.get_or_init(|| (gauss_legendre01(10), gauss_legendre01(20)));
    fn rec(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        lo: &[(f64, f64)],
        hi: &[(f64, f64)],
        depth: u32,
    ) -> f64 {
        let (c, _) = gl_sum(f, a, b, lo);
        let (d, mag) = gl_sum(f, a, b, hi);
        if (c - d).abs() <= tol.max(1e-13 * mag) || depth > 40 {
            return d;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, lo, hi, depth + 1) + rec(f, m, b, 0.5 * tol, lo, hi, depth + 1)
    }
    rec(f, a, b, tol, lo, hi, 0)
}

/// `∫_T f(y - x) dy` for `f` singular or nearly singular at the origin.
///
/// `T` is split into the three triangles spanned by the projection `p` of `x`
/// onto its plane and the edges (signed, so `p` may lie outside), and each is
/// integrated in Duffy coordinates `y = p + u (a - p) + u v (b - a)`, which
/// removes a `1/|x - y|` singularity at `p`. The offset `y - x` is formed
/// in these coordinates, free of cancellation.
pub fn singular_triangle_integral(tri: &[P3; 3], x: P3, f: &dyn Fn(P3) -> f64, tol: f64) -> f64 {
    let nn = cross(sub(tri[1], tri[0]), sub(tri[2], tri[0]));
    let n = scale(nn, 1.0 / norm(nn));
    let mut h = dot(sub(x, tri[0]), n);
    if h.abs() < 1e-13 * norm(nn).sqrt() {
        h = 0.0;
    }
    let p = sub(x, scale(n, h));
    let mut total = 0.0;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let c = cross(sub(a, p), sub(b, a));
        let jac = dot(c, n);
        if jac.abs() < 1e-300 {
            continue;
        }
        let mut outer = |v: f64| {
            let w = add(sub(a, p), scale(sub(b, a), v));
            let mut inner = |u: f64| u * f(add(scale(n, -h), scale(w, u)));
            if h == 0.0 {
                // the Duffy factor cancels the in-plane singularity completely
                return adapt(&mut inner, 0.0, 1.0, tol * 0.1);
            }
            // grade towards the nearly singular corner
            let mut s = 0.0;
            let mut hi = 1.0;
            for _ in 0..30 {
                let lo = 0.5 * hi;
                s += adapt(&mut inner, lo, hi, tol * 0.1);
                hi = lo;
            }
            s + adapt(&mut inner, 0.0, hi, tol * 0.1)
        };
        total += jac * adapt(&mut outer, 0.0, 1.0, tol / jac.abs().max(1e-300));
    }
    total
}

/// Area of a convex polygon in the plane.
fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let mut a = 0.0;
    for i in 0..p.len() {
        let (u, v) = (p[i], p[(i + 1) % p.len()]);
        a += u[0] * v[1] - u[1] * v[0];
    }
    0.5 * a.abs()
}

/// Clips a polygon against the counter-clockwise convex polygon `clip`.
fn clip_polygon(mut poly: Vec<[f64; 2]>, clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut poly);
        for k in 0..input.len() {
            let (p, q) = (input[k], input[(k + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                poly.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                poly.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// `∫_T ∫_T 1/|x - y| dx dy` for a flat triangle.
///
/// With `z = y - x` this is `∫ A(z)/|z| dz`, `A(z)` the overlap area of `T`
/// and `T + z`; in polar coordinates the `1/|z|` cancels the Jacobian and
/// the overlap is computed exactly by polygon clipping.
pub fn triangle_self_potential(tri: &[P3; 3], tol: f64) -> f64 {
    let e1 = sub(tri[1], tri[0]);
    let e1 = scale(e1, 1.0 / norm(e1));
    let e2 = cross(tri_normal(tri), e1);
    let local = |p: P3| [dot(sub(p, tri[0]), e1), dot(sub(p, tri[0]), e2)];
    let t2: Vec<[f64; 2]> = tri.iter().map(|p| local(*p)).collect();
    let overlap = |z: [f64; 2]| {
        let moved: Vec<[f64; 2]> = t2.iter().map(|p| [p[0] + z[0], p[1] + z[1]]).collect();
        let c = clip_polygon(moved, &t2);
        if c.len() < 3 {
            0.0
        } else {
            polygon_area(&c)
        }
    };
    let mut ray = |theta: f64| {
        let d = [theta.cos(), theta.sin()];
        let reach = t2
            .iter()
            .flat_map(|p| t2.iter().map(move |q| (p[0] - q[0]) * d[0] + (p[1] - q[1]) * d[1]))
            .fold(0.0, f64::max);
        adapt(&mut |r: f64| overlap([r * d[0], r * d[1]]), 0.0, reach, tol)
    };
    adapt(&mut ray, 0.0, 2.0 * std::f64::consts::PI, tol)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Mean of `∏ λ_i^{α_i}` over a `d`-simplex, `d = α.len() - 1`:
/// `d! ∏ α_i! / (d + |α|)!`.
pub fn simplex_monomial_mean(alpha: &[u32]) -> f64 {
    let d = (alpha.len() - 1) as u32;
    let s: u32 = alpha.iter().sum();
    factorial(d) * alpha.iter().map(|&a| factorial(a)).product::<f64>() / factorial(d + s)
}

/// Unit outward normal of a flat triangle from its vertex order.
pub fn tri_normal(tri: &[P3; 3]) -> P3 {
    let nn = cross(sub(tri[1], tri[0]), sub(tri[2], tri[0]));
    scale(nn, 1.0 / norm(nn))
}

pub fn tri_area(tri: &[P3; 3]) -> f64 {
    0.5 * norm(cross(sub(tri[1], tri[0]), sub(tri[2], tri[0])))
}

pub fn dist3(a: P3, b: P3) -> f64 {
    norm(sub(a, b))
}
