use crate::error::{invalid, Result};
use crate::geometry::{cross, dist, dot, norm, scale, sub, Point3};

/// Closed-form integrals over a flat triangle `T` for an observation point `x`,
/// with `R = |x - y|`:
///
/// * `i0   = ∫_T 1/R dy`
/// * `i1   = ∫_T (y - x)/R dy`
/// * `grad = ∫_T ∇_y(1/R) dy = ∫_T (x - y)/R³ dy` (principal value in the plane of `T`)
/// * `rr   = ∫_T (y - x) ⊗ (y - x)/R³ dy`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleIntegrals {
    pub i0: f64,
    pub i1: Point3,
    pub grad: Point3,
    pub rr: [[f64; 3]; 3],
}

/// `∫_{s⁻}^{s⁺} ds / sqrt(s² + r0²)` written to avoid cancellation.
fn edge_log(sm: f64, sp: f64, rm: f64, rp: f64, r02: f64) -> f64 {
    if sm >= 0.0 {
        ((rp + sp) / (rm + sm)).ln()
    } else if sp <= 0.0 {
        ((rm - sm) / (rp - sp)).ln()
    } else {
        ((rp + sp) * (rm - sm) / r02).ln()
    }
}

/// Edge decomposition of the Newton potential of a flat triangle and its moments.
pub fn analytic_triangle_integrals(tri: &[Point3; 3], x: Point3) -> Result<TriangleIntegrals> {
    let nn = cross(sub(tri[1], tri[0]), sub(tri[2], tri[0]));
    let twice_area = norm(nn);
    let size = dist(tri[0], tri[1]).max(dist(tri[1], tri[2])).max(dist(tri[2], tri[0]));
    if !(twice_area > 1e-14 * size * size) {
        return invalid("degenerate triangle");
    }
    let n = scale(nn, 1.0 / twice_area);
    let mut h = dot(sub(x, tri[0]), n);
    let eps = 1e-12 * size;
    if h.abs() < eps {
        h = 0.0;
    }
    let rho = sub(x, scale(n, h));
    let ah = h.abs();

    let mut sum_t0f = 0.0;
    let mut sum_beta = 0.0;
    let mut sum_mf = [0.0; 3];
    let mut i1_plane = [0.0; 3];
    // Σ m ⊗ (t0 m f + t (R⁺ - R⁻))
    let mut muu = [[0.0; 3]; 3];
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let len = dist(a, b);
        let t = scale(sub(b, a), 1.0 / len);
        let m = cross(t, n);
        let sm = dot(sub(a, rho), t);
        let sp = dot(sub(b, rho), t);
        let t0 = dot(sub(a, rho), m);
        let rm = dist(x, a);
        let rp = dist(x, b);
        let r02 = t0 * t0 + h * h;
        let on_line = t0.abs() < eps;
        let f = if on_line && ah == 0.0 && sm < 0.0 && sp > 0.0 {
            // x on the edge itself: the logarithm diverges
            f64::INFINITY
        } else {
            edge_log(sm, sp, rm, rp, r02)
        };
        let tf = if on_line { 0.0 } else { t0 * f };
        sum_t0f += tf;
        if !on_line {
            sum_beta += (t0 * sp / (r02 + ah * rp)).atan() - (t0 * sm / (r02 + ah * rm)).atan();
        }
        let e_int = 0.5 * (r02 * f + sp * rp - sm * rm);
        let e_int = if r02 == 0.0 { 0.5 * (sp * rp - sm * rm) } else { e_int };
        for d in 0..3 {
            sum_mf[d] += m[d] * f;
            i1_plane[d] += m[d] * e_int;
        }
        let w = [0, 1, 2].map(|d| tf * m[d] + t[d] * (rp - rm));
        for p in 0..3 {
            for q in 0..3 {
                muu[p][q] += m[p] * w[q];
            }
        }
    }
    let i0 = sum_t0f - ah * sum_beta;
    let i1 = [0, 1, 2].map(|d| i1_plane[d] - h * n[d] * i0);
    let normal_part = if h == 0.0 { 0.0 } else { h.signum() * sum_beta };
    let grad = [0, 1, 2].map(|d| sum_mf[d] + n[d] * normal_part);
    let mut rr = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in 0..3 {
            let proj = if p == q { 1.0 } else { 0.0 } - n[p] * n[q];
            rr[p][q] = proj * i0 - muu[p][q]
                // -h (∫u/R³ ⊗ n + n ⊗ ∫u/R³) with ∫u/R³ = -Σ m f
                + h * (sum_mf[p] * n[q] + n[p] * sum_mf[q])
                + ah * sum_beta * n[p] * n[q];
        }
    }
    Ok(TriangleIntegrals { i0, i1, grad, rr })
}
