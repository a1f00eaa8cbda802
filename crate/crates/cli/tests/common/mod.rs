//! Closed-form references for the acceptance runs. Nothing here calls into the
//! library except for the complex number type.

#![allow(dead_code)]

use std::f64::consts::PI;

use galerkin::C64;

/// Spherical Bessel functions `j_n(x)` and `y_n(x)` for `n = 0..=nmax`.
///
/// `y_n` by upward recurrence, which is stable; `j_n` by Miller's downward
/// recurrence normalized against `j_0 = sin x / x`.
pub fn spherical_bessel(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut y = vec![0.0; nmax + 1];
    y[0] = -x.cos() / x;
    if nmax > 0 {
        y[1] = -x.cos() / (x * x) - x.sin() / x;
    }
    for n in 1..nmax {
        y[n + 1] = (2 * n + 1) as f64 / x * y[n] - y[n - 1];
    }
    let start = nmax + 20 + x as usize * 2;
    let mut j = vec![0.0; nmax + 1];
    let (mut hi, mut mid) = (0.0, 1e-300);
    for n in (1..=start).rev() {
        let lo = (2 * n + 1) as f64 / x * mid - hi;
        hi = mid;
        mid = lo;
        if n - 1 <= nmax {
            j[n - 1] = mid;
        }
        if mid.abs() > 1e250 {
            hi /= 1e250;
            mid /= 1e250;
            for v in j.iter_mut() {
                *v /= 1e250;
            }
        }
    }
    let norm = (x.sin() / x) / j[0];
    for v in j.iter_mut() {
        *v *= norm;
    }
    (j, y)
}

/// Legendre polynomials `P_0..=P_nmax` at `t`.
pub fn legendre(nmax: usize, t: f64) -> Vec<f64> {
    let mut p = vec![1.0, t];
    for n in 1..nmax {
        p.push(((2 * n + 1) as f64 * t * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64);
    }
    p.truncate(nmax + 1);
    p
}

fn terms(ka: f64) -> usize {
    (ka + 4.0 * ka.cbrt() + 12.0) as usize
}

/// Far-field pattern of a plane wave scattered by a sound-soft sphere of
/// radius `a`, at angle `cos_g` from the incident direction; `p_sca ~ F e^{ikr}/r`.
pub fn soft_sphere_far_field(k: f64, a: f64, cos_g: f64) -> C64 {
    let nmax = terms(k * a);
    let (j, y) = spherical_bessel(nmax, k * a);
    let p = legendre(nmax, cos_g);
    let i = C64::new(0.0, 1.0);
    let s: C64 = (0..=nmax)
        .map(|n| (2 * n + 1) as f64 * j[n] / C64::new(j[n], y[n]) * p[n])
        .sum();
    i / k * s
}

/// Bistatic radar cross section of a perfectly conducting sphere of radius `a`
/// at scattering angle `theta` (0 = forward), in the plane containing the
/// incident electric field when `e_plane`, else the magnetic one.
pub fn pec_sphere_rcs(k: f64, a: f64, theta: f64, e_plane: bool) -> f64 {
    let x = k * a;
    let nmax = terms(x);
    let (j, y) = spherical_bessel(nmax + 1, x);
    let mu = theta.cos();
    // Riccati functions ψ = x j, ξ = x h, and their derivatives
    let psi = |n: usize| x * j[n];
    let xi = |n: usize| C64::new(x * j[n], x * y[n]);
    let dpsi = |n: usize| x * j[n - 1] - n as f64 * j[n];
    let dxi = |n: usize| C64::new(x * j[n - 1] - n as f64 * j[n], x * y[n - 1] - n as f64 * y[n]);
    let (mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let (mut pi_prev, mut pi) = (0.0, 1.0);
    for n in 1..=nmax {
        let nf = n as f64;
        if n > 1 {
            let next = ((2.0 * nf - 1.0) * mu * pi - nf * pi_prev) / (nf - 1.0);
            pi_prev = pi;
            pi = next;
        }
        let tau = nf * mu * pi - (nf + 1.0) * pi_prev;
        let an = dpsi(n) / dxi(n);
        let bn = psi(n) / xi(n);
        let c = (2.0 * nf + 1.0) / (nf * (nf + 1.0));
        s1 += c * (an * pi + bn * tau);
        s2 += c * (an * tau + bn * pi);
    }
    let s = if e_plane { s2 } else { s1 };
    4.0 * PI * s.norm_sqr() / (k * k)
}

/// Modified Bessel function `I_ν(x)` of integer order by its power series.
pub fn bessel_i(nu: u32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= (x / 2.0).powi(2) / (m as f64 * (m as f64 + nu as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Lowest Dirichlet eigenvalues of `-Δ` on the box `[0,1] × [0,1/2] × [0,1/2]`,
/// with multiplicity, by brute-force enumeration of mode numbers.
pub fn box_eigenvalues(count: usize) -> Vec<f64> {
    let mut all = Vec::new();
    for l in 1..=12u32 {
        for m in 1..=6u32 {
            for n in 1..=6u32 {
                let (l, m, n) = (f64::from(l), f64::from(m), f64::from(n));
                all.push(PI * PI * (l * l + (m / 0.5).powi(2) + (n / 0.5).powi(2)));
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

/// Prints the verdict line for one criterion and returns whether it passed.
///
/// Written straight to stdout so that it shows up without `--nocapture`.
pub fn verdict(name: &str, pass: bool, detail: &str) -> bool {
    use std::io::Write;
    let line = format!("\n{} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    pass
}

/// The acceptance runs are heavy; keep them from competing for the machine.
pub fn serial() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// `n` directions evenly spread over the great circle through `a` and `b`
/// (orthonormal), starting at `a`; returns `(angle from a, direction)`.
pub fn great_circle(a: [f64; 3], b: [f64; 3], n: usize) -> Vec<(f64, [f64; 3])> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            (t, std::array::from_fn(|c| t.cos() * a[c] + t.sin() * b[c]))
        })
        .collect()
}

pub fn rms_relative(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(g, w)| (g - w).powi(2)).sum();
    let den: f64 = want.iter().map(|w| w * w).sum();
    (num / den).sqrt()
}
