mod common;

use std::sync::Arc;

use common::simplex_monomial_mean;
use galerkin::mesh::Mesh;
use galerkin::quadrature::{integrate, make_domain, rule, supported_counts};
use proptest::prelude::*;

fn degree(dim: usize, count: usize) -> u32 {
    match (dim, count) {
        (1, p) => 2 * p as u32 - 1,
        (_, 1) => 1,
        (2, 3) | (3, 4) => 2,
        (2, 7) | (3, 15) => 5,
        _ => unreachable!(),
    }
}

/// All exponent vectors of length `n` with sum at most `deg`.
fn exponents(n: usize, deg: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for a in 0..=deg {
        for mut rest in exponents(n - 1, deg - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

fn apply_rule(dim: usize, count: usize, alpha: &[u32]) -> f64 {
    let r = rule(dim, count).unwrap();
    r.bary
        .iter()
        .zip(&r.weights)
        .map(|(b, w)| {
            w * alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| b[i].powi(a as i32))
                .product::<f64>()
        })
        .sum()
}

#[test]
fn every_rule_is_exact_through_its_degree() {
    for dim in 1..=3 {
        for &count in supported_counts(dim) {
            let deg = degree(dim, count);
            for alpha in exponents(dim + 1, deg) {
                let exact = simplex_monomial_mean(&alpha);
                let got = apply_rule(dim, count, &alpha);
                assert!(
                    (got - exact).abs() <= 1e-12 * exact,
                    "dim {dim}, {count} points, exponents {alpha:?}: {got} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn rules_stop_at_their_degree() {
    // one degree higher is no longer integrated exactly by every monomial
    for dim in 1..=3 {
        for &count in supported_counts(dim) {
            let deg = degree(dim, count) + 1;
            let worst = exponents(dim + 1, deg)
                .iter()
                .map(|a| (apply_rule(dim, count, a) - simplex_monomial_mean(a)).abs() / simplex_monomial_mean(a))
                .fold(0.0, f64::max);
            assert!(
                worst > 1e-10,
                "dim {dim}, {count} points is exact beyond degree {}",
                deg - 1
            );
        }
    }
}

#[test]
fn weights_are_positive_and_sum_to_one() {
    for dim in 1..=3 {
        for &count in supported_counts(dim) {
            let r = rule(dim, count).unwrap();
            assert_eq!(r.len(), count);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for b in &r.bary {
                assert!((b[..=dim].iter().sum::<f64>() - 1.0).abs() < 1e-14);
                assert!(b[..=dim].iter().all(|&l| l >= 0.0));
            }
        }
    }
}

fn simplex(dim: usize, pts: &[[f64; 3]]) -> Arc<Mesh> {
    Arc::new(Mesh::new(pts[..=dim].to_vec(), (0..=dim).collect(), dim + 1).unwrap())
}

/// Barycentric coordinates of `x` in the simplex, solved by Cramer's rule on the
/// edge vectors (least squares for embedded simplices).
fn bary(dim: usize, pts: &[[f64; 3]], x: [f64; 3]) -> Vec<f64> {
    let e: Vec<[f64; 3]> = (1..=dim).map(|i| common::sub(pts[i], pts[0])).collect();
    let r = common::sub(x, pts[0]);
    // normal equations G c = Eᵀ r
    let g: Vec<Vec<f64>> = e
        .iter()
        .map(|a| e.iter().map(|b| common::dot(*a, *b)).collect())
        .collect();
    let rhs: Vec<f64> = e.iter().map(|a| common::dot(*a, r)).collect();
    let c = match dim {
        1 => vec![rhs[0] / g[0][0]],
        2 => {
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            vec![
                (rhs[0] * g[1][1] - g[0][1] * rhs[1]) / det,
                (g[0][0] * rhs[1] - rhs[0] * g[1][0]) / det,
            ]
        }
        _ => {
            let det3 = |m: &[[f64; 3]; 3]| common::dot(m[0], common::cross(m[1], m[2]));
            let m = [
                [g[0][0], g[0][1], g[0][2]],
                [g[1][0], g[1][1], g[1][2]],
                [g[2][0], g[2][1], g[2][2]],
            ];
            let d = det3(&m);
            (0..3)
                .map(|k| {
                    let mut mk = m;
                    for row in 0..3 {
                        mk[row][k] = rhs[row];
                    }
                    det3(&mk) / d
                })
                .collect()
        }
    };
    let mut l = vec![1.0 - c.iter().sum::<f64>()];
    l.extend(c);
    l
}

fn measure(dim: usize, pts: &[[f64; 3]]) -> f64 {
    let e: Vec<[f64; 3]> = (1..=dim).map(|i| common::sub(pts[i], pts[0])).collect();
    match dim {
        1 => common::norm(e[0]),
        2 => 0.5 * common::norm(common::cross(e[0], e[1])),
        _ => common::dot(e[0], common::cross(e[1], e[2])).abs() / 6.0,
    }
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    // random monomial in the barycentric coordinates of a random physical simplex
    #[test]
    fn random_monomials_on_physical_simplices(
        dim in 1usize..=3,
        pick in 0usize..3,
        pts in [point(), point(), point(), point()],
        seed in any::<u64>(),
    ) {
        let counts = supported_counts(dim);
        let count = counts[pick % counts.len()];
        let meas = measure(dim, &pts);
        let longest = (0..=dim)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| common::norm(common::sub(pts[i], pts[j])))
            .fold(0.0, f64::max);
        // keep the barycentric recovery well conditioned
        prop_assume!(meas > 0.1 * longest.powi(dim as i32) / [1.0, 1.0, 2.0, 6.0][dim]);
        let deg = degree(dim, count);
        let all = exponents(dim + 1, deg);
        let alpha = all[(seed % all.len() as u64) as usize].clone();
        let dom = make_domain(simplex(dim, &pts), count).unwrap();
        let got: f64 = integrate(&dom, |xs| {
            xs.iter()
                .map(|x| bary(dim, &pts, *x).iter().zip(&alpha).map(|(l, &a)| l.powi(a as i32)).product::<f64>())
                .collect()
        })
        .unwrap();
        let exact = meas * simplex_monomial_mean(&alpha);
        prop_assert!((got - exact).abs() <= 1e-12 * exact.max(1e-300) + 1e-14 * meas, "{got} vs {exact}");
    }

    #[test]
    fn affine_maps_scale_integrals_by_the_determinant(
        a in [point(), point(), point()],
        shift in point(),
    ) {
        let det = common::dot(a[0], common::cross(a[1], a[2]));
        prop_assume!(det.abs() > 0.05);
        let pts = [[0.1, 0.0, 0.0], [1.0, 0.2, 0.0], [0.0, 1.1, 0.3], [0.2, 0.1, 0.9]];
        let map = |x: [f64; 3]| -> [f64; 3] {
            let mut y = shift;
            for i in 0..3 {
                for j in 0..3 {
                    y[i] += a[i][j] * x[j];
                }
            }
            y
        };
        let mapped: Vec<[f64; 3]> = pts.iter().map(|p| map(*p)).collect();
        let f = |x: &[f64; 3]| (x[0] * 1.3).sin() + x[1] * x[2] + (0.5 * x[2]).exp();
        let base = integrate(&make_domain(simplex(3, &pts), 15).unwrap(), |xs| xs.iter().map(|x| f(&map(*x))).collect()).unwrap();
        let image = integrate(&make_domain(simplex(3, &mapped), 15).unwrap(), |xs| xs.iter().map(f).collect()).unwrap();
        prop_assert!((image - det.abs() * base).abs() <= 1e-12 * image.abs().max(1.0));
    }
}
