mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{add, dist3, norm, scale, singular_triangle_integral, sub, triangle_self_potential, P3};
use galerkin::assembly::{bem_dense, regularize};
use galerkin::fem::FemSpace;
use galerkin::kernels::{analytic_triangle_integrals, Kernel};
use galerkin::mesh::Mesh;
use galerkin::quadrature::make_domain;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn inv_r(d: P3) -> f64 {
    1.0 / norm(d)
}

#[test]
fn newton_potential_at_the_centroid() {
    let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let x = [1.0 / 3.0, 1.0 / 3.0, 0.0];
    let got = analytic_triangle_integrals(&tri, x).unwrap().i0;
    let want = singular_triangle_integral(&tri, x, &inv_r, 1e-13);
    assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
}

#[test]
fn far_observer_sees_a_point_charge() {
    let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let x = [48.0, -60.0, 64.0];
    assert!((norm(x) - 100.0).abs() < 1e-12);
    let got = analytic_triangle_integrals(&tri, x).unwrap().i0;
    let c = [1.0 / 3.0, 1.0 / 3.0, 0.0];
    let want = 0.5 / dist3(x, c);
    assert!((got / want - 1.0).abs() <= 1e-4);
}

fn random_triangle(rng: &mut StdRng) -> [P3; 3] {
    loop {
        let t: [P3; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let n = common::cross(sub(t[1], t[0]), sub(t[2], t[0]));
        let longest = dist3(t[0], t[1]).max(dist3(t[1], t[2])).max(dist3(t[2], t[0]));
        // reasonably shaped: area not tiny compared to the longest edge
        if norm(n) > 0.3 * longest * longest {
            return t;
        }
    }
}

#[test]
fn hundred_random_observers_match_the_adaptive_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut inside = 0;
    for case in 0..100 {
        let t = random_triangle(&mut rng);
        let x = if case % 3 == 0 {
            inside += 1;
            let (a, b) = (rng.gen_range(0.05..0.9), rng.gen_range(0.05..0.9));
            let (a, b) = if a + b > 0.95 { (1.0 - a, 1.0 - b) } else { (a, b) };
            add(t[0], add(scale(sub(t[1], t[0]), a), scale(sub(t[2], t[0]), b)))
        } else {
            std::array::from_fn(|_| rng.gen_range(-1.5..1.5))
        };
        let got = analytic_triangle_integrals(&t, x).unwrap();
        let want = singular_triangle_integral(&t, x, &inv_r, 1e-13);
        assert!(
            (got.i0 - want).abs() <= 1e-8 * want,
            "case {case}: {} vs {want}",
            got.i0
        );
        let h = common::dot(sub(x, t[0]), common::tri_normal(&t)).abs();
        if h > 1e-3 {
            for c in 0..3 {
                let g = singular_triangle_integral(&t, x, &|d: P3| -d[c] / norm(d).powi(3), 1e-13);
                let s = norm(got.grad).max(1.0);
                assert!(
                    (got.grad[c] - g).abs() <= 1e-8 * s,
                    "case {case}, component {c}: {} vs {g}",
                    got.grad[c]
                );
            }
        }
    }
    assert!(inside >= 30);
}

/// Uniform `m × m` subdivision of a triangle.
fn subdivide(t: &[P3; 3], m: usize) -> Mesh {
    let mut idx = std::collections::HashMap::new();
    let mut verts = Vec::new();
    let mut id = |i: usize, j: usize, verts: &mut Vec<P3>| {
        *idx.entry((i, j)).or_insert_with(|| {
            let (a, b) = (i as f64 / m as f64, j as f64 / m as f64);
            verts.push(add(t[0], add(scale(sub(t[1], t[0]), a), scale(sub(t[2], t[0]), b))));
            verts.len() - 1
        })
    };
    let mut el = Vec::new();
    for i in 0..m {
        for j in 0..m - i {
            let (a, b, c) = (id(i, j, &mut verts), id(i + 1, j, &mut verts), id(i, j + 1, &mut verts));
            el.extend([a, b, c]);
            if i + j + 1 < m {
                let d = id(i + 1, j + 1, &mut verts);
                el.extend([b, d, c]);
            }
        }
    }
    Mesh::new(verts, el, 3).unwrap()
}

/// `(1/4π) ∫_T ∫_T 1/|x - y|` from the regularized assembly, with the outer
/// integral resolved on a subdivision of `T` so that only the inner singular
/// integral is left to the correction. The outer error decays like `1/m²`.
fn corrected_self_term(t: &[P3; 3], m: usize) -> f64 {
    let coarse = Arc::new(Mesh::new(t.to_vec(), vec![0, 1, 2], 3).unwrap());
    let fine = Arc::new(subdivide(t, m));
    let (dx, dy) = (
        make_domain(fine.clone(), 7).unwrap(),
        make_domain(coarse.clone(), 3).unwrap(),
    );
    let test = FemSpace::new(fine, "P0".parse().unwrap()).unwrap();
    let trial = FemSpace::new(coarse, "P0".parse().unwrap()).unwrap();
    let raw = bem_dense(&dx, &dy, &test, &Kernel::laplace(), &trial).unwrap();
    let reg = regularize(&dx, &dy, &test, "[1/r]", &trial).unwrap();
    let mut total = 0.0;
    for i in 0..raw.nrows() {
        total += raw[(i, 0)].re + reg.get(i, 0);
    }
    total / (4.0 * PI)
}

fn oracle_self_term(t: &[P3; 3]) -> f64 {
    triangle_self_potential(t, 1e-12) / (4.0 * PI)
}

#[test]
fn coincident_triangle_self_term() {
    for t in [
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        [[0.2, -0.1, 0.3], [0.9, 0.3, 0.1], [0.1, 0.6, 0.5]],
    ] {
        let want = oracle_self_term(&t);
        let got = corrected_self_term(&t, 128);
        assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }
}
