//! Gauss rules on simplices and quadrature domains.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::geometry::Point3;
use crate::mesh::Mesh;

/// A reference rule: barycentric coordinates (first `npe` entries used) and
/// weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub bary: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Supported point counts per mesh dimension.
pub fn supported_counts(dim: usize) -> &'static [usize] {
    match dim {
        1 => &[1, 2, 3, 4, 5],
        2 => &[1, 3, 7],
        3 => &[1, 4, 15],
        _ => &[],
    }
}

fn gauss_legendre(p: usize) -> Vec<(f64, f64)> {
    // nodes on [-1, 1] with weights summing to 2
    match p {
        1 => vec![(0.0, 2.0)],
        2 => {
            let x = 1.0 / 3f64.sqrt();
            vec![(-x, 1.0), (x, 1.0)]
        }
        3 => {
            let x = 0.6f64.sqrt();
            vec![(-x, 5.0 / 9.0), (0.0, 8.0 / 9.0), (x, 5.0 / 9.0)]
        }
        4 => {
            let r = 2.0 / 7.0 * 1.2f64.sqrt();
            let (a, b) = ((3.0 / 7.0 - r).sqrt(), (3.0 / 7.0 + r).sqrt());
            let s30 = 30f64.sqrt();
            let (wa, wb) = ((18.0 + s30) / 36.0, (18.0 - s30) / 36.0);
            vec![(-b, wb), (-a, wa), (a, wa), (b, wb)]
        }
        5 => {
            let r = 2.0 * (10.0f64 / 7.0).sqrt();
            let (a, b) = ((5.0 - r).sqrt() / 3.0, (5.0 + r).sqrt() / 3.0);
            let s70 = 70f64.sqrt();
            let (wa, wb) = ((322.0 + 13.0 * s70) / 900.0, (322.0 - 13.0 * s70) / 900.0);
            vec![(-b, wb), (-a, wa), (0.0, 128.0 / 225.0), (a, wa), (b, wb)]
        }
        _ => unreachable!(),
    }
}

fn push_s21(rule: &mut Rule, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    for p in [[b, a, a, 0.0], [a, b, a, 0.0], [a, a, b, 0.0]] {
        rule.bary.push(p);
        rule.weights.push(w);
    }
}

fn push_s31(rule: &mut Rule, a: f64, w: f64) {
    let b = 1.0 - 3.0 * a;
    for k in 0..4 {
        let mut p = [a; 4];
        p[k] = b;
        rule.bary.push(p);
        rule.weights.push(w);
    }
}

fn push_s22(rule: &mut Rule, c: f64, w: f64) {
    let d = 0.5 - c;
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut p = [d; 4];
        p[i] = c;
        p[j] = c;
        rule.bary.push(p);
        rule.weights.push(w);
    }
}

/// The reference rule with `count` points for simplices of dimension `dim`.
pub fn rule(dim: usize, count: usize) -> Result<Rule> {
    if !supported_counts(dim).contains(&count) {
        return invalid(format!(
            "no {count}-point quadrature rule for dimension {dim}; supported counts are {:?}",
            supported_counts(dim)
        ));
    }
    let mut r = Rule {
        bary: vec![],
        weights: vec![],
    };
    match (dim, count) {
        (1, p) => {
            for (x, w) in gauss_legendre(p) {
                let t = 0.5 * (1.0 + x);
                r.bary.push([1.0 - t, t, 0.0, 0.0]);
                r.weights.push(0.5 * w);
            }
        }
        (d, 1) => {
            let c = 1.0 / (d + 1) as f64;
            let mut p = [0.0; 4];
            p[..=d].fill(c);
            r.bary.push(p);
            r.weights.push(1.0);
        }
        (2, 3) => push_s21(&mut r, 1.0 / 6.0, 1.0 / 3.0),
        (2, 7) => {
            let s = 15f64.sqrt();
            r.bary.push([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
            r.weights.push(9.0 / 40.0);
            push_s21(&mut r, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
            push_s21(&mut r, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
        }
        (3, 4) => push_s31(&mut r, (5.0 - 5f64.sqrt()) / 20.0, 0.25),
        (3, 15) => {
            r.bary.push([0.25; 4]);
            r.weights.push(0.181_702_068_582_535_05);
            push_s31(&mut r, 1.0 / 3.0, 81.0 / 2240.0);
            push_s31(&mut r, 1.0 / 11.0, 0.069_871_494_516_173_816);
            push_s22(&mut r, 0.066_550_153_573_664_298, 0.065_694_849_368_318_756);
        }
        _ => unreachable!(),
    }
    Ok(r)
}

/// A mesh paired with a per-element Gauss rule.
#[derive(Debug, Clone)]
pub struct Domain {
    pub mesh: Arc<Mesh>,
    pub gauss_count: usize,
    rule: Rule,
}

/// Global quadrature points, weights (element measure included) and the
/// element each point belongs to. Points are stored element by element.
#[derive(Debug, Clone)]
pub struct QuadratureSet {
    pub points: Vec<Point3>,
    pub weights: Vec<f64>,
    pub element_of: Vec<usize>,
}

impl QuadratureSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Pairs a mesh with the `gauss_count`-point rule of its dimension.
pub fn make_domain(mesh: Arc<Mesh>, gauss_count: usize) -> Result<Domain> {
    if mesh.is_empty() {
        return invalid("cannot build a quadrature domain on an empty mesh");
    }
    let rule = rule(mesh.dim(), gauss_count)?;
    Ok(Domain {
        mesh,
        gauss_count,
        rule,
    })
}

impl Domain {
    /// Domain with the one-point centroid rule.
    pub fn centroid(mesh: Arc<Mesh>) -> Result<Domain> {
        make_domain(mesh, 1)
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn len(&self) -> usize {
        self.mesh.n_elements() * self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn quadrature(&self) -> QuadratureSet {
        quadrature(self)
    }
}

/// Maps the reference rule onto every element.
pub fn quadrature(dom: &Domain) -> QuadratureSet {
    let mesh = &dom.mesh;
    let npe = mesh.nodes_per_element();
    let q = dom.rule.len();
    let m = mesh.n_elements() * q;
    let mut set = QuadratureSet {
        points: Vec::with_capacity(m),
        weights: Vec::with_capacity(m),
        element_of: Vec::with_capacity(m),
    };
    for e in 0..mesh.n_elements() {
        let p = mesh.element_points(e);
        let meas = mesh.measure(e);
        for (b, w) in dom.rule.bary.iter().zip(&dom.rule.weights) {
            let mut x = [0.0; 3];
            for k in 0..npe {
                for d in 0..3 {
                    x[d] += b[k] * p[k][d];
                }
            }
            set.points.push(x);
            set.weights.push(w * meas);
            set.element_of.push(e);
        }
    }
    set
}

/// `Σ ω_k f(x_k)` for a function evaluated on the whole point batch at once.
pub fn integrate<T, F>(dom: &Domain, f: F) -> Result<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
    F: Fn(&[Point3]) -> Vec<T>,
{
    let set = quadrature(dom);
    let vals = f(&set.points);
    if vals.len() != set.len() {
        return invalid(format!(
            "integrand returned {} values for {} quadrature points",
            vals.len(),
            set.len()
        ));
    }
    Ok(vals.iter().zip(&set.weights).map(|(&v, &w)| v * w).sum())
}
