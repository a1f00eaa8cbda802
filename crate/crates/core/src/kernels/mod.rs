//! Green kernels of the Laplace and Helmholtz equations, without the
//! `1/(4π)` factor, and closed-form integrals of `1/r` over flat triangles.

mod analytic;

pub use analytic::{analytic_triangle_integrals, TriangleIntegrals};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, BBox, Point3};

/// Radial part of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radial {
    /// `1/r`
    Laplace,
    /// `exp(ikr)/r`
    Helmholtz(f64),
}

/// Which function of the radial part is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Value,
    /// One component (0, 1 or 2) of the gradient in `y`.
    GradComponent(usize),
    /// All three components of the gradient in `y`.
    Grad,
}

/// A two-point kernel `G(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub radial: Radial,
    pub part: Part,
}

/// Relative guard below which two points count as coincident.
pub const SINGULAR_GUARD: f64 = 1e-12;

impl Kernel {
    /// Parses `"[exp(ikr)/r]"`, `"[1/r]"` and their gradients `"grady[...]j"`
    /// (`j` in 1..=3, or omitted for the vector of all three components).
    pub fn parse(name: &str, k: f64) -> Result<Kernel> {
        let name = name.trim();
        let (grad, rest) = match name.strip_prefix("grady") {
            Some(r) => (true, r),
            None => (false, name),
        };
        let close = rest
            .find(']')
            .ok_or_else(|| Error::InvalidArgument(format!("unknown kernel '{name}'")))?;
        let (base, suffix) = rest.split_at(close + 1);
        let radial = match base {
            "[1/r]" => Radial::Laplace,
            "[exp(ikr)/r]" => {
                if !k.is_finite() {
                    return invalid(format!("wavenumber must be finite, got {k}"));
                }
                Radial::Helmholtz(k)
            }
            _ => return invalid(format!("unknown kernel '{name}'")),
        };
        let part = match (grad, suffix) {
            (false, "") => Part::Value,
            (true, "") => Part::Grad,
            (true, "1") => Part::GradComponent(0),
            (true, "2") => Part::GradComponent(1),
            (true, "3") => Part::GradComponent(2),
            _ => return invalid(format!("unknown kernel '{name}'")),
        };
        Ok(Kernel { radial, part })
    }

    pub fn helmholtz(k: f64) -> Kernel {
        Kernel {
            radial: Radial::Helmholtz(k),
            part: Part::Value,
        }
    }

    pub fn laplace() -> Kernel {
        Kernel {
            radial: Radial::Laplace,
            part: Part::Value,
        }
    }

    pub fn grad(self) -> Kernel {
        Kernel {
            part: Part::Grad,
            ..self
        }
    }

    pub fn ncomps(&self) -> usize {
        match self.part {
            Part::Grad => 3,
            _ => 1,
        }
    }

    /// Kernel values for `r > 0`, written to `out[..ncomps]`.
    #[inline]
    pub fn eval_into(&self, x: &Point3, y: &Point3, out: &mut [Complex64]) {
        let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let r = r2.sqrt();
        let inv_r = 1.0 / r;
        match (self.radial, self.part) {
            (Radial::Laplace, Part::Value) => out[0] = Complex64::new(inv_r, 0.0),
            (Radial::Helmholtz(k), Part::Value) => {
                let (s, c) = (k * r).sin_cos();
                out[0] = Complex64::new(c * inv_r, s * inv_r);
            }
            (radial, part) => {
                // d/dy_j G = g(r) (y_j - x_j)
                let g = match radial {
                    Radial::Laplace => Complex64::new(-inv_r * inv_r * inv_r, 0.0),
                    Radial::Helmholtz(k) => {
                        let (s, c) = (k * r).sin_cos();
                        Complex64::new(c, s) * Complex64::new(-1.0, k * r) * (inv_r * inv_r * inv_r)
                    }
                };
                match part {
                    Part::GradComponent(j) => out[0] = g * d[j],
                    _ => {
                        out[0] = g * d[0];
                        out[1] = g * d[1];
                        out[2] = g * d[2];
                    }
                }
            }
        }
    }

    /// Value for a pair, with coincident points (closer than `eps`) mapped to zero.
    #[inline]
    pub fn eval_masked(&self, x: &Point3, y: &Point3, eps: f64, out: &mut [Complex64]) {
        let r = geometry::dist(*x, *y);
        if r < eps {
            out[..self.ncomps()].fill(Complex64::new(0.0, 0.0));
        } else {
            self.eval_into(x, y, out);
        }
    }

    /// Dense `Nx × Ny` matrices, one per component. Coincident pairs are an error.
    pub fn evaluate(&self, xs: &[Point3], ys: &[Point3]) -> Result<Vec<Mat<Complex64>>> {
        let eps = guard(xs, ys);
        let nc = self.ncomps();
        let mut out = vec![Mat::<Complex64>::zeros(xs.len(), ys.len()); nc];
        let mut v = [Complex64::new(0.0, 0.0); 3];
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                let r = geometry::dist(*x, *y);
                if r < eps {
                    return Err(Error::SingularEvaluation {
                        row: i,
                        col: j,
                        distance: r,
                    });
                }
                self.eval_into(x, y, &mut v);
                for c in 0..nc {
                    out[c][(i, j)] = v[c];
                }
            }
        }
        Ok(out)
    }
}

/// Coincidence threshold `1e-12` times the diameter of the combined point cloud.
pub fn guard(xs: &[Point3], ys: &[Point3]) -> f64 {
    let mut b = BBox::from_points(xs);
    b.merge(&BBox::from_points(ys));
    SINGULAR_GUARD * b.diameter()
}

/// Shorthand for [`Kernel::parse`].
pub fn green_kernel(name: &str, k: f64) -> Result<Kernel> {
    Kernel::parse(name, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!(Kernel::parse("[1/r]", 0.0).unwrap(), Kernel::laplace());
        assert_eq!(Kernel::parse("[exp(ikr)/r]", 2.0).unwrap(), Kernel::helmholtz(2.0));
        assert_eq!(
            Kernel::parse("grady[exp(ikr)/r]2", 2.0).unwrap().part,
            Part::GradComponent(1)
        );
        assert_eq!(Kernel::parse("grady[1/r]", 0.0).unwrap().ncomps(), 3);
        assert!(Kernel::parse("grady[1/r]4", 0.0).is_err());
        assert!(Kernel::parse("[log(r)]", 0.0).is_err());
    }

    #[test]
    fn values() {
        let one = Kernel::laplace().evaluate(&[[0.0; 3]], &[[0.0, 2.0, 0.0]]).unwrap();
        assert_eq!(one[0][(0, 0)], Complex64::new(0.5, 0.0));
        let g = Kernel::parse("grady[1/r]", 0.0)
            .unwrap()
            .evaluate(&[[0.0; 3]], &[[0.0, 0.0, 1.0]])
            .unwrap();
        assert_eq!([g[0][(0, 0)].re, g[1][(0, 0)].re, g[2][(0, 0)].re], [0.0, 0.0, -1.0]);
        let xs = [[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        let ys = [[2.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.3, 0.3, 0.3]];
        let h0 = Kernel::helmholtz(0.0).evaluate(&xs, &ys).unwrap();
        let l = Kernel::laplace().evaluate(&xs, &ys).unwrap();
        assert_eq!(h0[0], l[0]);
    }

    #[test]
    fn coincident_pair_is_an_error() {
        match Kernel::helmholtz(1.0).evaluate(&[[1.0, 0.0, 0.0]], &[[0.0; 3], [1.0, 0.0, 0.0]]) {
            Err(Error::SingularEvaluation { row: 0, col: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reciprocity() {
        let xs = [[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        let ys = [[2.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.3, 0.3, 0.3]];
        let k = Kernel::helmholtz(3.0);
        let a = k.evaluate(&xs, &ys).unwrap();
        let b = k.evaluate(&ys, &xs).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((a[0][(i, j)] - b[0][(j, i)]).norm() <= 1e-14 * a[0][(i, j)].norm());
            }
        }
    }
}
