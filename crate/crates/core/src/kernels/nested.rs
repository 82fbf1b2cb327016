//! Direct nested quadrature of the defining integrals (three dimensions only).
//!
//! `A` is integrated in polar coordinates about `x′` with the Gaussian cut at
//! `trunc_sigma·√t`. For `G_ij` the leading `D_{x_j}` is moved onto the heat
//! factor by parts, which leaves the integrable kernel `D_{x_i}E(x − z)`;
//! the tangential integral runs in polar coordinates about its singular
//! point and the `z_n` integral uses `z_n = x_n u²`.

use std::f64::consts::PI;

use super::{differentiate, DerivOrder, Evaluand, KernelStrategy, QuadratureConfig, SpaceTimePoint};
use crate::numerics::{integrate, Real, Tolerance};
use crate::{Error, Result};

pub struct Nested;

const FOUR_PI: f64 = 4.0 * PI;

fn check_dim(pt: &SpaceTimePoint) -> Result<()> {
    if pt.dim() != 3 {
        return Err(Error::Domain("the nested strategy is implemented for n = 3 only".into()));
    }
    Ok(())
}

enum Which {
    A,
    GradA(usize),
    G(usize, usize),
}

struct NestedEval<'a> {
    which: Which,
    cfg: &'a QuadratureConfig,
}

impl NestedEval<'_> {
    fn tol(&self) -> Tolerance {
        Tolerance::rel(self.cfg.rel_tol)
            .with_depth(self.cfg.max_depth)
            .with_abs(0.0)
    }

    fn a<S: Real>(&self, x_tan: &[S], x_n: S, t: S, grad: Option<usize>) -> Result<S> {
        let x0 = [x_tan[0].re(), x_tan[1].re()];
        let rmax = self.cfg.trunc_sigma * t.re().sqrt();
        let g0 = (t * FOUR_PI).powf(-1.5);
        let tol = self.tol();
        let radial = |rho: f64| -> Result<S> {
            let ang = |th: f64| -> Result<S> {
                let y = [x0[0] + rho * th.cos(), x0[1] + rho * th.sin()];
                let d0 = x_tan[0] - y[0];
                let d1 = x_tan[1] - y[1];
                let gauss = g0 * (-((d0 * d0 + d1 * d1) / (t * 4.0))).exp();
                let e = (x_n * x_n + (y[0] * y[0] + y[1] * y[1])).powf(-0.5) * (-1.0 / FOUR_PI);
                let mut v = gauss * e * rho;
                if let Some(j) = grad {
                    let dj = if j == 1 { d0 } else { d1 };
                    v = v * (-(dj / (t * 2.0)));
                }
                Ok(v)
            };
            Ok(integrate(ang, 0.0, 2.0 * PI, tol)?.0)
        };
        Ok(integrate(radial, 0.0, rmax, tol)?.0)
    }

    fn g<S: Real>(&self, i: usize, j: usize, x_tan: &[S], x_n: S, t: S) -> Result<S> {
        let tol = self.tol();
        let xr = (x_tan[0].re().powi(2) + x_tan[1].re().powi(2)).sqrt();
        let rmax = xr + self.cfg.trunc_sigma * t.re().sqrt();
        let g0 = (t * FOUR_PI).powf(-1.5);
        let outer = |u: f64| -> Result<S> {
            let z_n = x_n * (u * u);
            let h = x_n * (1.0 - u * u);
            let hr = h.re();
            let inner = |rho: f64| -> Result<S> {
                let ang = |th: f64| -> Result<S> {
                    let (c, s) = (th.cos(), th.sin());
                    let z0 = x_tan[0] - rho * c;
                    let z1 = x_tan[1] - rho * s;
                    let gauss = g0 * (-((z0 * z0 + z1 * z1 + z_n * z_n) / (t * 4.0))).exp();
                    let zj = if j == 1 { z0 } else { z1 };
                    let dd_gamma = zj * z_n / (t * t * 4.0) * gauss;
                    let w2 = h * h + rho * rho;
                    let wi = match i {
                        1 => S::cst(rho * c),
                        2 => S::cst(rho * s),
                        _ => h,
                    };
                    let de = wi * w2.powf(-1.5) / FOUR_PI;
                    Ok(dd_gamma * de * rho)
                };
                Ok(integrate(ang, 0.0, 2.0 * PI, tol)?.0)
            };
            let split = hr.min(rmax);
            let (mut v, _) = integrate(inner, 0.0, split, tol)?;
            if split < rmax {
                let logged = |s: f64| -> Result<S> {
                    let rho = s.exp();
                    Ok(inner(rho)? * rho)
                };
                v += integrate(logged, split.ln(), rmax.ln(), tol)?.0;
            }
            Ok(v * x_n * (2.0 * u))
        };
        Ok(integrate(outer, 0.0, 1.0, tol)?.0)
    }
}

impl Evaluand for NestedEval<'_> {
    fn eval<S: Real>(&self, x_tan: &[S], x_n: S, t: S) -> Result<S> {
        match self.which {
            Which::A => self.a(x_tan, x_n, t, None),
            Which::GradA(j) => self.a(x_tan, x_n, t, Some(j)),
            Which::G(i, j) => self.g(i, j, x_tan, x_n, t),
        }
    }
}

impl KernelStrategy for Nested {
    fn name(&self) -> &'static str {
        "nested"
    }

    fn poisson_heat_a(&self, pt: &SpaceTimePoint, d: DerivOrder, cfg: &QuadratureConfig) -> Result<f64> {
        check_dim(pt)?;
        differentiate(&NestedEval { which: Which::A, cfg }, pt, d)
    }

    fn poisson_heat_a_grad(
        &self,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        check_dim(pt)?;
        differentiate(&NestedEval { which: Which::GradA(j), cfg }, pt, d)
    }

    fn g_kernel(
        &self,
        i: usize,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        check_dim(pt)?;
        differentiate(&NestedEval { which: Which::G(i, j), cfg }, pt, d)
    }
}
