//! Kernels through Gaussian subordination of the Laplace kernel.
//!
//! With `ν = (n−2)/2`,
//!
//! ```text
//! E(x) = ∫_0^∞ w(σ) e^{−σ|x|²} dσ,   w(σ) = −c_n σ^{ν−1} / Γ(ν),
//! ```
//!
//! so every tangential heat convolution becomes a Gaussian convolution with
//! a closed form, and the `z_n` integral in `G_ij` reduces to truncated
//! Gaussian moments. What is left is a single integral over `v = ln σ`.

use std::f64::consts::PI;

use super::{differentiate, DerivOrder, Evaluand, KernelStrategy, QuadratureConfig, SpaceTimePoint};
use crate::numerics::special::{gamma, laplace_constant};
use crate::numerics::{integrate, Real};
use crate::Result;

pub struct Subordination;

/// `w(σ)·σ`, the weight per unit of `v = ln σ`.
pub(crate) fn sigma_weight(n: usize, sigma: f64) -> f64 {
    let nu = (n as f64 - 2.0) / 2.0;
    -laplace_constant(n) * sigma.powf(nu) / gamma(nu)
}

/// Integration window in `v`, as `(σ scale, v_lo, v_hi)` with `σ = scale·e^v`.
///
/// `r2` is the largest squared distance of interest, `small2` the smallest
/// squared length scale (normal distance or time).
pub(crate) fn sigma_window(r2: f64, small2: f64, t: f64) -> (f64, f64, f64) {
    let s0 = 1.0 / (r2 + t);
    let smax = 1.0 / small2.min(t);
    (s0, -70.0, (smax / s0).ln() + 40.0)
}

/// `Q(σ, x′, t) = (1+4σt)^{−(n−1)/2} exp(−σ|x′|²/(1+4σt))` and `q = σ/(1+4σt)`.
#[inline]
pub(crate) fn tangential_gaussian<S: Real>(x_tan: &[S], t: S, sigma: f64) -> (S, S) {
    let m = x_tan.len() as f64;
    let s = t * (4.0 * sigma) + 1.0;
    let q = s.recip() * sigma;
    let mut r2 = S::cst(0.0);
    for &v in x_tan {
        r2 += v * v;
    }
    (s.powf(-m / 2.0) * (-(q * r2)).exp(), q)
}

/// The normal profiles
///
/// ```text
/// P0 = ∫_0^{x_n} ∂_zγ(z,t) e^{−σ(x_n−z)²} dz
/// P1 = ∫_0^{x_n} ∂_zγ(z,t) (−2σ(x_n−z)) e^{−σ(x_n−z)²} dz
/// ```
///
/// with `γ` the one-dimensional heat kernel, in closed form.
pub(crate) fn normal_profiles<S: Real>(x_n: S, t: S, sigma: f64) -> (S, S) {
    let st = t * (4.0 * sigma);
    let s = st + 1.0;
    let a = s / (t * 4.0);
    let m = st * x_n / s;
    let b = x_n / s;
    let sa = a.sqrt();
    let xn2 = x_n * x_n;
    let e_lo = (-(xn2 * sigma)).exp();
    let e_hi = (-(xn2 / (t * 4.0))).exp();
    let ec = (-(xn2 * sigma / s)).exp();
    let m0 = ec * sa.recip() * (PI.sqrt() / 2.0) * ((sa * b).erf() + (sa * m).erf());
    let inv2a = (a * 2.0).recip();
    let m1 = -(e_hi - e_lo) * inv2a;
    let m2 = -(b * e_hi + m * e_lo) * inv2a + m0 * inv2a;
    let g0 = (t * (4.0 * PI)).powf(-0.5);
    let p0 = -(g0 / (t * 2.0)) * (m1 + m * m0);
    let p1 = g0 * sigma / t * (-m2 + (b - m) * m1 + m * b * m0);
    (p0, p1)
}

fn a_integrand<S: Real>(x_tan: &[S], x_n: S, t: S, sigma: f64, grad: Option<usize>) -> S {
    let n = x_tan.len() + 1;
    let (q_g, q) = tangential_gaussian(x_tan, t, sigma);
    let g0 = (t * (4.0 * PI)).powf(-0.5);
    let mut v = q_g * g0 * (-(x_n * x_n * sigma)).exp() * sigma_weight(n, sigma);
    if let Some(j) = grad {
        v = v * (q * x_tan[j - 1] * -2.0);
    }
    v
}

fn g_integrand<S: Real>(i: usize, j: usize, x_tan: &[S], x_n: S, t: S, sigma: f64) -> S {
    let n = x_tan.len() + 1;
    let (q_g, q) = tangential_gaussian(x_tan, t, sigma);
    let (p0, p1) = normal_profiles(x_n, t, sigma);
    let w = sigma_weight(n, sigma);
    if i < n {
        let mut tang = q * q * x_tan[i - 1] * x_tan[j - 1] * 4.0;
        if i == j {
            tang -= q * 2.0;
        }
        tang * q_g * p0 * w
    } else {
        q * x_tan[j - 1] * q_g * p1 * (-2.0 * w)
    }
}

enum Which {
    A,
    GradA(usize),
    G(usize, usize),
}

struct SubEval<'a> {
    which: Which,
    cfg: &'a QuadratureConfig,
}

impl Evaluand for SubEval<'_> {
    fn eval<S: Real>(&self, x_tan: &[S], x_n: S, t: S) -> Result<S> {
        let r2: f64 = x_tan.iter().map(|v| v.re() * v.re()).sum::<f64>() + x_n.re() * x_n.re();
        let (s0, lo, hi) = sigma_window(r2, x_n.re() * x_n.re(), t.re());
        let f = |v: f64| -> Result<S> {
            let sigma = s0 * v.exp();
            Ok(match self.which {
                Which::A => a_integrand(x_tan, x_n, t, sigma, None),
                Which::GradA(j) => a_integrand(x_tan, x_n, t, sigma, Some(j)),
                Which::G(i, j) => g_integrand(i, j, x_tan, x_n, t, sigma),
            })
        };
        Ok(integrate(f, lo, hi, self.cfg.tolerance())?.0)
    }
}

impl KernelStrategy for Subordination {
    fn name(&self) -> &'static str {
        "subordination"
    }

    fn poisson_heat_a(&self, pt: &SpaceTimePoint, d: DerivOrder, cfg: &QuadratureConfig) -> Result<f64> {
        differentiate(&SubEval { which: Which::A, cfg }, pt, d)
    }

    fn poisson_heat_a_grad(
        &self,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        differentiate(&SubEval { which: Which::GradA(j), cfg }, pt, d)
    }

    fn g_kernel(
        &self,
        i: usize,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        differentiate(&SubEval { which: Which::G(i, j), cfg }, pt, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{GaussLegendre, Tolerance};

    #[test]
    fn subordination_reproduces_laplace_kernel() {
        // ∫ w(σ) e^{−σ|x|²} dσ = E(x)
        for n in [3usize, 4, 5] {
            let r2: f64 = 1.7;
            let (s0, lo, hi) = sigma_window(r2, r2, 1.0);
            let (v, _) = integrate(
                |v: f64| {
                    let s = s0 * v.exp();
                    Ok(sigma_weight(n, s) * (-s * r2).exp())
                },
                lo,
                hi,
                Tolerance::rel(1e-12),
            )
            .unwrap();
            let e = -laplace_constant(n) * r2.powf(1.0 - n as f64 / 2.0);
            assert!((v - e).abs() < 1e-10 * e.abs(), "n = {n}: {v} vs {e}");
        }
    }

    #[test]
    fn normal_profiles_match_direct_quadrature() {
        let gl = GaussLegendre::new(64);
        for &(xn, t, sigma) in &[(0.7, 0.3, 2.0), (0.1, 1.0, 50.0), (2.0, 0.05, 0.01), (0.5, 0.5, 1e3)] {
            let g1 = |z: f64| -z / (2.0 * t) * (4.0 * PI * t).powf(-0.5) * (-z * z / (4.0 * t)).exp();
            let mut d0 = 0.0;
            let mut d1 = 0.0;
            let panels = 16;
            for k in 0..panels {
                let a = xn * k as f64 / panels as f64;
                let b = xn * (k + 1) as f64 / panels as f64;
                d0 += gl.integrate(|z| g1(z) * (-sigma * (xn - z).powi(2)).exp(), a, b);
                d1 += gl.integrate(
                    |z| g1(z) * (-2.0 * sigma * (xn - z)) * (-sigma * (xn - z).powi(2)).exp(),
                    a,
                    b,
                );
            }
            let (p0, p1) = normal_profiles(xn, t, sigma);
            assert!((p0 - d0).abs() < 1e-11 * d0.abs().max(1e-300), "{p0} vs {d0}");
            assert!((p1 - d1).abs() < 1e-10 * d1.abs().max(1e-300), "{p1} vs {d1}");
        }
    }
}
