//! Kernels of the half-space Stokes layer potential.
//!
//! Conventions: `n ≥ 3` is the spatial dimension, the last coordinate is the
//! normal one, `Γ` is the heat kernel of `∂_t − Δ`, and `E` the fundamental
//! solution of the Laplacian normalized by `ΔE = δ`. Component indices
//! (`i`, `j`, and the tangential direction of a [`DerivOrder`]) are 1-based,
//! following the usual numbering `1..=n`.
//!
//! The kernels involving `A` and `G_ij` are computed by a [`KernelStrategy`]
//! picked from a [`KernelRegistry`] by name.

mod fd;
mod nested;
pub(crate) mod subordination;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::special::laplace_constant;
use crate::numerics::{Jet, Real, Tolerance};
use crate::{Error, Result};

pub use fd::FiniteDifference;
pub use nested::Nested;
pub use subordination::Subordination;

/// Evaluation point `(x′, x_n, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x_tan: Vec<f64>,
    pub x_n: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x_tan: Vec<f64>, x_n: f64, t: f64) -> Self {
        SpaceTimePoint { x_tan, x_n, t }
    }

    pub fn dim(&self) -> usize {
        self.x_tan.len() + 1
    }

    /// `|x|²` including the normal coordinate.
    pub fn norm2(&self) -> f64 {
        self.tan_norm2() + self.x_n * self.x_n
    }

    pub fn tan_norm2(&self) -> f64 {
        self.x_tan.iter().map(|v| v * v).sum()
    }

    /// The parabolically dilated point `(λx, λ²t)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        SpaceTimePoint {
            x_tan: self.x_tan.iter().map(|v| v * lambda).collect(),
            x_n: self.x_n * lambda,
            t: self.t * lambda * lambda,
        }
    }

    /// Full spatial vector `(x′, x_n)`.
    pub fn spatial(&self) -> Vec<f64> {
        let mut v = self.x_tan.clone();
        v.push(self.x_n);
        v
    }

    pub fn check_interior(&self) -> Result<()> {
        if !(self.x_n > 0.0 && self.t > 0.0) || self.x_tan.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "interior evaluation needs x_n > 0 and t > 0 (x_n = {}, t = {})",
                self.x_n, self.t
            )));
        }
        if self.dim() < 3 {
            return Err(Error::Domain(format!("dimension {} < 3", self.dim())));
        }
        Ok(())
    }
}

/// Derivative request `D_{x_n}^{l0} D_{x_dir}^{k0} D_t^{m0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DerivOrder {
    pub l0: u8,
    pub k0: u8,
    /// Tangential direction (1-based) of the `k0` derivatives.
    pub dir: u8,
    pub m0: u8,
}

impl Default for DerivOrder {
    fn default() -> Self {
        DerivOrder::ZERO
    }
}

impl DerivOrder {
    pub const ZERO: DerivOrder = DerivOrder {
        l0: 0,
        k0: 0,
        dir: 1,
        m0: 0,
    };

    pub fn new(l0: u8, k0: u8, m0: u8) -> Self {
        DerivOrder { l0, k0, dir: 1, m0 }
    }

    pub fn along(mut self, dir: u8) -> Self {
        self.dir = dir;
        self
    }

    /// Parabolic weight `l0 + k0 + 2 m0`.
    pub fn weight(&self) -> u32 {
        self.l0 as u32 + self.k0 as u32 + 2 * self.m0 as u32
    }

    /// Number of plain partial derivatives.
    pub fn count(&self) -> u32 {
        self.l0 as u32 + self.k0 as u32 + self.m0 as u32
    }

    pub fn spatial(&self) -> u32 {
        self.l0 as u32 + self.k0 as u32
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.weight() > 3 {
            return Err(Error::UnsupportedOrder(format!(
                "{self}: l0 + k0 + 2 m0 = {} > 3",
                self.weight()
            )));
        }
        if self.k0 > 0 && (self.dir == 0 || self.dir as usize > n - 1) {
            return Err(Error::UnsupportedOrder(format!(
                "{self}: tangential direction must lie in 1..={}",
                n - 1
            )));
        }
        Ok(())
    }

    /// Jet seeds `(normal, tangential, time)`; each derivative gets its own direction bit.
    pub fn seeds(&self) -> (u8, u8, u8) {
        let mut bit = 0u8;
        let mut take = |k: u8| {
            let mut m = 0u8;
            for _ in 0..k {
                m |= 1 << bit;
                bit += 1;
            }
            m
        };
        let n = take(self.l0);
        let k = take(self.k0);
        let t = take(self.m0);
        (n, k, t)
    }

    pub fn mask(&self) -> u8 {
        let (a, b, c) = self.seeds();
        a | b | c
    }
}

impl std::fmt::Display for DerivOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "l{}k{}m{}", self.l0, self.k0, self.m0)?;
        if self.k0 > 0 && self.dir != 1 {
            write!(f, "d{}", self.dir)?;
        }
        Ok(())
    }
}

/// Inverse of the `Display` form: `l1k0m0`, `l0k2m0d2`.
impl std::str::FromStr for DerivOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnsupportedOrder(format!("cannot parse order `{s}` (expected e.g. l1k0m0 or l0k1m0d2)"));
        let mut out = DerivOrder::ZERO;
        let mut rest = s.trim();
        for (tag, slot) in [('l', 0), ('k', 1), ('m', 2), ('d', 3)] {
            let Some(r) = rest.strip_prefix(tag) else {
                if tag == 'd' {
                    break;
                }
                return Err(bad());
            };
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            let v: u8 = r[..end].parse().map_err(|_| bad())?;
            match slot {
                0 => out.l0 = v,
                1 => out.k0 = v,
                2 => out.m0 = v,
                _ => out.dir = v,
            }
            rest = &r[end..];
        }
        if !rest.is_empty() {
            return Err(bad());
        }
        Ok(out)
    }
}

/// Every order with `l0 + k0 + 2 m0 ≤ 3` (tangential direction 1).
pub fn all_orders() -> Vec<DerivOrder> {
    let mut v = Vec::new();
    for m0 in 0..=1u8 {
        for l0 in 0..=3u8 {
            for k0 in 0..=3u8 {
                let d = DerivOrder::new(l0, k0, m0);
                if d.weight() <= 3 {
                    v.push(d);
                }
            }
        }
    }
    v.sort_by_key(|d| (d.weight(), d.m0, std::cmp::Reverse(d.l0)));
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Target relative quadrature error.
    pub rel_tol: f64,
    /// Gaussian truncation radius in units of `√t`.
    pub trunc_sigma: f64,
    /// Adaptive bisection depth cap.
    pub max_depth: u32,
    /// Spatial dimension `n`.
    pub dim: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            trunc_sigma: 8.0,
            max_depth: 40,
            dim: 3,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::param("rel_tol", "must lie in (0, 1e-2]"));
        }
        if !(self.trunc_sigma >= 6.0) {
            return Err(Error::param("trunc_sigma", "must be at least 6"));
        }
        if self.dim < 3 {
            return Err(Error::param("dim", "must be at least 3"));
        }
        if self.max_depth == 0 {
            return Err(Error::param("max_depth", "must be positive"));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance::rel(self.rel_tol).with_depth(self.max_depth)
    }
}

/// Something that can be evaluated on plain or jet arguments.
pub(crate) trait Evaluand {
    fn eval<S: Real>(&self, x_tan: &[S], x_n: S, t: S) -> Result<S>;
}

/// Apply `D^d` to an [`Evaluand`] by jet seeding.
pub(crate) fn differentiate<E: Evaluand>(e: &E, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
    if d.count() == 0 {
        return e.eval::<f64>(&pt.x_tan, pt.x_n, pt.t);
    }
    let (sn, sk, st) = d.seeds();
    let xt: Vec<Jet> = pt
        .x_tan
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if d.k0 > 0 && k + 1 == d.dir as usize {
                Jet::var(v, sk)
            } else {
                Jet::constant(v)
            }
        })
        .collect();
    let v = e.eval::<Jet>(&xt, Jet::var(pt.x_n, sn), Jet::var(pt.t, st))?;
    Ok(v.part(d.mask()))
}

fn gamma_generic<S: Real>(x_tan: &[S], x_n: S, t: S) -> S {
    let n = x_tan.len() + 1;
    let mut r2 = x_n * x_n;
    for &v in x_tan {
        r2 += v * v;
    }
    (t * (4.0 * PI)).powf(-(n as f64) / 2.0) * (-(r2 / (t * 4.0))).exp()
}

fn laplace_generic<S: Real>(x: &[S]) -> S {
    let n = x.len();
    let mut r2 = S::cst(0.0);
    for &v in x {
        r2 += v * v;
    }
    r2.powf(1.0 - n as f64 / 2.0) * (-laplace_constant(n))
}

struct HeatEval;

impl Evaluand for HeatEval {
    fn eval<S: Real>(&self, x_tan: &[S], x_n: S, t: S) -> Result<S> {
        Ok(gamma_generic(x_tan, x_n, t))
    }
}

/// `D^d Γ(x, t)` for a full-space point `x = (x′, x_n)`.
pub fn heat_kernel(x: &[f64], t: f64, d: DerivOrder) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    if x.len() < 2 {
        return Err(Error::Domain("heat kernel needs at least two coordinates".into()));
    }
    d.validate(x.len())?;
    let pt = SpaceTimePoint::new(x[..x.len() - 1].to_vec(), x[x.len() - 1], t);
    differentiate(&HeatEval, &pt, d)
}

struct LaplaceEval;

impl Evaluand for LaplaceEval {
    fn eval<S: Real>(&self, x_tan: &[S], x_n: S, _t: S) -> Result<S> {
        let mut x = x_tan.to_vec();
        x.push(x_n);
        Ok(laplace_generic(&x))
    }
}

/// `D^d E(x)` with `E = −((n−2)σ_{n−1})^{-1} |x|^{2−n}`; `d.m0` must be zero.
pub fn laplace_fundamental(x: &[f64], d: DerivOrder) -> Result<f64> {
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::Singularity);
    }
    if x.len() < 3 {
        return Err(Error::Domain("the Laplace kernel is implemented for n ≥ 3".into()));
    }
    if d.m0 > 0 || d.count() > 3 {
        return Err(Error::UnsupportedOrder(format!("{d} for the Laplace kernel")));
    }
    d.validate(x.len())?;
    let pt = SpaceTimePoint::new(x[..x.len() - 1].to_vec(), x[x.len() - 1], 1.0);
    differentiate(&LaplaceEval, &pt, d)
}

/// Instantaneous (δ(t)) part of the pressure kernel, `−2 ∂²E/∂x_j∂x_n`.
pub fn pressure_instantaneous(j: usize, x: &[f64]) -> Result<f64> {
    let n = x.len();
    check_tangential(j, n)?;
    let d = DerivOrder::new(1, 1, 0).along(j as u8);
    Ok(-2.0 * laplace_fundamental(x, d)?)
}

fn check_tangential(j: usize, n: usize) -> Result<()> {
    if j == 0 || j >= n {
        return Err(Error::param("j", format!("tangential index must lie in 1..={}", n - 1)));
    }
    Ok(())
}

fn check_component(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::param("i", format!("component index must lie in 1..={n}")));
    }
    Ok(())
}

/// An evaluation route for the quadrature-defined kernels `A`, `∂_j A` and `G_ij`.
pub trait KernelStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// `D^d A(x, t)`.
    fn poisson_heat_a(&self, pt: &SpaceTimePoint, d: DerivOrder, cfg: &QuadratureConfig) -> Result<f64>;

    /// `D^d ∂_{x_j} A(x, t)`.
    fn poisson_heat_a_grad(
        &self,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64>;

    /// `D^d G_ij(x, t)`.
    fn g_kernel(
        &self,
        i: usize,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64>;
}

/// Named kernel strategies.
#[derive(Clone)]
pub struct KernelRegistry {
    entries: BTreeMap<String, Arc<dyn KernelStrategy>>,
}

impl KernelRegistry {
    pub fn empty() -> Self {
        KernelRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// Registry holding `subordination`, `nested` and `finite-difference`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Subordination));
        r.register(Arc::new(Nested));
        r.register(Arc::new(FiniteDifference::new(Arc::new(Subordination))));
        r
    }

    pub fn register(&mut self, s: Arc<dyn KernelStrategy>) {
        self.entries.insert(s.name().to_string(), s);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn KernelStrategy>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::param(
                "kernel_strategy",
                format!("unknown strategy `{name}` (known: {})", self.names().join(", ")),
            )
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

/// Which kernel a homogeneity exponent refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Heat,
    A,
    G,
    K,
    PressureSmooth,
}

/// Exponent `ν` with `λ^ν F(λx, λ²t) = F(x, t)` for `D^d F`.
pub fn homogeneity_exponent(kind: KernelKind, n: usize, d: DerivOrder) -> i32 {
    let base = match kind {
        KernelKind::Heat => n as i32,
        KernelKind::A => n as i32 - 1,
        KernelKind::G | KernelKind::K => n as i32 + 1,
        KernelKind::PressureSmooth => n as i32 + 2,
    };
    base + d.weight() as i32
}

/// Kernel evaluation front end bound to a configuration and a strategy.
#[derive(Clone)]
pub struct KernelEvaluator {
    pub cfg: QuadratureConfig,
    strategy: Arc<dyn KernelStrategy>,
}

impl std::fmt::Debug for KernelEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelEvaluator")
            .field("cfg", &self.cfg)
            .field("strategy", &self.strategy.name())
            .finish()
    }
}

impl KernelEvaluator {
    pub fn new(cfg: QuadratureConfig) -> Result<Self> {
        Self::with_strategy(cfg, Arc::new(Subordination))
    }

    pub fn with_strategy(cfg: QuadratureConfig, strategy: Arc<dyn KernelStrategy>) -> Result<Self> {
        cfg.validate()?;
        Ok(KernelEvaluator { cfg, strategy })
    }

    pub fn named(cfg: QuadratureConfig, name: &str) -> Result<Self> {
        Self::with_strategy(cfg, KernelRegistry::with_builtins().get(name)?)
    }

    pub fn strategy_name(&self) -> &'static str {
        self.strategy.name()
    }

    fn check(&self, pt: &SpaceTimePoint, d: DerivOrder) -> Result<()> {
        pt.check_interior()?;
        if pt.dim() != self.cfg.dim {
            return Err(Error::Domain(format!(
                "point has dimension {}, configuration expects {}",
                pt.dim(),
                self.cfg.dim
            )));
        }
        d.validate(pt.dim())
    }

    pub fn poisson_heat_a(&self, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        self.check(pt, d)?;
        self.strategy.poisson_heat_a(pt, d, &self.cfg)
    }

    pub fn g_kernel(&self, i: usize, j: usize, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        self.check(pt, d)?;
        check_component(i, pt.dim())?;
        check_tangential(j, pt.dim())?;
        self.strategy.g_kernel(i, j, pt, d, &self.cfg)
    }

    /// `D^d K_ij = −2δ_ij D^d D_{x_n}Γ + 4 D^d G_ij`.
    pub fn k_kernel(&self, i: usize, j: usize, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        let g = self.g_kernel(i, j, pt, d)?;
        let mut k = 4.0 * g;
        if i == j {
            k -= 2.0 * normal_heat_derivative(pt, d)?;
        }
        Ok(k)
    }

    /// Smooth part `4 ∂_j ∂²_{x_n} A + 4 ∂_t ∂_j A` of the pressure kernel for `t > 0`.
    ///
    /// Since `A` is harmonic in `x` for `x_n > 0` and `∂_t A = −A/(2t) + Δ′A`,
    /// this equals `−(2/t) ∂_j A`, which is what gets evaluated.
    pub fn pressure_kernel_smooth(&self, j: usize, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        self.check(pt, d)?;
        check_tangential(j, pt.dim())?;
        let t = pt.t;
        let grad = |dd: DerivOrder| self.strategy.poisson_heat_a_grad(j, pt, dd, &self.cfg);
        match d.m0 {
            0 => Ok(-2.0 / t * grad(d)?),
            1 => {
                let base = DerivOrder { m0: 0, ..d };
                Ok(-2.0 * (-grad(base)? / (t * t) + grad(d)? / t))
            }
            _ => Err(Error::UnsupportedOrder(d.to_string())),
        }
    }

    pub fn pressure_instantaneous(&self, j: usize, x: &[f64]) -> Result<f64> {
        pressure_instantaneous(j, x)
    }

    /// `|D^d K_ij| · t^{m0+1/2} (|x|²+t)^{(n+k0)/2} (x_n²+t)^{l0/2}`.
    pub fn kernel_bound_ratio(&self, i: usize, j: usize, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        let k = self.k_kernel(i, j, pt, d)?;
        if k == 0.0 {
            return Ok(0.0);
        }
        Ok(k.abs() * k_bound_weight(pt, d))
    }

    /// `|D^d A| · t^{m0+1/2} (|x|²+t)^{(n−2+l0+k0)/2}`.
    pub fn a_bound_ratio(&self, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        let a = self.poisson_heat_a(pt, d)?;
        let n = pt.dim() as f64;
        Ok(a.abs()
            * pt.t.powf(d.m0 as f64 + 0.5)
            * (pt.norm2() + pt.t).powf((n - 2.0 + d.spatial() as f64) / 2.0))
    }
}

/// Reciprocal of the structural bound on `D^d K_ij`.
pub fn k_bound_weight(pt: &SpaceTimePoint, d: DerivOrder) -> f64 {
    let n = pt.dim() as f64;
    pt.t.powf(d.m0 as f64 + 0.5)
        * (pt.norm2() + pt.t).powf((n + d.k0 as f64) / 2.0)
        * (pt.x_n * pt.x_n + pt.t).powf(d.l0 as f64 / 2.0)
}

/// `D^d D_{x_n} Γ` at an interior point.
pub fn normal_heat_derivative(pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
    struct DnGamma;
    impl Evaluand for DnGamma {
        fn eval<S: Real>(&self, x_tan: &[S], x_n: S, t: S) -> Result<S> {
            Ok(-(x_n / (t * 2.0)) * gamma_generic(x_tan, x_n, t))
        }
    }
    differentiate(&DnGamma, pt, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_kernel_examples() {
        let t = 1.0 / (4.0 * PI);
        assert!((heat_kernel(&[0.0, 0.0, 0.0], t, DerivOrder::ZERO).unwrap() - 1.0).abs() < 1e-14);
        let t = 0.3;
        let r = (4.0 * t).sqrt();
        let x = [r / 2f64.sqrt(), 0.0, r / 2f64.sqrt()];
        let v = heat_kernel(&x, t, DerivOrder::ZERO).unwrap();
        let e = (4.0 * PI * t).powf(-1.5) * (-1.0f64).exp();
        assert!((v - e).abs() < 1e-14 * e);
        assert!(heat_kernel(&x, 0.0, DerivOrder::ZERO).is_err());
        assert!(matches!(
            heat_kernel(&x, 1.0, DerivOrder::new(0, 0, 2)),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn heat_kernel_solves_heat_equation() {
        let x = [0.3, -0.2, 0.5];
        let t = 0.4;
        let dt = heat_kernel(&x, t, DerivOrder::new(0, 0, 1)).unwrap();
        let lap = heat_kernel(&x, t, DerivOrder::new(2, 0, 0)).unwrap()
            + heat_kernel(&x, t, DerivOrder::new(0, 2, 0).along(1)).unwrap()
            + heat_kernel(&x, t, DerivOrder::new(0, 2, 0).along(2)).unwrap();
        assert!((dt - lap).abs() < 1e-12 * dt.abs().max(1.0));
    }

    #[test]
    fn laplace_examples() {
        let e = laplace_fundamental(&[1.0, 0.0, 0.0], DerivOrder::ZERO).unwrap();
        assert!((e + 1.0 / (4.0 * PI)).abs() < 1e-15);
        let g = laplace_fundamental(&[1.0, 0.0, 0.0], DerivOrder::new(0, 1, 0)).unwrap();
        assert!((g - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert_eq!(laplace_fundamental(&[0.0; 3], DerivOrder::ZERO), Err(Error::Singularity));
    }

    #[test]
    fn laplace_discrete_laplacian_vanishes() {
        let x = [1.2, -0.8, 1.3];
        let f = |y: [f64; 3]| laplace_fundamental(&y, DerivOrder::ZERO).unwrap();
        let mut errs = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let mut lap = -6.0 * f(x);
            for k in 0..3 {
                let mut a = x;
                a[k] += h;
                let mut b = x;
                b[k] -= h;
                lap += f(a) + f(b);
            }
            errs.push((lap / (h * h)).abs());
        }
        assert!(errs[2] < 1e-4);
        assert!(errs[1] / errs[2] > 3.5);
    }

    #[test]
    fn instantaneous_pressure_closed_form() {
        // −2 ∂_1∂_3 E with E = −1/(4π|x|): ∂_1∂_3 E = −3 x_1 x_3 / (4π |x|^5)
        let h = 0.7;
        let x = [1.0, 0.0, h];
        let r: f64 = (1.0 + h * h).sqrt();
        let expect = -2.0 * (-3.0 * h / (4.0 * PI * r.powi(5)));
        let v = pressure_instantaneous(1, &x).unwrap();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn order_text_round_trip() {
        for d in all_orders().into_iter().chain([DerivOrder::new(0, 2, 0).along(2)]) {
            assert_eq!(d.to_string().parse::<DerivOrder>().unwrap(), d);
        }
        assert!("l1k0".parse::<DerivOrder>().is_err());
        assert!("l1k0m0x".parse::<DerivOrder>().is_err());
    }

    #[test]
    fn seeds_are_disjoint() {
        let d = DerivOrder::new(1, 1, 1);
        let (a, b, c) = d.seeds();
        assert_eq!((a, b, c), (1, 2, 4));
        assert_eq!(d.mask(), 7);
        assert_eq!(all_orders().len(), 13);
        assert!(all_orders().iter().all(|d| d.weight() <= 3));
    }
}
