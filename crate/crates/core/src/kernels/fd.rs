//! Derivatives by central differences of another strategy's order-0 values.
//! Only meant as a cross-check of the analytic derivative paths.

use std::sync::Arc;

use super::{DerivOrder, KernelStrategy, QuadratureConfig, SpaceTimePoint};
use crate::Result;

pub struct FiniteDifference {
    inner: Arc<dyn KernelStrategy>,
    /// Step as a fraction of the local length scale `min(x_n, √t)`.
    pub rel_step: f64,
}

impl FiniteDifference {
    pub fn new(inner: Arc<dyn KernelStrategy>) -> Self {
        FiniteDifference { inner, rel_step: 2e-2 }
    }
}

/// Apply `D^d` to `f` by nested central differences.
pub(crate) fn central_differences<F>(f: &F, pt: &SpaceTimePoint, d: DerivOrder, rel_step: f64) -> Result<f64>
where
    F: Fn(&SpaceTimePoint) -> Result<f64>,
{
    if d.count() == 0 {
        return f(pt);
    }
    let ell = pt.x_n.min(pt.t.sqrt());
    let (mut lo, mut hi) = (pt.clone(), pt.clone());
    let (rest, h) = if d.l0 > 0 {
        let h = rel_step * ell;
        lo.x_n -= h;
        hi.x_n += h;
        (DerivOrder { l0: d.l0 - 1, ..d }, h)
    } else if d.k0 > 0 {
        let h = rel_step * ell;
        let k = d.dir as usize - 1;
        lo.x_tan[k] -= h;
        hi.x_tan[k] += h;
        (DerivOrder { k0: d.k0 - 1, ..d }, h)
    } else {
        let h = rel_step * ell * ell;
        lo.t -= h;
        hi.t += h;
        (DerivOrder { m0: d.m0 - 1, ..d }, h)
    };
    let a = central_differences(f, &hi, rest, rel_step)?;
    let b = central_differences(f, &lo, rest, rel_step)?;
    Ok((a - b) / (2.0 * h))
}

impl FiniteDifference {
    fn tight(cfg: &QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: cfg.rel_tol.min(1e-12),
            ..*cfg
        }
    }
}

impl KernelStrategy for FiniteDifference {
    fn name(&self) -> &'static str {
        "finite-difference"
    }

    fn poisson_heat_a(&self, pt: &SpaceTimePoint, d: DerivOrder, cfg: &QuadratureConfig) -> Result<f64> {
        let c = Self::tight(cfg);
        let f = |p: &SpaceTimePoint| self.inner.poisson_heat_a(p, DerivOrder::ZERO, &c);
        central_differences(&f, pt, d, self.rel_step)
    }

    fn poisson_heat_a_grad(
        &self,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        let c = Self::tight(cfg);
        let f = |p: &SpaceTimePoint| self.inner.poisson_heat_a_grad(j, p, DerivOrder::ZERO, &c);
        central_differences(&f, pt, d, self.rel_step)
    }

    fn g_kernel(
        &self,
        i: usize,
        j: usize,
        pt: &SpaceTimePoint,
        d: DerivOrder,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        let c = Self::tight(cfg);
        let f = |p: &SpaceTimePoint| self.inner.g_kernel(i, j, p, DerivOrder::ZERO, &c);
        central_differences(&f, pt, d, self.rel_step)
    }
}
