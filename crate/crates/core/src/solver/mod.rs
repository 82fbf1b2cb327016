//! Velocity and pressure of the half-space Stokes problem with prescribed
//! boundary velocity.
//!
//! Tangential data `(g′, 0)` is handled by the layer potential
//! `u_i = Σ_j K_ij * g_j` with `K_ij = −2δ_ij ∂_nΓ + 4G_ij`, and the pressure
//! by the matching kernel, whose instantaneous part acts on `g(·, t)`.
//! General sampled data is first split as `g = ∇′φ-trace + rest` with a
//! Riesz transform; the gradient part is lifted spectrally and the rest
//! goes through the layer potential.

mod conv;
mod data;
mod eval;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::boundary::{split_boundary_data, BoundaryField, GradientLift};
use crate::kernels::{DerivOrder, QuadratureConfig, SpaceTimePoint};
use crate::{fmt_num, Error, Result};

pub use data::TangentialSource;

/// Velocity, pressure and requested velocity derivatives at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSample {
    pub point: SpaceTimePoint,
    pub u: Vec<f64>,
    pub press: f64,
    /// `D^d u` for every requested order.
    pub derivs: BTreeMap<DerivOrder, Vec<f64>>,
}

/// Finite-difference residuals of the Stokes system at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub h: f64,
    /// `u_t − Δu + ∇p`, per component.
    pub momentum: Vec<f64>,
    pub divergence: f64,
    /// `max|u| + max|∇u|` at the point.
    pub scale: f64,
}

impl Residual {
    pub fn momentum_norm(&self) -> f64 {
        self.momentum.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (self.scale + 1e-30)
    }

    pub fn divergence_norm(&self) -> f64 {
        self.divergence.abs() / (self.scale + 1e-30)
    }
}

/// Boundary mismatch at height `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub h: f64,
    /// `max_j |u_j(x′, h, t) − g_j(x′, t)|` over tangential `j`.
    pub tangential: f64,
    /// `|u_n(x′, h, t)|`.
    pub normal: f64,
}

#[derive(Clone, Debug)]
pub struct Solver {
    pub cfg: QuadratureConfig,
    /// Worker threads for batched plane evaluation.
    pub threads: usize,
}

impl Solver {
    pub fn new(cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Solver { cfg, threads: 1 })
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    /// [`Solver::evaluate_plane`] for a batch of `(x_n, t, d)` jobs sharing
    /// one tangential grid. Jobs are spread over the worker threads; the
    /// output order is the job order whatever the thread count.
    pub fn evaluate_planes(
        &self,
        src: &TangentialSource,
        xs: &[Vec<f64>],
        jobs: &[(f64, f64, DerivOrder)],
    ) -> Result<Vec<Vec<Vec<f64>>>> {
        let one = |&(x_n, t, d): &(f64, f64, DerivOrder)| self.evaluate_plane(src, xs, x_n, t, d);
        if self.threads <= 1 || jobs.len() < 2 {
            return jobs.iter().map(one).collect();
        }
        let chunk = jobs.len().div_ceil(self.threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(one).collect::<Result<Vec<_>>>()))
                .collect();
            let mut out = Vec::with_capacity(jobs.len());
            for h in handles {
                out.extend(h.join().map_err(|_| Error::Contract("plane worker panicked".into()))??);
            }
            Ok(out)
        })
    }

    fn check(&self, src: &TangentialSource, pt: &SpaceTimePoint, d: DerivOrder) -> Result<()> {
        pt.check_interior()?;
        if pt.dim() != src.dim() || src.dim() != self.cfg.dim {
            return Err(Error::Domain(format!(
                "point dimension {}, data dimension {}, configured dimension {}",
                pt.dim(),
                src.dim(),
                self.cfg.dim
            )));
        }
        d.validate(pt.dim())
    }

    /// `D^d [u_1, …, u_n, p]` on the tensor plane `xs_1 × … × xs_{n−1}` at
    /// height `x_n` and time `t`; one row per point, last axis fastest.
    pub fn evaluate_plane(
        &self,
        src: &TangentialSource,
        xs: &[Vec<f64>],
        x_n: f64,
        t: f64,
        d: DerivOrder,
    ) -> Result<Vec<Vec<f64>>> {
        let probe = SpaceTimePoint::new(xs.iter().map(|a| a.first().copied().unwrap_or(0.0)).collect(), x_n, t);
        self.check(src, &probe, d)?;
        if xs.iter().any(|a| a.is_empty() || a.iter().any(|v| !v.is_finite())) {
            return Err(Error::Domain("every plane axis needs finite coordinates".into()));
        }
        let n = src.dim();
        let flat = eval::eval_plane(src, xs, x_n, t, d, &self.cfg)?;
        Ok(flat.chunks(n + 1).map(<[f64]>::to_vec).collect())
    }

    /// `D^d [u_1, …, u_n, p]` at one point.
    pub fn evaluate(&self, src: &TangentialSource, pt: &SpaceTimePoint, d: DerivOrder) -> Result<Vec<f64>> {
        let xs: Vec<Vec<f64>> = pt.x_tan.iter().map(|&v| vec![v]).collect();
        Ok(self.evaluate_plane(src, &xs, pt.x_n, pt.t, d)?.remove(0))
    }

    /// Velocity, pressure and `D^d u` for tangential data.
    pub fn evaluate_tangential(
        &self,
        src: &TangentialSource,
        pt: &SpaceTimePoint,
        orders: &[DerivOrder],
    ) -> Result<SolutionSample> {
        let mut base = self.evaluate(src, pt, DerivOrder::ZERO)?;
        let press = base.pop().unwrap_or(0.0);
        let mut derivs = BTreeMap::new();
        for &d in orders {
            if d.count() == 0 {
                derivs.insert(d, base.clone());
                continue;
            }
            let mut v = self.evaluate(src, pt, d)?;
            v.pop();
            derivs.insert(d, v);
        }
        Ok(SolutionSample {
            point: pt.clone(),
            u: base,
            press,
            derivs,
        })
    }

    pub fn evaluate_pressure(&self, src: &TangentialSource, pt: &SpaceTimePoint) -> Result<f64> {
        Ok(*self.evaluate(src, pt, DerivOrder::ZERO)?.last().unwrap_or(&0.0))
    }

    /// Solve with general sampled data: the normal component and its Riesz
    /// companion go through the spectral lift `(∇φ, −φ_t)`, the remaining
    /// tangential part through the layer potential. Requires `g(·, 0) = 0`.
    pub fn full_solve(&self, g: &BoundaryField, pt: &SpaceTimePoint, orders: &[DerivOrder]) -> Result<SolutionSample> {
        g.check_initial_zero()?;
        let (g1, g2) = split_boundary_data(g)?;
        let lift = GradientLift::new(&g1)?;
        let src = TangentialSource::from_field(&g2)?;
        let mut s = self.evaluate_tangential(&src, pt, orders)?;
        let base = lift.eval(pt, DerivOrder::ZERO)?;
        for (a, b) in s.u.iter_mut().zip(&base.grad) {
            *a += b;
        }
        s.press -= base.phi_t;
        for (d, v) in s.derivs.iter_mut() {
            let l = lift.eval(pt, *d)?;
            for (a, b) in v.iter_mut().zip(&l.grad) {
                *a += b;
            }
        }
        Ok(s)
    }

    /// Central-difference residuals of `u_t − Δu + ∇p = 0` and `div u = 0`
    /// with spatial step `h` and time step `h²`.
    pub fn residual_check(&self, src: &TangentialSource, pt: &SpaceTimePoint, h: f64) -> Result<Residual> {
        if !(h > 0.0 && h < pt.x_n / 4.0 && h * h < pt.t / 4.0) {
            return Err(Error::Contract(format!(
                "finite-difference step {h} must satisfy h < x_n/4 and h² < t/4"
            )));
        }
        let n = src.dim();
        let m = n - 1;
        let xs: Vec<Vec<f64>> = pt.x_tan.iter().map(|&v| vec![v - h, v, v + h]).collect();
        let plane = self.evaluate_plane(src, &xs, pt.x_n, pt.t, DerivOrder::ZERO)?;
        // flat index of the point offset by `off` along axis `k`
        let idx = |k: Option<usize>, off: usize| -> usize {
            (0..m).fold(0, |acc, a| acc * 3 + if Some(a) == k { off } else { 1 })
        };
        let c = &plane[idx(None, 1)];
        let up = |dx: f64, dt: f64| {
            self.evaluate(src, &SpaceTimePoint::new(pt.x_tan.clone(), pt.x_n + dx, pt.t + dt), DerivOrder::ZERO)
        };
        let (np_, nm) = (up(h, 0.0)?, up(-h, 0.0)?);
        let (tp, tm) = (up(0.0, h * h)?, up(0.0, -h * h)?);
        let mut lap = vec![0.0; n];
        let mut grad_u = 0.0f64;
        let mut grad_p = vec![0.0; n];
        let mut div = 0.0;
        for k in 0..m {
            let (a, b) = (&plane[idx(Some(k), 2)], &plane[idx(Some(k), 0)]);
            for i in 0..n {
                lap[i] += (a[i] - 2.0 * c[i] + b[i]) / (h * h);
                grad_u = grad_u.max(((a[i] - b[i]) / (2.0 * h)).abs());
            }
            grad_p[k] = (a[n] - b[n]) / (2.0 * h);
            div += (a[k] - b[k]) / (2.0 * h);
        }
        for i in 0..n {
            lap[i] += (np_[i] - 2.0 * c[i] + nm[i]) / (h * h);
            grad_u = grad_u.max(((np_[i] - nm[i]) / (2.0 * h)).abs());
        }
        grad_p[m] = (np_[n] - nm[n]) / (2.0 * h);
        div += (np_[m] - nm[m]) / (2.0 * h);
        let momentum = (0..n)
            .map(|i| (tp[i] - tm[i]) / (2.0 * h * h) - lap[i] + grad_p[i])
            .collect();
        let umax = c[..n].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Residual {
            h,
            momentum,
            divergence: div,
            scale: umax + grad_u,
        })
    }

    /// `u(x′, h, t)` against the data `g(x′, t)` for each height `h`.
    pub fn trace_recovery(
        &self,
        src: &TangentialSource,
        x_tan: &[f64],
        t: f64,
        heights: &[f64],
    ) -> Result<Vec<TraceRow>> {
        let g = src.boundary_value(x_tan, t);
        let n = src.dim();
        heights
            .iter()
            .map(|&h| {
                let u = self.evaluate(src, &SpaceTimePoint::new(x_tan.to_vec(), h, t), DerivOrder::ZERO)?;
                let tangential = (0..n - 1).map(|j| (u[j] - g[j]).abs()).fold(0.0, f64::max);
                Ok(TraceRow {
                    h,
                    tangential,
                    normal: u[n - 1].abs(),
                })
            })
            .collect()
    }
}

/// CSV for a batch of samples: `x1..x(n−1), xn, t, u1..un, p`, then one
/// column per component of each requested order (`<order>_u<i>`).
pub fn samples_to_csv(samples: &[SolutionSample]) -> String {
    let mut s = String::new();
    let Some(first) = samples.first() else {
        return s;
    };
    let n = first.point.dim();
    for a in 1..n {
        let _ = write!(s, "x{a},");
    }
    s.push_str("xn,t");
    for i in 1..=n {
        let _ = write!(s, ",u{i}");
    }
    s.push_str(",p");
    for d in first.derivs.keys() {
        for i in 1..=n {
            let _ = write!(s, ",{d}_u{i}");
        }
    }
    s.push('\n');
    for smp in samples {
        let mut row: Vec<String> = smp.point.x_tan.iter().map(|v| fmt_num(*v)).collect();
        row.push(fmt_num(smp.point.x_n));
        row.push(fmt_num(smp.point.t));
        row.extend(smp.u.iter().map(|v| fmt_num(*v)));
        row.push(fmt_num(smp.press));
        for v in smp.derivs.values() {
            row.extend(v.iter().map(|x| fmt_num(*x)));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests;
