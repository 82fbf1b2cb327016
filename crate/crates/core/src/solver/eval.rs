//! Fused evaluation of velocity and pressure on tensor planes of points.
//!
//! For data `g_j(y′, s) = Σ_I c_I(s) Π_k φ_{k,I_k}(y_k)` every kernel is a
//! Gaussian in the tangential variables once the Laplace kernel is written
//! as a superposition `∫ w(σ) e^{−σ|x|²} dσ`, so the `y′` integrals factor
//! into one-dimensional convolutions. What remains is a double integral
//! over `τ = t − s` and `v = ln σ`. All points of a tensor plane
//! `{x′ : x_k ∈ xs_k}` share the quadrature nodes and the per-axis tables.
//!
//! Output per point: `[u_1, …, u_n, p]`.

use std::f64::consts::PI;

use super::data::{DataComponent, TangentialSource};
use crate::kernels::subordination::{normal_profiles, sigma_weight};
use crate::kernels::{DerivOrder, QuadratureConfig};
use crate::numerics::{integrate, Jet, QuadValue, Real, Tolerance};
use crate::Result;

const V_BELOW: f64 = 30.0;

/// Offset above `ln(1/min(x_n², τ))` for the `v` window. The slowest tail
/// decays like `σ^{−1/2}`.
fn v_above(rel: f64) -> f64 {
    (2.0 * (1.0 / rel).ln() + 6.0).max(40.0)
}

/// `a·b`, cheap when `b` carries no derivative parts.
#[inline]
fn mul<S: Real>(a: S, b: S) -> S {
    if b.is_real() {
        a * b.re()
    } else {
        a * b
    }
}

/// `Σ_I c_I Π_k tab_k[I_k][X_k]` for every point multi-index `X` (last axis fastest).
fn contract<S: Real>(coef: &[S], tabs: &[&[S]], nb: &[usize], np: &[usize]) -> Vec<S> {
    if std::mem::size_of::<S>() != std::mem::size_of::<f64>()
        && coef.iter().chain(tabs.iter().flat_map(|t| t.iter())).all(Real::is_real)
    {
        let c: Vec<f64> = coef.iter().map(Real::re).collect();
        let t: Vec<Vec<f64>> = tabs.iter().map(|t| t.iter().map(Real::re).collect()).collect();
        let views: Vec<&[f64]> = t.iter().map(Vec::as_slice).collect();
        return contract(&c, &views, nb, np).into_iter().map(S::cst).collect();
    }
    let m = nb.len();
    let mut cur = coef.to_vec();
    for a in (0..m).rev() {
        let pre: usize = nb[..a].iter().product();
        let post: usize = np[a + 1..].iter().product();
        let mut next = vec![S::cst(0.0); pre * np[a] * post];
        for p in 0..pre {
            for i in 0..nb[a] {
                let old = &cur[(p * nb[a] + i) * post..(p * nb[a] + i + 1) * post];
                if old.iter().all(|v| v.size() == 0.0) {
                    continue;
                }
                for x in 0..np[a] {
                    let f = tabs[a][i * np[a] + x];
                    if f.size() == 0.0 {
                        continue;
                    }
                    let base = (p * np[a] + x) * post;
                    let dst = next[base..base + post].iter_mut().zip(old);
                    if f.is_real() {
                        let fr = f.re();
                        dst.for_each(|(d, &s)| *d += s * fr);
                    } else {
                        dst.for_each(|(d, &s)| *d += f * s);
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Convolution tables `[axis][level][I * np + X]`.
fn tables<S: Real>(c: &DataComponent, xs: &[Vec<S>], q: f64, top: &[usize]) -> Vec<Vec<Vec<S>>> {
    c.axes
        .iter()
        .zip(xs)
        .zip(top)
        .map(|((axis, pts), &top)| axis.table(pts, q, top))
        .collect()
}

fn level_view<'a, S>(tabs: &'a [Vec<Vec<S>>], lev: &[usize]) -> Vec<&'a [S]> {
    tabs.iter().zip(lev).map(|(t, &l)| t[l].as_slice()).collect()
}

struct Ctx<'a, S> {
    n: usize,
    comp: &'a DataComponent,
    xs: &'a [Vec<S>],
    x_n: S,
    t: S,
    nb: Vec<usize>,
    np: Vec<usize>,
    npts: usize,
    r2: f64,
    tol: Tolerance,
    /// Absolute tolerance of the inner `v` integrals, per unit of `w = √τ`.
    inner_abs: f64,
    above: f64,
}

impl<S: Real> Ctx<'_, S> {
    fn width(&self) -> usize {
        self.n + 1
    }

    /// Per-axis maximal convolution level: 2 on the data direction, 1 elsewhere.
    fn tops(&self) -> Vec<usize> {
        (0..self.n - 1).map(|k| if k + 1 == self.comp.dir { 2 } else { 1 }).collect()
    }

    fn unit(&self, extra: Option<usize>) -> Vec<usize> {
        (0..self.n - 1)
            .map(|k| usize::from(k + 1 == self.comp.dir) + usize::from(Some(k + 1) == extra))
            .collect()
    }

    /// Integrand in `τ` (before the `τ = w²` Jacobian).
    fn tau_integrand(&self, tau: f64, c: &[S], cd: &[S]) -> Result<Vec<S>> {
        let n = self.n;
        let m = n - 1;
        let w = self.width();
        let j = self.comp.dir;
        let mut out = vec![S::cst(0.0); self.npts * w];
        if c.iter().chain(cd).all(|v| v.size() == 0.0) {
            return Ok(out);
        }
        let x_n = self.x_n;
        let g0 = (4.0 * PI * tau).powf(-0.5);

        // −2 ∂_nΓ acting on g_j
        let f0 = tables(self.comp, self.xs, 0.25 / tau, &vec![0; m]);
        let t0 = contract(c, &level_view(&f0, &vec![0; m]), &self.nb, &self.np);
        let dn_gamma = -(x_n / (2.0 * tau)) * g0 * (-(x_n * x_n / (4.0 * tau))).exp();
        let pref = (4.0 * PI * tau).powf(-(m as f64) / 2.0);
        let fac = dn_gamma * (-2.0 * pref);
        for (x, v) in t0.iter().enumerate() {
            out[x * w + j - 1] += fac * *v;
        }

        // 4 G_ij and the smooth pressure, through σ
        let lo = -(self.r2 + tau).ln() - V_BELOW;
        let hi = -(x_n.re() * x_n.re()).min(tau).ln() + self.above;
        let tops = self.tops();
        let lev_j = self.unit(None);
        let tau_s = S::cst(tau);
        let inner = |v: f64| -> Result<Vec<S>> {
            let sigma = v.exp();
            let s4 = 1.0 + 4.0 * sigma * tau;
            let q = sigma / s4;
            let wt = sigma_weight(n, sigma) * s4.powf(-(m as f64) / 2.0);
            let tabs = tables(self.comp, self.xs, q, &tops);
            let (p0, p1) = normal_profiles(x_n, tau_s, sigma);
            let mut res = vec![S::cst(0.0); self.npts * w];
            for i in 1..=m {
                let ti = contract(c, &level_view(&tabs, &self.unit(Some(i))), &self.nb, &self.np);
                let f = p0 * (4.0 * wt);
                for (x, v) in ti.iter().enumerate() {
                    res[x * w + i - 1] = mul(f, *v);
                }
            }
            let view = level_view(&tabs, &lev_j);
            let tj = contract(c, &view, &self.nb, &self.np);
            let td = contract(cd, &view, &self.nb, &self.np);
            let fu = p1 * (4.0 * wt);
            let e = (-(x_n * x_n * sigma)).exp();
            let d2 = x_n * x_n * (4.0 * sigma * sigma) - 2.0 * sigma;
            let fp = e * (4.0 * g0 * wt);
            let fpd = fp * d2;
            for x in 0..self.npts {
                res[x * w + n - 1] = mul(fu, tj[x]);
                res[x * w + n] = mul(fpd, tj[x]) + mul(fp, td[x]);
            }
            Ok(res)
        };
        let (g, _) = integrate(inner, lo, hi, self.tol.with_abs(self.inner_abs))?;
        out.axpy(1.0, &g);
        Ok(out)
    }

    fn evaluate(&self) -> Result<Vec<S>> {
        let n = self.n;
        let w = self.width();
        let mut out = vec![S::cst(0.0); self.npts * w];
        let breaks = self.comp.time.breaks();
        let (smin, smax) = (breaks[0], breaks[breaks.len() - 1]);
        let tr = self.t.re();
        if tr <= smin {
            return Ok(out);
        }
        let (mut c, mut cd) = (Vec::new(), Vec::new());

        // instantaneous pressure −2 ∂_j∂_n E acting on g_j(·, t)
        if tr <= smax {
            self.comp.time.eval(self.t, &mut c, &mut cd);
            let x_n = self.x_n;
            let lo = -self.r2.ln() - V_BELOW;
            let hi = -(x_n.re() * x_n.re()).ln() + self.above;
            let lev_j = self.unit(None);
            let tops = self.tops();
            let f = |v: f64| -> Result<Vec<S>> {
                let sigma = v.exp();
                let tabs = tables(self.comp, self.xs, sigma, &tops);
                let tj = contract(&c, &level_view(&tabs, &lev_j), &self.nb, &self.np);
                let fac = x_n * (4.0 * sigma * sigma_weight(n, sigma)) * (-(x_n * x_n * sigma)).exp();
                Ok(tj.into_iter().map(|v| fac * v).collect())
            };
            let (p, _) = integrate(f, lo, hi, self.tol)?;
            for (x, v) in p.iter().enumerate() {
                out[x * w + n] += *v;
            }
        }

        // τ ∈ (t − smax, t − smin) ∩ (0, t], integrated in w = √τ
        let wa = (tr - smax).max(0.0).sqrt();
        let wb = (tr - smin).sqrt();
        let f = |wv: f64| -> Result<Vec<S>> {
            let tau = wv * wv;
            if tau <= 0.0 {
                return Ok(vec![S::cst(0.0); self.npts * w]);
            }
            let (mut c, mut cd) = (Vec::new(), Vec::new());
            self.comp.time.eval(self.t - tau, &mut c, &mut cd);
            let mut v = self.tau_integrand(tau, &c, &cd)?;
            for e in v.iter_mut() {
                *e = *e * (2.0 * wv);
            }
            Ok(v)
        };
        // the data are polynomial in s between breaks
        let mut cuts = vec![wa];
        for &b in breaks.iter().rev() {
            let wv = (tr - b).max(0.0).sqrt();
            if wv > wa && wv < wb {
                cuts.push(wv);
            }
        }
        cuts.push(wb);
        for span in cuts.windows(2) {
            let (part, _) = integrate(&f, span[0], span[1], self.tol)?;
            out.axpy(1.0, &part);
        }
        Ok(out)
    }
}

fn eval_generic<S: Real>(
    src: &TangentialSource,
    xs: &[Vec<S>],
    x_n: S,
    t: S,
    cfg: &QuadratureConfig,
) -> Result<Vec<S>> {
    let n = src.dim;
    let np: Vec<usize> = xs.iter().map(Vec::len).collect();
    let npts: usize = np.iter().product();
    let mut total = vec![S::cst(0.0); npts * (n + 1)];
    for comp in &src.comps {
        let reach = comp.reach();
        let r2 = xs
            .iter()
            .zip(&reach)
            .map(|(p, r)| {
                let xm = p.iter().map(|v| v.re().abs()).fold(0.0, f64::max);
                (xm + r).powi(2)
            })
            .sum::<f64>()
            + x_n.re() * x_n.re();
        // Symmetric points make some outputs pure roundoff, so relative control
        // alone can stall; accept absolute errors far below the data size.
        let abs = cfg.rel_tol * 1e-6 * comp.time.sup_abs();
        let tr = t.re();
        let breaks = comp.time.breaks();
        let wspan = (tr - breaks[0]).max(0.0).sqrt();
        let ctx = Ctx {
            n,
            comp,
            xs,
            x_n,
            t,
            nb: comp.axes.iter().map(|a| a.len()).collect(),
            np: np.clone(),
            npts,
            r2,
            tol: cfg.tolerance().with_abs(abs),
            inner_abs: abs / (2.0 * wspan * wspan).max(1e-300),
            above: v_above(cfg.rel_tol),
        };
        let v = ctx.evaluate()?;
        total.axpy(1.0, &v);
    }
    Ok(total)
}

/// `D^d [u_1, …, u_n, p]` at every point of the plane `xs_1 × … × xs_{n−1}`
/// at height `x_n` and time `t`, flattened point-major.
pub(crate) fn eval_plane(
    src: &TangentialSource,
    xs: &[Vec<f64>],
    x_n: f64,
    t: f64,
    d: DerivOrder,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    if d.count() == 0 {
        return eval_generic::<f64>(src, xs, x_n, t, cfg);
    }
    // Seed with the local length scale so every jet part has a comparable
    // size and the adaptive error control serves the requested derivative.
    let ell = x_n.min(t.sqrt());
    let (sn, sk, st) = d.seeds();
    let xs_j: Vec<Vec<Jet>> = xs
        .iter()
        .enumerate()
        .map(|(k, pts)| {
            pts.iter()
                .map(|&v| {
                    if d.k0 > 0 && k + 1 == d.dir as usize {
                        Jet::var(0.0, sk) * ell + v
                    } else {
                        Jet::constant(v)
                    }
                })
                .collect()
        })
        .collect();
    let xn_j = Jet::var(0.0, sn) * ell + x_n;
    let t_j = Jet::var(0.0, st) * (ell * ell) + t;
    let v = eval_generic::<Jet>(src, &xs_j, xn_j, t_j, cfg)?;
    let scale = ell.powi(d.weight() as i32);
    let mask = d.mask();
    Ok(v.iter().map(|j| j.part(mask) / scale).collect())
}
