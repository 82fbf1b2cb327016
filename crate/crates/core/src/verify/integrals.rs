//! Space-time integrals of atom responses: the weighted derivative
//! integral, the growth in the horizon `T`, and the ratio of solution and
//! data norms.
//!
//! Atoms here are centred templates dilated to each requested radius. All
//! quadratures exploit the mirror symmetry of a centred atom: only the
//! quadrant `x′ − y₀′ ≥ 0` is evaluated.

use serde::Serialize;

use crate::besov::{
    anisotropic_norm, parabolic_nodes, weighted_functional_low, Extension, InteriorSample, Lattice, Series,
    SpaceTimeSamples,
};
use crate::boundary::{Atom, AtomExpansion, BoundaryField};
use crate::kernels::DerivOrder;
use crate::numerics::GaussLegendre;
use crate::solver::{Solver, TangentialSource};
use crate::{Error, Result};

/// Quadrature layout in units of the atom radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralGrid {
    /// Panel breaks of each tangential half-axis; the last one truncates.
    pub tan_breaks: Vec<f64>,
    pub normal_breaks: Vec<f64>,
    /// In units of `r²`.
    pub time_breaks: Vec<f64>,
    /// Gauss points per panel.
    pub order: usize,
}

impl Default for IntegralGrid {
    fn default() -> Self {
        IntegralGrid {
            tan_breaks: vec![0.0, 0.5, 1.0, 2.0, 4.0, 16.0],
            normal_breaks: vec![0.0, 0.25, 1.0, 4.0, 16.0],
            time_breaks: vec![0.0, 0.25, 1.0, 4.0, 16.0],
            order: 2,
        }
    }
}

impl IntegralGrid {
    /// Every panel split in two and one more Gauss point.
    pub fn refined(&self) -> IntegralGrid {
        let split = |v: &[f64]| {
            let mut out = vec![v[0]];
            for w in v.windows(2) {
                out.push(0.5 * (w[0] + w[1]));
                out.push(w[1]);
            }
            out
        };
        IntegralGrid {
            tan_breaks: split(&self.tan_breaks),
            normal_breaks: split(&self.normal_breaks),
            time_breaks: split(&self.time_breaks),
            order: self.order + 1,
        }
    }

    fn tan_nodes(&self, r: f64) -> Vec<(f64, f64)> {
        let gl = GaussLegendre::new(self.order);
        self.tan_breaks
            .windows(2)
            .flat_map(|w| gl.mapped(w[0] * r, w[1] * r))
            .collect()
    }
}

fn centred(template: &Atom, r: f64) -> Result<Atom> {
    if template.center_tan.iter().any(|c| *c != 0.0) || template.t0 != 0.0 {
        return Err(Error::Contract("integral checks take a template atom centred at the origin with t0 = 0".into()));
    }
    Ok(template.dilate(r / template.r))
}

fn source(atom: &Atom) -> Result<TangentialSource> {
    TangentialSource::from_atoms(&AtomExpansion::single(atom.clone(), 1))
}

/// `∫∫ (x_n ∧ √t)^γ |D^d u|^p` over the truncated half-space and times
/// `(0, t_max)`, for the atom translated by `shift`.
fn weighted_integral(
    solver: &Solver,
    atom: &Atom,
    shift: &[f64],
    d: DerivOrder,
    gamma: f64,
    p: f64,
    t_max: f64,
    grid: &IntegralGrid,
) -> Result<f64> {
    let n = atom.dim();
    let r = atom.r;
    let mut moved = atom.clone();
    for (c, s) in moved.center_tan.iter_mut().zip(shift) {
        *c += s;
    }
    if atom.scale == 0.0 {
        return Ok(0.0);
    }
    let src = source(&moved)?;
    let tan = grid.tan_nodes(r);
    let axes: Vec<Vec<f64>> = moved.center_tan.iter().map(|c| tan.iter().map(|(x, _)| c + x).collect()).collect();
    let mut tw = vec![1.0];
    for _ in 1..n {
        tw = tw.iter().flat_map(|a| tan.iter().map(move |(_, w)| a * w)).collect();
    }
    let mirror = 2f64.powi(n as i32 - 1);
    let xb: Vec<f64> = grid.normal_breaks.iter().map(|v| v * r).collect();
    let mut tb: Vec<f64> = grid.time_breaks.iter().map(|v| v * r * r).filter(|v| *v < t_max).collect();
    tb.push(t_max);
    let nodes = parabolic_nodes(&xb, &tb, grid.order)?;
    let jobs: Vec<_> = nodes.iter().map(|&(x_n, t, _)| (x_n, t, d)).collect();
    let planes = solver.evaluate_planes(&src, &axes, &jobs)?;
    let mut total = 0.0;
    for (&(x_n, t, w), plane) in nodes.iter().zip(&planes) {
        let m = x_n.min(t.sqrt()).powf(gamma);
        let s: f64 = plane
            .iter()
            .zip(&tw)
            .map(|(v, wt)| wt * v[..n].iter().map(|c| c * c).sum::<f64>().powf(p / 2.0))
            .sum();
        total += w * m * s;
    }
    Ok(mirror * total)
}

/// Weighted derivative integral at several radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedIntegralReport {
    pub order: String,
    pub alpha: f64,
    pub p: f64,
    /// Weight exponent `−αp + (l0 + k0 + 2m0)p − 1`.
    pub gamma: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `max/min` over radii; 1 when every value vanishes.
    pub uniformity_ratio: f64,
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `∫_0^∞∫ (x_n ∧ √t)^{−αp+(l0+k0+2m0)p−1} |D^d u|^p` for the template
/// dilated to each radius; the domain is truncated at the outer breaks of
/// the grid.
pub fn weighted_integral_theorem(
    solver: &Solver,
    template: &Atom,
    radii: &[f64],
    d: DerivOrder,
    grid: &IntegralGrid,
) -> Result<WeightedIntegralReport> {
    weighted_integral_shifted(solver, template, radii, d, grid, &vec![0.0; template.dim() - 1])
}

/// As [`weighted_integral_theorem`] with the atom centre moved by `shift`.
pub fn weighted_integral_shifted(
    solver: &Solver,
    template: &Atom,
    radii: &[f64],
    d: DerivOrder,
    grid: &IntegralGrid,
    shift: &[f64],
) -> Result<WeightedIntegralReport> {
    let (alpha, p) = (template.alpha, template.p);
    let w = d.weight();
    if !(1..=3).contains(&w) {
        return Err(Error::Contract(format!("order {d}: l0 + k0 + 2m0 must be 1, 2 or 3")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Contract(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if alpha >= w as f64 {
        return Err(Error::Contract(format!("alpha = {alpha} must be below l0 + k0 + 2m0 = {w}")));
    }
    let gamma = -alpha * p + w as f64 * p - 1.0;
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let atom = centred(template, r)?;
        let t_max = grid.time_breaks.last().copied().unwrap_or(16.0) * r * r;
        values.push(weighted_integral(solver, &atom, shift, d, gamma, p, t_max, grid)?);
    }
    Ok(WeightedIntegralReport {
        order: d.to_string(),
        alpha,
        p,
        gamma,
        radii: radii.to_vec(),
        uniformity_ratio: spread(&values),
        values,
    })
}

/// Growth of `∫_0^T∫ (x_n ∧ √t)^β |u|^p` in `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TScalingReport {
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub horizons: Vec<f64>,
    /// Radius of the atom used at each horizon, `√T/2`.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares log-log slope; absent when a value vanishes.
    pub fitted_exponent: Option<f64>,
    /// `αp + β + 1`.
    pub stated_exponent: f64,
    /// `(αp + β + 1)/2`.
    pub derived_exponent: f64,
    pub below_stated: bool,
    pub near_derived: bool,
    pub note: &'static str,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || x.iter().chain(y).any(|v| *v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// For each horizon the template is dilated to `r = √T/2`, the largest atom
/// that fits the time window, so the integral tracks the extremal growth.
pub fn low_order_t_scaling(
    solver: &Solver,
    template: &Atom,
    beta: f64,
    horizons: &[f64],
    grid: &IntegralGrid,
) -> Result<TScalingReport> {
    if !(beta > -1.0) {
        return Err(Error::param("beta", "must exceed -1"));
    }
    if horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::param("T", "horizons must be positive"));
    }
    let (alpha, p) = (template.alpha, template.p);
    let mut values = Vec::new();
    let mut radii = Vec::new();
    for &t_end in horizons {
        let r = t_end.sqrt() / 2.0;
        let atom = centred(template, r)?;
        let shift = vec![0.0; atom.dim() - 1];
        values.push(weighted_integral(solver, &atom, &shift, DerivOrder::ZERO, beta, p, t_end, grid)?);
        radii.push(r);
    }
    let fitted = log_log_slope(horizons, &values);
    let stated = alpha * p + beta + 1.0;
    let derived = stated / 2.0;
    Ok(TScalingReport {
        alpha,
        p,
        beta,
        horizons: horizons.to_vec(),
        radii,
        values,
        fitted_exponent: fitted,
        stated_exponent: stated,
        derived_exponent: derived,
        below_stated: fitted.is_none_or(|s| s <= stated + 0.2),
        near_derived: fitted.is_none_or(|s| (s - derived).abs() <= 0.3),
        note: "the stated exponent is twice the one the scaling argument produces; both are compared",
    })
}

/// Sampling of solution and data for the norm ratio, in units of `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormGrid {
    /// Solution lattice spacing.
    pub h: f64,
    /// Tangential half-width and height of the solution box.
    pub half_width: f64,
    pub height: f64,
    /// Solution time nodes per `r²` during the life of the atom.
    pub steps_per_life: usize,
    /// Data spacing and time step (the latter in units of `r²`).
    pub data_h: f64,
    pub data_tau: f64,
}

impl Default for NormGrid {
    fn default() -> Self {
        NormGrid {
            h: 0.25,
            half_width: 4.0,
            height: 4.0,
            steps_per_life: 4,
            data_h: 0.125,
            data_tau: 0.0625,
        }
    }
}

/// Ratio of solution and data norms at several radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainEstimateReport {
    pub alpha: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub radii: Vec<f64>,
    /// Norm of `u` with smoothness `(α + 1/p, (α + 1/p)/2)`.
    pub solution_norms: Vec<f64>,
    /// Norm of `g` with smoothness `(α, α/2)`.
    pub data_norms: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max/min` of the ratios.
    pub spread: f64,
}

/// Time nodes `0 = t_0 < … ≤ T`: uniform through the atom's life, then
/// doubling.
fn solution_times(r: f64, t_end: f64, steps: usize) -> Vec<f64> {
    let life = r * r;
    let mut ts: Vec<f64> = (0..=steps).map(|k| life * k as f64 / steps as f64).filter(|t| *t < t_end).collect();
    let mut t = 2.0 * life;
    while t < t_end {
        ts.push(t);
        t *= 2.0;
    }
    ts.push(t_end);
    ts
}

/// Sign of `u_i` under reflection of tangential axis `a`, for data along
/// axis 0 that is even about the centre.
fn mirror_sign(i: usize, a: usize) -> f64 {
    let odd = if a == 0 { i != a } else { i == a };
    if odd {
        -1.0
    } else {
        1.0
    }
}

/// Solution samples on `[−L, L]^{n−1} × (0, H)` (cell-centred in `x_n`)
/// at the given times, from quadrant evaluations.
fn solution_samples(solver: &Solver, atom: &Atom, t_end: f64, g: &NormGrid) -> Result<SpaceTimeSamples> {
    let n = atom.dim();
    let m = n - 1;
    let r = atom.r;
    let h = g.h * r;
    let k = (g.half_width / g.h).round() as usize;
    let jn = (g.height / g.h).round() as usize;
    let side = 2 * k + 1;
    let src = source(atom)?;
    let quad: Vec<f64> = (0..=k).map(|i| i as f64 * h).collect();
    let axes: Vec<Vec<f64>> = atom.center_tan.iter().map(|c| quad.iter().map(|v| c + v).collect()).collect();
    let times = solution_times(r, t_end, g.steps_per_life);
    let mut shape = vec![side; m];
    shape.push(jn);
    let pts: usize = shape.iter().product();
    let mut origin = vec![-(k as f64) * h; m];
    origin.push(0.5 * h);
    let jobs: Vec<_> = times
        .iter()
        .filter(|t| **t > 0.0)
        .flat_map(|&t| (0..jn).map(move |j| ((j as f64 + 0.5) * h, t, DerivOrder::ZERO)))
        .collect();
    let mut planes = solver.evaluate_planes(&src, &axes, &jobs)?.into_iter();
    // values[slice][comp * pts + idx]
    let mut fields: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for &t in &times {
        let mut vals = vec![0.0; n * pts];
        if t > 0.0 {
            for j in 0..jn {
                let plane = planes.next().ok_or_else(|| Error::Contract("missing plane".into()))?;
                for (q, row) in plane.iter().enumerate() {
                    // quadrant multi-index, last axis fastest
                    let mut qi = vec![0usize; m];
                    let mut rest = q;
                    for a in (0..m).rev() {
                        qi[a] = rest % (k + 1);
                        rest /= k + 1;
                    }
                    for mask in 0..(1usize << m) {
                        if (0..m).any(|a| mask & (1 << a) != 0 && qi[a] == 0) {
                            continue;
                        }
                        let mut idx = 0;
                        for a in 0..m {
                            let off = if mask & (1 << a) != 0 { k - qi[a] } else { k + qi[a] };
                            idx = idx * side + off;
                        }
                        idx = idx * jn + j;
                        for i in 0..n {
                            let s: f64 = (0..m).filter(|a| mask & (1 << a) != 0).map(|a| mirror_sign(i, a)).product();
                            vals[i * pts + idx] = s * row[i];
                        }
                    }
                }
            }
        }
        fields.push(vals);
    }
    let tw = Series::trapezoid(&times);
    let mut slices = Vec::new();
    for ((t, w), vals) in times.iter().zip(&tw).zip(&fields) {
        if vals.iter().all(|v| *v == 0.0) {
            continue;
        }
        slices.push((*t, *w, Lattice::new(origin.clone(), h, shape.clone(), n, vals.clone(), Extension::Restrict)?));
    }
    let cell = h.powi(n as i32);
    let mut series = Vec::new();
    for idx in 0..pts {
        let vals: Vec<f64> = (0..n)
            .flat_map(|c| fields.iter().map(move |f| f[c * pts + idx]))
            .collect();
        if vals.iter().all(|v| *v == 0.0) {
            continue;
        }
        series.push((cell, Series::new(times.clone(), tw.clone(), n, vals)?));
    }
    Ok(SpaceTimeSamples { slices, series, t_end })
}

/// How the solution norm is obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Quadrature of the anisotropic norm itself.
    Direct,
    /// The weighted interior functional that dominates it (smoothness
    /// `α + 1/p < 1` only).
    WeightedBound(IntegralGrid),
}

/// Interior quadrature nodes of the response to `src` on `(0, T)`, laid out
/// by `grid` in units of `r` around `center`, with the derivatives the
/// weighted functionals read. `mirrored` evaluates the quadrant
/// `x′ ≥ center` only and weights it by `2^{n−1}`, which is exact for a
/// centred atom. `high` adds the second-order terms; the mixed tangential
/// second derivatives `D_j D_k`, `j ≠ k`, are not among them.
pub fn interior_samples(
    solver: &Solver,
    src: &TangentialSource,
    center: &[f64],
    r: f64,
    t_end: f64,
    grid: &IntegralGrid,
    mirrored: bool,
    high: bool,
) -> Result<Vec<InteriorSample>> {
    let n = src.dim();
    let mut tan = grid.tan_nodes(r);
    if !mirrored {
        let neg: Vec<(f64, f64)> = tan.iter().rev().map(|&(x, w)| (-x, w)).collect();
        tan = neg.into_iter().chain(tan).collect();
    }
    let axes: Vec<Vec<f64>> = center.iter().map(|c| tan.iter().map(|(x, _)| c + x).collect()).collect();
    let mut tw = vec![1.0];
    for _ in 1..n {
        tw = tw.iter().flat_map(|a| tan.iter().map(move |(_, w)| a * w)).collect();
    }
    let mirror = if mirrored { 2f64.powi(n as i32 - 1) } else { 1.0 };
    let xb: Vec<f64> = grid.normal_breaks.iter().map(|v| v * r).collect();
    let mut tb: Vec<f64> = grid.time_breaks.iter().map(|v| v * r * r).filter(|v| *v < t_end).collect();
    tb.push(t_end);
    let dirs = || (1..n as u8).map(|k| DerivOrder::new(0, 1, 0).along(k));
    let mut spatial = vec![DerivOrder::new(1, 0, 0)];
    spatial.extend(dirs());
    let mut orders = vec![DerivOrder::ZERO, DerivOrder::new(0, 0, 1)];
    orders.extend(spatial.iter().copied());
    let (mut second, mut mixed) = (Vec::new(), Vec::new());
    if high {
        second.push(DerivOrder::new(2, 0, 0));
        second.extend(dirs().map(|d| DerivOrder { k0: 2, ..d }));
        second.extend(dirs().map(|d| DerivOrder { l0: 1, ..d }));
        mixed.extend(spatial.iter().map(|d| DerivOrder { m0: 1, ..*d }));
        orders.extend(second.iter().chain(&mixed).copied());
    }
    let ns = spatial.len();
    let nodes = parabolic_nodes(&xb, &tb, grid.order)?;
    let jobs: Vec<_> = nodes
        .iter()
        .flat_map(|&(x_n, t, _)| orders.iter().map(move |&d| (x_n, t, d)))
        .collect();
    let planes = solver.evaluate_planes(src, &axes, &jobs)?;
    let mut samples = Vec::new();
    for (&(x_n, t, w), group) in nodes.iter().zip(planes.chunks(orders.len())) {
        let (u, dt) = (&group[0], &group[1]);
        let du = &group[2..2 + ns];
        let rest = &group[2 + ns..];
        let (d2, dxt) = rest.split_at(second.len());
        let flat = |pls: &[Vec<Vec<f64>>], q: usize| -> Vec<f64> { pls.iter().flat_map(|pl| pl[q][..n].to_vec()).collect() };
        for (q, wt) in tw.iter().enumerate() {
            samples.push(InteriorSample {
                du: flat(du, q),
                dt: dt[q][..n].to_vec(),
                d2u: flat(d2, q),
                dxdt: flat(dxt, q),
                ..InteriorSample::new(x_n, t, mirror * w * wt, u[q][..n].to_vec())
            });
        }
    }
    Ok(samples)
}

/// `(weighted functional)^{1/p}` of `u` at smoothness `s` over `(0, T)`.
fn weighted_solution_norm(solver: &Solver, atom: &Atom, s: f64, p: f64, t_end: f64, grid: &IntegralGrid) -> Result<f64> {
    let src = source(atom)?;
    let samples = interior_samples(solver, &src, &atom.center_tan, atom.r, t_end, grid, true, false)?;
    Ok(weighted_functional_low(&samples, s, p)?.powf(1.0 / p))
}

/// `‖u‖_{B^{α+1/p,(α+1/p)/2}_p} / ‖g‖_{B^{α,α/2}_p}` over `(0, T)` for the
/// template dilated to each radius, with `u` the response to `g`.
///
/// The direct route works for every `α`. The weighted route refuses
/// `α = 1 − 1/p`: there the solution smoothness is exactly one and the
/// weighted functionals only reach it by interpolation.
pub fn main_estimate(
    solver: &Solver,
    template: &Atom,
    radii: &[f64],
    t_end: f64,
    route: &Route,
    grid: &NormGrid,
) -> Result<MainEstimateReport> {
    let (alpha, p) = (template.alpha, template.p);
    if let Route::WeightedBound(_) = route {
        if (alpha - (1.0 - 1.0 / p)).abs() < 1e-12 {
            return Err(Error::ExcludedExponent { alpha, p });
        }
        if alpha + 1.0 / p > 1.0 {
            return Err(Error::UnsupportedOrder(format!(
                "weighted route needs alpha + 1/p < 1, got {}",
                alpha + 1.0 / p
            )));
        }
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::param("T", "must be positive"));
    }
    let n = template.dim();
    let mut report = MainEstimateReport {
        alpha,
        p,
        t_end,
        radii: radii.to_vec(),
        solution_norms: Vec::new(),
        data_norms: Vec::new(),
        ratios: Vec::new(),
        spread: 1.0,
    };
    for &r in radii {
        let atom = centred(template, r)?;
        if atom.scale == 0.0 {
            report.solution_norms.push(0.0);
            report.data_norms.push(0.0);
            report.ratios.push(0.0);
            continue;
        }
        if atom.t_end() > t_end {
            return Err(Error::Contract(format!("atom of radius {r} outlives the horizon T = {t_end}")));
        }
        let dh = grid.data_h * r;
        let half = (atom.half_side() / dh).ceil() * dh + dh;
        let tau = grid.data_tau * r * r;
        let steps = (t_end / tau).round();
        let e = AtomExpansion::single(atom.clone(), 1);
        let data = BoundaryField::from_fn(n, half, dh, t_end / steps, t_end, |y, s| e.value(y, s))?;
        let gn = anisotropic_norm(&SpaceTimeSamples::from_boundary(&data)?, alpha, p)?.value;
        let un = match route {
            Route::Direct => anisotropic_norm(&solution_samples(solver, &atom, t_end, grid)?, alpha + 1.0 / p, p)?.value,
            Route::WeightedBound(ig) => weighted_solution_norm(solver, &atom, alpha + 1.0 / p, p, t_end, ig)?,
        };
        report.solution_norms.push(un);
        report.data_norms.push(gn);
        report.ratios.push(un / gn);
    }
    report.spread = spread(&report.ratios);
    Ok(report)
}
