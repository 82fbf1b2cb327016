//! Kernel-level diagnostics: parabolic homogeneity, the vanishing tangential
//! moment of `G_ij`, and suprema of the structural decay ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::kernels::{all_orders, homogeneity_exponent, DerivOrder, KernelEvaluator, KernelKind, SpaceTimePoint};
use crate::numerics::GaussLegendre;
use crate::{Error, Result};

/// A kernel component that can be probed for homogeneity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Probe {
    K(usize, usize),
    G(usize, usize),
    A,
    PressureSmooth(usize),
}

impl Probe {
    pub fn name(&self) -> String {
        match *self {
            Probe::K(i, j) => format!("K{i}{j}"),
            Probe::G(i, j) => format!("G{i}{j}"),
            Probe::A => "A".into(),
            Probe::PressureSmooth(j) => format!("pi{j}"),
        }
    }

    fn kind(&self) -> KernelKind {
        match self {
            Probe::K(..) => KernelKind::K,
            Probe::G(..) => KernelKind::G,
            Probe::A => KernelKind::A,
            Probe::PressureSmooth(_) => KernelKind::PressureSmooth,
        }
    }

    pub fn eval(&self, kev: &KernelEvaluator, pt: &SpaceTimePoint, d: DerivOrder) -> Result<f64> {
        match *self {
            Probe::K(i, j) => kev.k_kernel(i, j, pt, d),
            Probe::G(i, j) => kev.g_kernel(i, j, pt, d),
            Probe::A => kev.poisson_heat_a(pt, d),
            Probe::PressureSmooth(j) => kev.pressure_kernel_smooth(j, pt, d),
        }
    }

    /// The default probe set: diagonal and off-diagonal `K`, one `G`, `A`, `π_1`.
    pub fn defaults(n: usize) -> Vec<Probe> {
        vec![Probe::K(1, 1), Probe::K(n, 1), Probe::G(2, 1), Probe::A, Probe::PressureSmooth(1)]
    }
}

/// `n` seeded interior points with `|x_i| ≤ 2` and `x_n, t ∈ [1/8, 2]`.
pub fn random_points(n: usize, count: usize, seed: u64) -> Vec<SpaceTimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x_tan = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            SpaceTimePoint::new(x_tan, rng.gen_range(0.125..2.0), rng.gen_range(0.125..2.0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub seed: u64,
    pub points: usize,
    pub lambdas: Vec<f64>,
    /// `max |λ^ν F(λx, λ²t) / F(x, t) − 1|` per probe.
    pub max_rel_err: Vec<(String, f64)>,
    pub worst: f64,
}

/// Scaling defect of every probe at seeded random points. The dilated
/// value comes from `oracle`, so two independent quadratures meet.
pub fn kernel_homogeneity(
    kev: &KernelEvaluator,
    oracle: &KernelEvaluator,
    probes: &[Probe],
    d: DerivOrder,
    seed: u64,
    count: usize,
    lambdas: &[f64],
) -> Result<HomogeneityReport> {
    let n = kev.cfg.dim;
    let pts = random_points(n, count, seed);
    let mut max_rel_err = Vec::new();
    for p in probes {
        let nu = homogeneity_exponent(p.kind(), n, d);
        let mut worst = 0.0f64;
        for pt in &pts {
            let f = p.eval(kev, pt, d)?;
            for &l in lambdas {
                let g = p.eval(oracle, &pt.dilate(l), d)?;
                let e = if f == 0.0 {
                    if g == 0.0 { 0.0 } else { f64::INFINITY }
                } else {
                    (l.powi(nu) * g / f - 1.0).abs()
                };
                worst = worst.max(e);
            }
        }
        max_rel_err.push((p.name(), worst));
    }
    let worst = max_rel_err.iter().fold(0.0f64, |m, (_, e)| m.max(*e));
    Ok(HomogeneityReport {
        seed,
        points: count,
        lambdas: lambdas.to_vec(),
        max_rel_err,
        worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub i: usize,
    pub j: usize,
    pub x_n: f64,
    pub t: f64,
    pub integral: f64,
    pub sup: f64,
    pub area: f64,
    /// `|∫G| / (sup|G| · area)`.
    pub defect: f64,
}

/// `∫ G_ij(y′, x_n, t) dy′` over the box `|y_k| ≤ half_width` by tensor
/// Gauss-Legendre panels (`n = 3` only).
pub fn moment_zero(
    kev: &KernelEvaluator,
    i: usize,
    j: usize,
    x_n: f64,
    t: f64,
    half_width: f64,
    panels: usize,
) -> Result<MomentRow> {
    if kev.cfg.dim != 3 {
        return Err(Error::Domain("the moment check integrates over a plane (n = 3)".into()));
    }
    let gl = GaussLegendre::new(8);
    // panels graded towards the origin, where G has its √t-scale structure
    let mut edges = vec![0.0];
    let s = (x_n * x_n + t).sqrt().min(half_width);
    let inner = panels / 2;
    for k in 1..=inner {
        edges.push(s * k as f64 / inner as f64);
    }
    let ratio = (half_width / s).powf(1.0 / (panels - inner).max(1) as f64);
    while edges.len() <= panels && *edges.last().unwrap() < half_width * (1.0 - 1e-12) {
        let next = (edges.last().unwrap() * ratio).min(half_width);
        edges.push(next);
    }
    let mut nodes = Vec::new();
    for w in edges.windows(2) {
        for (y, wt) in gl.mapped(w[0], w[1]) {
            nodes.push((y, wt));
            nodes.push((-y, wt));
        }
    }
    let (mut integral, mut sup) = (0.0, 0.0f64);
    for &(y1, w1) in &nodes {
        for &(y2, w2) in &nodes {
            let v = kev.g_kernel(i, j, &SpaceTimePoint::new(vec![y1, y2], x_n, t), DerivOrder::ZERO)?;
            integral += w1 * w2 * v;
            sup = sup.max(v.abs());
        }
    }
    let area = 4.0 * half_width * half_width;
    Ok(MomentRow {
        i,
        j,
        x_n,
        t,
        integral,
        sup,
        area,
        defect: if sup == 0.0 { 0.0 } else { integral.abs() / (sup * area) },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub order: String,
    /// `sup` over the base similarity grid.
    pub sup_ratio: f64,
    pub refined_sup: f64,
    pub refinement_drift: f64,
    /// `(|x′|/√t, x_n/√t)` at the refined supremum.
    pub argmax: (f64, f64),
}

/// Similarity coordinates reached by the log grid
/// `|x′|, x_n, √t ∈ 2^{−k..k}` with exponent step `1/s`.
fn similarity_grid(k: i32, s: i32) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for a in -2 * k * s..=2 * k * s {
        for b in -2 * k * s..=2 * k * s {
            // a = i − m and b = j − m with i, j, m ∈ [−k, k]
            if (a - b).abs() <= 2 * k * s {
                out.push((a as f64 / s as f64, b as f64 / s as f64));
            }
        }
    }
    out
}

/// Supremum of `kernel_bound_ratio` for `K_ij` over the log grid with
/// exponent step `1/subdiv`, per order, against the grid with half that step.
///
/// The ratio is invariant under `(x, t) → (λx, λ²t)`, so the three-axis
/// grid collapses to its similarity coordinates, evaluated at `t = 1`.
/// Tangential points lie along the oblique unit direction `(2, 1)/√5`.
pub fn kernel_decay(
    kev: &KernelEvaluator,
    pairs: &[(usize, usize)],
    orders: &[DerivOrder],
    k: i32,
    subdiv: i32,
) -> Result<Vec<DecayReport>> {
    let n = kev.cfg.dim;
    let mut dir = vec![0.0; n - 1];
    dir[0] = 2.0 / 5f64.sqrt();
    if n > 2 {
        dir[1] = 1.0 / 5f64.sqrt();
    }
    let base = similarity_grid(k, subdiv);
    let fine = similarity_grid(k, 2 * subdiv);
    let mut out = Vec::new();
    for &d in orders {
        let mut sup = 0.0f64;
        let mut fine_sup = 0.0f64;
        let mut arg = (0.0, 0.0);
        for &(a, b) in &fine {
            let (xt, xn) = (2f64.powf(a), 2f64.powf(b));
            let pt = SpaceTimePoint::new(dir.iter().map(|v| v * xt).collect(), xn, 1.0);
            let mut v = 0.0f64;
            for &(i, j) in pairs {
                v = v.max(kev.kernel_bound_ratio(i, j, &pt, d)?);
            }
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite bound ratio at ({xt}, {xn}, 1)")));
            }
            if v > fine_sup {
                fine_sup = v;
                arg = (xt, xn);
            }
            if base.contains(&(a, b)) {
                sup = sup.max(v);
            }
        }
        out.push(DecayReport {
            order: d.to_string(),
            sup_ratio: sup,
            refined_sup: fine_sup,
            refinement_drift: if sup > 0.0 { (fine_sup - sup).abs() / sup } else { 0.0 },
            argmax: arg,
        });
    }
    Ok(out)
}

/// Orders covered by the decay check.
pub fn decay_orders() -> Vec<DerivOrder> {
    all_orders()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::QuadratureConfig;

    fn kev() -> KernelEvaluator {
        KernelEvaluator::new(QuadratureConfig {
            rel_tol: 1e-9,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn seeded_points_are_interior_and_repeatable() {
        let a = random_points(3, 5, 7);
        assert_eq!(a, random_points(3, 5, 7));
        assert!(a.iter().all(|p| p.check_interior().is_ok()));
    }

    #[test]
    fn homogeneity_holds_at_a_few_points() {
        let nested = KernelEvaluator::named(kev().cfg, "nested").unwrap();
        let r = kernel_homogeneity(&kev(), &nested, &Probe::defaults(3), DerivOrder::ZERO, 1, 2, &[0.5, 2.0]).unwrap();
        assert!(r.worst <= 1e-6, "{r:?}");
    }

    #[test]
    fn similarity_grid_shape() {
        assert_eq!(similarity_grid(1, 1).len(), 19);
        let base = similarity_grid(2, 2);
        let fine = similarity_grid(2, 4);
        assert!(base.iter().all(|p| fine.contains(p)));
    }
}
