//! Pointwise bounds on the response to one atom, and sweeps that compare
//! them with solver values.
//!
//! Every bound is written with constant one, so a sweep's supremum is the
//! empirical constant. Sweep coordinates are in units of the atom radius
//! (`r` in space, `r²` in time), which makes the sweep itself dilation
//! invariant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::boundary::{Atom, AtomExpansion};
use crate::kernels::DerivOrder;
use crate::solver::{Solver, TangentialSource};
use crate::{fmt_num, Error, Result};

/// The four families of pointwise bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Long times, `t ≥ 4r²`.
    FarField,
    /// Short times, all four sub-regions.
    NearField,
    /// Short times near the atom, `k0 ≥ 1`.
    TangentialDerivs,
    /// Short times near the atom, `l0 ≥ 1, k0 = 0`, with the second log
    /// factor read as `ln(1 + t/x_n)`.
    NormalDerivs,
    /// Same, with the dilation-consistent `ln(1 + t/x_n²)`.
    NormalDerivsParabolic,
}

impl BoundKind {
    pub fn id(self) -> &'static str {
        match self {
            BoundKind::FarField => "far_field",
            BoundKind::NearField => "near_field",
            BoundKind::TangentialDerivs => "tangential_derivs",
            BoundKind::NormalDerivs => "normal_derivs",
            BoundKind::NormalDerivsParabolic => "normal_derivs_parabolic",
        }
    }

    pub fn from_id(id: &str) -> BoundKind {
        match id {
            "far_field" => BoundKind::FarField,
            "near_field" => BoundKind::NearField,
            "tangential_derivs" => BoundKind::TangentialDerivs,
            "normal_derivs" => BoundKind::NormalDerivs,
            _ => BoundKind::NormalDerivsParabolic,
        }
    }

    /// Whether the bound is homogeneous under `(x, t, r) → (λx, λ²t, λr)`.
    pub fn dilation_invariant(self) -> bool {
        self != BoundKind::NormalDerivs
    }

    /// Orders exercised by the default sweeps.
    pub fn default_orders(self) -> Vec<DerivOrder> {
        let o = |l, k, m| DerivOrder::new(l, k, m);
        match self {
            BoundKind::FarField => vec![o(0, 0, 0), o(1, 0, 0), o(0, 1, 0)],
            BoundKind::NearField => vec![o(0, 0, 0), o(1, 0, 0)],
            BoundKind::TangentialDerivs => vec![o(0, 1, 0), o(1, 1, 0)],
            BoundKind::NormalDerivs | BoundKind::NormalDerivsParabolic => vec![o(1, 0, 0), o(2, 0, 0)],
        }
    }

    pub fn default_sweep(self) -> Sweep {
        let heights = vec![0.0625, 0.125, 0.25, 0.5, 1.0, 2.0];
        // the data peak at t = r²/2, so short-time grids step by two through it
        let times = vec![0.125, 0.25, 0.5, 1.0, 2.0];
        match self {
            BoundKind::FarField => Sweep::new(vec![0.0, 1.0, 4.0], vec![0.25, 1.0, 4.0], vec![4.0, 16.0, 64.0]),
            BoundKind::NearField => Sweep::new(vec![0.0, 1.0, 4.0], heights, times),
            _ => Sweep::new(vec![0.0, 0.25, 0.5, 1.0], heights, times),
        }
    }

    fn admits(self, d: DerivOrder) -> Result<()> {
        let ok = match self {
            BoundKind::FarField | BoundKind::NearField => true,
            BoundKind::TangentialDerivs => d.k0 >= 1 && d.m0 == 0,
            BoundKind::NormalDerivs | BoundKind::NormalDerivsParabolic => d.l0 >= 1 && d.k0 == 0 && d.m0 == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("order {d} is outside the hypotheses of the {} bound", self.id())))
        }
    }
}

/// The partition used by every sweep: `t` against `4r²`, `|x′|` against `2r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NearInside,
    NearOutside,
    FarInside,
    FarOutside,
}

impl Region {
    pub fn classify(tan_norm: f64, t: f64, r: f64) -> Region {
        let far = t >= 4.0 * r * r;
        let inside = tan_norm <= 2.0 * r;
        match (far, inside) {
            (false, true) => Region::NearInside,
            (false, false) => Region::NearOutside,
            (true, true) => Region::FarInside,
            (true, false) => Region::FarOutside,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::NearInside => "near_inside",
            Region::NearOutside => "near_outside",
            Region::FarInside => "far_inside",
            Region::FarOutside => "far_outside",
        }
    }
}

/// Bound on `|D^d u|` at `(x′, x_n, t)` for an atom of radius `r` with size
/// budget `a = r^{α−(n+1)/p}`, or `None` when the point lies outside the
/// family's hypotheses.
pub fn atom_bound(kind: BoundKind, d: DerivOrder, n: usize, tan_norm: f64, x_n: f64, t: f64, r: f64, a: f64) -> Option<f64> {
    let nf = n as f64;
    let (l0, k0, m0) = (d.l0 as f64, d.k0 as f64, d.m0 as f64);
    let x2 = x_n * x_n;
    let near = t < 4.0 * r * r;
    let inside = tan_norm <= 2.0 * r;
    let low = x2 <= t;
    let b = match kind {
        BoundKind::FarField => {
            if near {
                return None;
            }
            let head = a * r.powf(nf + 1.0) * t.powf(-0.5 - m0);
            if inside {
                head * (x2 + t).powf(-(nf + k0 + l0) / 2.0)
            } else {
                head * (tan_norm * tan_norm + x2 + t).powf(-(nf + k0) / 2.0) * (x2 + t).powf(-l0 / 2.0)
            }
        }
        BoundKind::NearField => {
            if !near {
                return None;
            }
            let s = k0 + l0;
            let head = a * r.powf(-2.0 * m0);
            match (inside, low) {
                (true, true) if s >= 1.0 => head * x_n.powf(-s),
                (true, true) => head * (1.0 + t / x2).ln(),
                (true, false) => head * x_n.powf(-(s + 1.0)) * t.sqrt(),
                (false, _) => {
                    let far = r.powf(nf - 1.0) * (tan_norm * tan_norm + x2).powf(-(nf + k0) / 2.0);
                    if low {
                        let tail = if d.l0 == 1 {
                            (1.0 + t / x2).ln()
                        } else {
                            (x2 + t).powf((1.0 - l0) / 2.0)
                        };
                        head * far * tail
                    } else {
                        head * far * x_n.powf(-l0) * t.sqrt()
                    }
                }
            }
        }
        BoundKind::TangentialDerivs => {
            if !near || !inside {
                return None;
            }
            let s = k0 + l0;
            if low {
                if d.k0 + d.l0 == 1 {
                    a / r * (1.0 + t / x2).ln()
                } else {
                    a / r * x_n.powf(1.0 - s)
                }
            } else if x_n <= r {
                a / r * x_n.powf(-s) * t.sqrt()
            } else {
                a * r.powf(nf - 2.0) * x_n.powf(-(nf - 1.0 + s)) * t.sqrt()
            }
        }
        BoundKind::NormalDerivs | BoundKind::NormalDerivsParabolic => {
            if !near || !inside {
                return None;
            }
            let lr = (1.0 + r / x_n).ln();
            if low {
                if d.l0 == 1 {
                    let lt = if kind == BoundKind::NormalDerivs {
                        (1.0 + t / x_n).ln()
                    } else {
                        (1.0 + t / x2).ln()
                    };
                    a / r * lr * lt
                } else {
                    a / r * x_n.powf(1.0 - l0) * lr
                }
            } else {
                let f = if x_n <= r { lr } else { r / x_n };
                a / r * x_n.powf(-l0) * t.sqrt() * f
            }
        }
    };
    Some(b)
}

/// Tensor sweep in units of the atom radius: every tangential axis takes
/// the values `tan·r`, heights `normal·r`, times `times·r²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub tan: Vec<f64>,
    pub normal: Vec<f64>,
    pub times: Vec<f64>,
}

fn midpoints(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    for (i, &a) in v.iter().enumerate() {
        if i > 0 {
            let p = v[i - 1];
            out.push(if p == 0.0 { a / 2.0 } else { (p * a).sqrt() });
        }
        out.push(a);
    }
    out
}

impl Sweep {
    pub fn new(tan: Vec<f64>, normal: Vec<f64>, times: Vec<f64>) -> Self {
        Sweep { tan, normal, times }
    }

    /// Geometric midpoints inserted on every axis (arithmetic next to zero).
    pub fn refined(&self) -> Sweep {
        Sweep {
            tan: midpoints(&self.tan),
            normal: midpoints(&self.normal),
            times: midpoints(&self.times),
        }
    }

    pub fn describe(&self) -> String {
        let j = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ");
        format!("x'/r in {{{}}}; x_n/r in {{{}}}; t/r^2 in {{{}}}", j(&self.tan), j(&self.normal), j(&self.times))
    }

    fn check(&self) -> Result<()> {
        let pos = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
        let tan_ok = !self.tan.is_empty() && self.tan.iter().all(|x| *x >= 0.0 && x.is_finite());
        if tan_ok && pos(&self.normal) && pos(&self.times) {
            Ok(())
        } else {
            Err(Error::param("sweep", "heights and times must be positive, tangential offsets non-negative"))
        }
    }
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub order: DerivOrder,
    pub region: Region,
    pub x_tan: Vec<f64>,
    pub x_n: f64,
    pub t: f64,
    pub r: f64,
    /// `|D^d u|`, Euclidean over velocity components.
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Where a supremum was attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArgMax {
    pub order: String,
    pub region: Region,
    pub x_tan: Vec<f64>,
    pub x_n: f64,
    pub t: f64,
    pub r: f64,
}

/// Empirical constant of one bound family over a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRatioReport {
    pub bound_id: &'static str,
    pub grid: String,
    pub alpha: f64,
    pub p: f64,
    pub orders: Vec<String>,
    pub sup_ratio: f64,
    pub argmax: Option<ArgMax>,
    /// `|sup(refined) − sup| / sup`.
    pub refinement_drift: f64,
    /// `|sup(dilated by 2) − sup| / sup`.
    pub scale_drift: f64,
    /// Whether `scale_drift` is meaningful for this family.
    pub scale_checked: bool,
    pub region_sups: BTreeMap<Region, f64>,
    pub order_sups: BTreeMap<String, f64>,
    pub points: usize,
}

impl BoundRatioReport {
    pub fn passes(&self, drift_tol: f64, scale_tol: f64) -> bool {
        self.sup_ratio.is_finite()
            && self.refinement_drift <= drift_tol
            && (!self.scale_checked || self.scale_drift <= scale_tol)
    }
}

/// Ratios `|D^d u| / bound` at every admissible sweep point.
pub fn sweep_ratios(solver: &Solver, atom: &Atom, kind: BoundKind, orders: &[DerivOrder], sweep: &Sweep) -> Result<Vec<RatioRow>> {
    sweep.check()?;
    let n = atom.dim();
    let r = atom.r;
    let a = atom.size_budget();
    let src = TangentialSource::from_atoms(&AtomExpansion::single(atom.clone(), 1))?;
    let axes: Vec<Vec<f64>> = atom.center_tan.iter().map(|c| sweep.tan.iter().map(|v| c + v * r).collect()).collect();
    let offsets = tensor(&sweep.tan, n - 1);
    let mut jobs = Vec::new();
    let mut plans = Vec::new();
    for &d in orders {
        kind.admits(d)?;
        for &tn in &sweep.times {
            let t = tn * r * r;
            for &xn in &sweep.normal {
                let x_n = xn * r;
                let bounds: Vec<Option<f64>> = offsets
                    .iter()
                    .map(|o| atom_bound(kind, d, n, norm(o) * r, x_n, t, r, a))
                    .collect();
                if bounds.iter().any(Option::is_some) {
                    jobs.push((x_n, t, d));
                    plans.push(bounds);
                }
            }
        }
    }
    let planes = solver.evaluate_planes(&src, &axes, &jobs)?;
    let mut rows = Vec::new();
    for ((&(x_n, t, d), bounds), plane) in jobs.iter().zip(&plans).zip(&planes) {
        for ((o, b), vals) in offsets.iter().zip(bounds).zip(plane) {
            let Some(b) = *b else { continue };
            let value = vals[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
            rows.push(RatioRow {
                order: d,
                region: Region::classify(norm(o) * r, t, r),
                x_tan: o.iter().zip(&atom.center_tan).map(|(v, c)| c + v * r).collect(),
                x_n,
                t,
                r,
                value,
                bound: b,
                ratio: value / b,
            });
        }
    }
    Ok(rows)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// All `m`-tuples over `vals`, last coordinate fastest.
fn tensor(vals: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Supremum with the first maximal row winning ties.
fn sup(rows: &[RatioRow]) -> (f64, Option<&RatioRow>) {
    let mut best: (f64, Option<&RatioRow>) = (0.0, None);
    for row in rows {
        if best.1.is_none() || row.ratio > best.0 {
            best = (row.ratio, Some(row));
        }
    }
    best
}

fn drift(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs().max(f64::MIN_POSITIVE)
    }
}

/// Full check: base sweep, refined sweep, and the base sweep for the atom
/// dilated by two. The rows of the base sweep are returned for plotting.
pub fn check_bounds(
    solver: &Solver,
    atom: &Atom,
    kind: BoundKind,
    orders: &[DerivOrder],
    sweep: &Sweep,
) -> Result<(BoundRatioReport, Vec<RatioRow>)> {
    Ok(check_readings(solver, atom, &[kind], orders, sweep)?.remove(0))
}

/// Several bound families over one set of solver values; the families must
/// share their domain (the readings of one bound).
fn check_readings(
    solver: &Solver,
    atom: &Atom,
    kinds: &[BoundKind],
    orders: &[DerivOrder],
    sweep: &Sweep,
) -> Result<Vec<(BoundRatioReport, Vec<RatioRow>)>> {
    let first = kinds[0];
    let base = sweep_ratios(solver, atom, first, orders, sweep)?;
    let fine = sweep_ratios(solver, atom, first, orders, &sweep.refined())?;
    let big = atom.dilate(2.0);
    let dilated = sweep_ratios(solver, &big, first, orders, sweep)?;
    let mut out = Vec::new();
    for &kind in kinds {
        let rows = rebound(&base, kind, atom);
        let fine = rebound(&fine, kind, atom);
        let dilated = rebound(&dilated, kind, &big);
        out.push((summarize(kind, atom, orders, sweep, &rows, &fine, &dilated), rows));
    }
    Ok(out)
}

/// The same values against another reading of the bound.
fn rebound(rows: &[RatioRow], kind: BoundKind, atom: &Atom) -> Vec<RatioRow> {
    let (n, a) = (atom.dim(), atom.size_budget());
    rows.iter()
        .filter_map(|row| {
            let tn = norm(&row.x_tan.iter().zip(&atom.center_tan).map(|(x, c)| x - c).collect::<Vec<_>>());
            let b = atom_bound(kind, row.order, n, tn, row.x_n, row.t, row.r, a)?;
            Some(RatioRow {
                bound: b,
                ratio: row.value / b,
                ..row.clone()
            })
        })
        .collect()
}

fn summarize(
    kind: BoundKind,
    atom: &Atom,
    orders: &[DerivOrder],
    sweep: &Sweep,
    rows: &[RatioRow],
    fine: &[RatioRow],
    dilated: &[RatioRow],
) -> BoundRatioReport {
    let (s, arg) = sup(rows);
    let mut region_sups = BTreeMap::new();
    let mut order_sups = BTreeMap::new();
    for row in rows {
        let e = region_sups.entry(row.region).or_insert(0.0f64);
        *e = e.max(row.ratio);
        let e = order_sups.entry(row.order.to_string()).or_insert(0.0f64);
        *e = e.max(row.ratio);
    }
    BoundRatioReport {
        bound_id: kind.id(),
        grid: sweep.describe(),
        alpha: atom.alpha,
        p: atom.p,
        orders: orders.iter().map(|d| d.to_string()).collect(),
        sup_ratio: s,
        argmax: arg.map(|r| ArgMax {
            order: r.order.to_string(),
            region: r.region,
            x_tan: r.x_tan.clone(),
            x_n: r.x_n,
            t: r.t,
            r: r.r,
        }),
        refinement_drift: drift(s, sup(fine).0),
        scale_drift: drift(s, sup(dilated).0),
        scale_checked: kind.dilation_invariant(),
        region_sups,
        order_sups,
        points: rows.len(),
    }
}

pub fn check_far_field(solver: &Solver, atom: &Atom, sweep: &Sweep) -> Result<BoundRatioReport> {
    let kind = BoundKind::FarField;
    Ok(check_bounds(solver, atom, kind, &kind.default_orders(), sweep)?.0)
}

pub fn check_near_field(solver: &Solver, atom: &Atom, sweep: &Sweep) -> Result<BoundRatioReport> {
    let kind = BoundKind::NearField;
    Ok(check_bounds(solver, atom, kind, &kind.default_orders(), sweep)?.0)
}

pub fn check_tangential_derivs(solver: &Solver, atom: &Atom, sweep: &Sweep) -> Result<BoundRatioReport> {
    let kind = BoundKind::TangentialDerivs;
    Ok(check_bounds(solver, atom, kind, &kind.default_orders(), sweep)?.0)
}

/// Both readings of the normal-derivative bound: as printed, then the
/// dilation-consistent one.
pub fn check_normal_derivs(solver: &Solver, atom: &Atom, sweep: &Sweep) -> Result<[BoundRatioReport; 2]> {
    let kinds = [BoundKind::NormalDerivs, BoundKind::NormalDerivsParabolic];
    let mut v = check_readings(solver, atom, &kinds, &kinds[0].default_orders(), sweep)?;
    let b = v.pop().map(|x| x.0);
    let a = v.pop().map(|x| x.0);
    match (a, b) {
        (Some(a), Some(b)) => Ok([a, b]),
        _ => Err(Error::Contract("missing bound reading".into())),
    }
}

/// Reports and rows for a family, with both readings for the normal one.
pub fn check_family(
    solver: &Solver,
    atom: &Atom,
    kind: BoundKind,
    orders: &[DerivOrder],
    sweep: &Sweep,
) -> Result<Vec<(BoundRatioReport, Vec<RatioRow>)>> {
    match kind {
        BoundKind::NormalDerivs | BoundKind::NormalDerivsParabolic => check_readings(
            solver,
            atom,
            &[BoundKind::NormalDerivs, BoundKind::NormalDerivsParabolic],
            orders,
            sweep,
        ),
        _ => check_readings(solver, atom, &[kind], orders, sweep),
    }
}

/// Raw ratios as CSV.
pub fn rows_to_csv(kind: BoundKind, rows: &[RatioRow]) -> String {
    let mut s = String::new();
    for row in rows {
        let _ = write!(s, "{},{},{},", kind.id(), row.order, row.region.name());
        for v in &row.x_tan {
            let _ = write!(s, "{},", fmt_num(*v));
        }
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_num(row.x_n),
            fmt_num(row.t),
            fmt_num(row.r),
            fmt_num(row.value),
            fmt_num(row.bound),
            fmt_num(row.ratio)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_atom, Profile};

    fn all_points(s: &Sweep, r: f64) -> Vec<(f64, f64, f64)> {
        let mut v = Vec::new();
        for o in tensor(&s.tan, 2) {
            for &x in &s.normal {
                for &t in &s.times {
                    v.push((norm(&o) * r, x * r, t * r * r));
                }
            }
        }
        v
    }

    #[test]
    fn regions_partition_every_point_once() {
        let s = Sweep::new(vec![0.0, 1.0, 2.0, 2.0001, 4.0], vec![0.5, 2.0], vec![0.25, 3.9999, 4.0, 16.0]).refined();
        let r = 0.7;
        let mut counts: BTreeMap<Region, usize> = BTreeMap::new();
        let pts = all_points(&s, r);
        for &(tn, _, t) in &pts {
            let reg = Region::classify(tn, t, r);
            let hits = [
                tn <= 2.0 * r && t < 4.0 * r * r,
                tn > 2.0 * r && t < 4.0 * r * r,
                tn <= 2.0 * r && t >= 4.0 * r * r,
                tn > 2.0 * r && t >= 4.0 * r * r,
            ];
            assert_eq!(hits.iter().filter(|h| **h).count(), 1);
            *counts.entry(reg).or_default() += 1;
        }
        assert_eq!(counts.values().sum::<usize>(), pts.len());
        assert_eq!(counts.len(), 4);
    }

    #[test]
    fn far_field_branches_agree_at_the_switch() {
        let n = 3;
        let r = 1.3;
        for d in crate::kernels::all_orders() {
            for &(x, t) in &[(0.1, 4.0), (1.0, 6.0), (5.0, 40.0)] {
                let t = t * r * r;
                let inside = atom_bound(BoundKind::FarField, d, n, 2.0 * r, x, t, r, 1.0).unwrap();
                let outside = atom_bound(BoundKind::FarField, d, n, 2.0 * r * (1.0 + 1e-12), x, t, r, 1.0).unwrap();
                let q = inside / outside;
                let cap = 2f64.powi(n as i32 + d.k0 as i32);
                assert!(q >= 1.0 && q <= cap, "{d} {q}");
            }
        }
    }

    #[test]
    fn near_field_branches_meet_within_a_constant() {
        // across x_n² = t the inside formulas differ by at most ln 2 or a
        // factor one; across |x′| = 2r by a power of 2 and 5
        let (n, r) = (3, 1.0);
        for d in [DerivOrder::new(0, 0, 0), DerivOrder::new(1, 0, 0), DerivOrder::new(0, 1, 1)] {
            let t: f64 = 0.5;
            let x = t.sqrt();
            let lo = atom_bound(BoundKind::NearField, d, n, 0.0, x, t, r, 1.0).unwrap();
            let hi = atom_bound(BoundKind::NearField, d, n, 0.0, x * (1.0 + 1e-12), t, r, 1.0).unwrap();
            assert!(lo / hi > 0.5 && lo / hi < 2.0, "{d} {lo} {hi}");
            let a = atom_bound(BoundKind::NearField, d, n, 2.0 * r, 0.3, t, r, 1.0).unwrap();
            let b = atom_bound(BoundKind::NearField, d, n, 2.0 * r * (1.0 + 1e-12), 0.3, t, r, 1.0).unwrap();
            assert!(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0);
            assert!(b / a < 2f64.powi(8) && a / b < 2f64.powi(8), "{d} {a} {b}");
        }
    }

    #[test]
    fn bounds_are_dilation_homogeneous() {
        let n = 3;
        let kinds = [
            BoundKind::FarField,
            BoundKind::NearField,
            BoundKind::TangentialDerivs,
            BoundKind::NormalDerivsParabolic,
        ];
        for kind in kinds {
            for d in kind.default_orders() {
                for &(tn, x, t) in &[(0.5, 0.1, 0.2), (3.0, 0.4, 0.05), (0.2, 2.0, 9.0), (5.0, 1.5, 1.0)] {
                    let (r, lam) = (0.8, 2.5);
                    let b0 = atom_bound(kind, d, n, tn, x, t, r, 1.0);
                    let b1 = atom_bound(kind, d, n, lam * tn, lam * x, lam * lam * t, lam * r, 1.0);
                    if let (Some(b0), Some(b1)) = (b0, b1) {
                        let deg = -(d.weight() as f64);
                        assert!((b1 / b0 / lam.powf(deg) - 1.0).abs() < 1e-12, "{kind:?} {d}");
                    }
                }
            }
        }
        // the printed double logarithm is not homogeneous
        let d = DerivOrder::new(1, 0, 0);
        let b0 = atom_bound(BoundKind::NormalDerivs, d, n, 0.0, 0.1, 0.5, 1.0, 1.0).unwrap();
        let b1 = atom_bound(BoundKind::NormalDerivs, d, n, 0.0, 0.2, 2.0, 2.0, 1.0).unwrap();
        assert!((b1 * 2.0 / b0 - 1.0).abs() > 1e-3);
    }

    #[test]
    fn refinement_keeps_the_original_points() {
        let s = BoundKind::NearField.default_sweep();
        let f = s.refined();
        for v in &s.tan {
            assert!(f.tan.contains(v));
        }
        assert_eq!(f.times.len(), 2 * s.times.len() - 1);
        assert_eq!(f.tan[1], 0.5);
    }

    #[test]
    fn inadmissible_orders_are_rejected() {
        let s = Solver::new(Default::default()).unwrap();
        let atom = make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
        let sw = BoundKind::TangentialDerivs.default_sweep();
        let r = sweep_ratios(&s, &atom, BoundKind::TangentialDerivs, &[DerivOrder::new(1, 0, 0)], &sw);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn far_point_ratio_is_finite_and_scale_invariant() {
        let s = Solver::new(crate::kernels::QuadratureConfig {
            rel_tol: 1e-6,
            ..Default::default()
        })
        .unwrap();
        let atom = make_atom(0.5, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
        let sw = Sweep::new(vec![1.0], vec![1.0], vec![8.0]);
        let d = [DerivOrder::ZERO];
        let a = sweep_ratios(&s, &atom, BoundKind::FarField, &d, &sw).unwrap();
        let b = sweep_ratios(&s, &atom.dilate(4.0), BoundKind::FarField, &d, &sw).unwrap();
        assert_eq!(a.len(), 1);
        assert!(a[0].ratio.is_finite() && a[0].ratio > 0.0);
        assert!((b[0].ratio / a[0].ratio - 1.0).abs() < 20.0 * 1e-6, "{} {}", a[0].ratio, b[0].ratio);
    }
}
