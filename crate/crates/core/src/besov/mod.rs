//! Besov seminorms of sampled fields, the anisotropic norm
//! `∫_I ‖u(·,t)‖^p_{B^α_p} dt + ∫_Ω ‖u(x,·)‖^p_{B^{α/2}_p(I)} dx`, and the
//! weighted functionals that bound it from the interior.
//!
//! Everything here is quadrature over samples that callers supply; nothing
//! evaluates the solver.

mod lattice;
mod series;
mod weighted;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryField;
use crate::{Error, Result};

pub use lattice::{Difference, Extension, Lattice};
pub use series::Series;
pub use weighted::{parabolic_nodes, weight_integral, weighted_functional_high, weighted_functional_low, InteriorSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    BesovSpace,
    BesovTime,
    Anisotropic,
    WeightedLow,
    WeightedHigh,
}

impl NormKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "besov_space" => NormKind::BesovSpace,
            "besov_time" => NormKind::BesovTime,
            "anisotropic" => NormKind::Anisotropic,
            "weighted_low" => NormKind::WeightedLow,
            "weighted_high" => NormKind::WeightedHigh,
            _ => return Err(Error::param("norms.kinds", format!("unknown norm kind `{s}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::BesovSpace => "besov_space",
            NormKind::BesovTime => "besov_time",
            NormKind::Anisotropic => "anisotropic",
            NormKind::WeightedLow => "weighted_low",
            NormKind::WeightedHigh => "weighted_high",
        }
    }
}

/// One computed norm. For the anisotropic kind `value^p = space + time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub alpha: f64,
    pub p: f64,
    /// Weight exponent, when the functional has one.
    pub beta: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub value: f64,
    pub grid_h: f64,
    pub grid_tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_part: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_part: Option<f64>,
}

/// A space-time field prepared for the anisotropic norm: spatial lattices
/// at weighted times, and time series at weighted spatial points.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeSamples {
    /// `(t_k, w_k, u(·, t_k))`.
    pub slices: Vec<(f64, f64, Lattice)>,
    /// `(w_x, u(x, ·))`.
    pub series: Vec<(f64, Series)>,
    pub t_end: f64,
}

impl SpaceTimeSamples {
    /// Boundary data on its own grid: the tangential box with zero extension
    /// outside it, trapezoid weights in time on `(0, T)`.
    pub fn from_boundary(g: &BoundaryField) -> Result<Self> {
        let m = g.dim - 1;
        let nodes = g.nodes();
        let per = g.points_per_slice();
        let times: Vec<f64> = (0..=g.steps()).map(|k| g.time(k)).collect();
        let tw = Series::trapezoid(&times);
        let shape = vec![nodes; m];
        let origin = vec![g.coord(0); m];
        let mut slices = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            let vals: Vec<f64> = (0..g.dim).flat_map(|c| g.slice(k, c)).collect();
            let lat = Lattice::new(origin.clone(), g.spacing_tan, shape.clone(), g.dim, vals, Extension::Zero)?;
            slices.push((t, tw[k], lat));
        }
        let cell = g.spacing_tan.powi(m as i32);
        let mut series = Vec::new();
        for idx in 0..per {
            let vals: Vec<f64> = (0..g.dim)
                .flat_map(|c| (0..times.len()).map(move |k| (k, c)))
                .map(|(k, c)| g.get(k, idx, c))
                .collect();
            if vals.iter().all(|v| *v == 0.0) {
                continue;
            }
            series.push((cell, Series::new(times.clone(), tw.clone(), g.dim, vals)?));
        }
        Ok(SpaceTimeSamples {
            slices,
            series,
            t_end: g.horizon,
        })
    }

    fn grid_h(&self) -> f64 {
        self.slices.iter().map(|s| s.2.h).fold(0.0, f64::max)
    }

    fn grid_tau(&self) -> f64 {
        let mut ts: Vec<f64> = self.slices.iter().map(|s| s.0).collect();
        ts.sort_by(f64::total_cmp);
        let a = ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let b = self
            .series
            .iter()
            .flat_map(|(_, s)| s.nodes.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max);
        a.max(b)
    }

    /// `∫_I ‖u(·,t)‖^p_{B^α_p} dt`.
    pub fn space_part(&self, alpha: f64, p: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (_, w, lat) in &self.slices {
            acc += w * lat.besov_pow(alpha, p)?;
        }
        Ok(acc)
    }

    /// `∫_Ω ‖u(x,·)‖^p_{B^{α/2}_p(I)} dx`.
    pub fn time_part(&self, alpha: f64, p: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (w, s) in &self.series {
            acc += w * s.besov_pow(alpha / 2.0, p)?;
        }
        Ok(acc)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::param("p", format!("must satisfy 1 < p < infinity, got {p}")))
    }
}

/// First-difference seminorm `|f|_{B^α_p}` for `0 < α < 1` (p-th root).
/// Use [`Lattice::seminorm_pow`] for the other difference orders.
pub fn besov_seminorm_space(f: &Lattice, alpha: f64, p: f64) -> Result<f64> {
    Ok(f.seminorm_pow(alpha, p, Difference::First)?.powf(1.0 / p))
}

/// Anisotropic norm of smoothness `(α, α/2)`, `0 < α < 2`.
pub fn anisotropic_norm(u: &SpaceTimeSamples, alpha: f64, p: f64) -> Result<NormReport> {
    check_p(p)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::param("alpha", format!("anisotropic norms need 0 < alpha < 2, got {alpha}")));
    }
    let space = u.space_part(alpha, p)?;
    let time = u.time_part(alpha, p)?;
    Ok(NormReport {
        kind: NormKind::Anisotropic,
        alpha,
        p,
        beta: None,
        t_end: u.t_end,
        value: (space + time).powf(1.0 / p),
        grid_h: u.grid_h(),
        grid_tau: u.grid_tau(),
        space_part: Some(space),
        time_part: Some(time),
    })
}

/// One of the Besov kinds (`besov_space`, `besov_time`, `anisotropic`).
pub fn norm_report(u: &SpaceTimeSamples, kind: NormKind, alpha: f64, p: f64) -> Result<NormReport> {
    let mut r = anisotropic_norm(u, alpha, p)?;
    let (s, t) = (r.space_part.unwrap_or(0.0), r.time_part.unwrap_or(0.0));
    match kind {
        NormKind::Anisotropic => return Ok(r),
        NormKind::BesovSpace => r.value = s.powf(1.0 / p),
        NormKind::BesovTime => r.value = t.powf(1.0 / p),
        _ => {
            return Err(Error::Contract(format!(
                "{} is a weighted functional; use weighted_report",
                kind.name()
            )))
        }
    }
    r.kind = kind;
    Ok(r)
}

/// Weighted functional as a report; `value` is the functional itself
/// (a p-th power form), `beta` the smaller weight exponent.
pub fn weighted_report(samples: &[InteriorSample], kind: NormKind, alpha: f64, p: f64) -> Result<NormReport> {
    let (value, beta) = match kind {
        NormKind::WeightedLow => (weighted_functional_low(samples, alpha, p)?, p - p * alpha),
        NormKind::WeightedHigh => (weighted_functional_high(samples, alpha, p)?, 2.0 * p - p * alpha),
        _ => return Err(Error::Contract(format!("{} is not a weighted functional", kind.name()))),
    };
    let t_end = samples.iter().map(|s| s.t).fold(0.0, f64::max);
    Ok(NormReport {
        kind,
        alpha,
        p,
        beta: Some(beta),
        t_end,
        value,
        grid_h: 0.0,
        grid_tau: 0.0,
        space_part: None,
        time_part: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{make_atom, AtomExpansion, Profile};

    fn atom_field(h: f64, tau: f64) -> BoundaryField {
        let atom = make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
        let e = AtomExpansion::single(atom, 1);
        BoundaryField::from_fn(3, 1.5, h, tau, 1.0, |y, s| e.value(y, s)).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let g = BoundaryField::zeros(3, 1.0, 0.25, 0.25, 1.0).unwrap();
        let r = anisotropic_norm(&SpaceTimeSamples::from_boundary(&g).unwrap(), 0.5, 2.0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn constant_in_time_data_have_only_lp_time_part() {
        let g = BoundaryField::from_fn(3, 1.0, 0.125, 0.25, 1.0, |y, _| {
            vec![(1.0 - y[0] * y[0]).max(0.0).powi(2) * (1.0 - y[1] * y[1]).max(0.0).powi(2), 0.0, 0.0]
        })
        .unwrap();
        let s = SpaceTimeSamples::from_boundary(&g).unwrap();
        let r = anisotropic_norm(&s, 0.5, 2.0).unwrap();
        let slice = &s.slices[0].2;
        // time part: T·‖g‖_p^p exactly; space part: T·‖g‖^p_{B^α_p}
        assert!((r.time_part.unwrap() - slice.lp_pow(2.0)).abs() < 1e-12);
        assert!((r.space_part.unwrap() - slice.besov_pow(0.5, 2.0).unwrap()).abs() < 1e-12);
        assert!((r.value.powi(2) - r.space_part.unwrap() - r.time_part.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn atom_norm_is_stable_under_refinement() {
        let a = anisotropic_norm(&SpaceTimeSamples::from_boundary(&atom_field(0.1, 0.05)).unwrap(), 0.5, 2.0).unwrap();
        let b = anisotropic_norm(&SpaceTimeSamples::from_boundary(&atom_field(0.05, 0.025)).unwrap(), 0.5, 2.0).unwrap();
        assert!(a.value.is_finite() && a.value > 0.0);
        assert!((a.value / b.value - 1.0).abs() < 0.05, "{} {}", a.value, b.value);
    }

    #[test]
    fn report_serializes_flat() {
        let r = NormReport {
            kind: NormKind::WeightedLow,
            alpha: 0.5,
            p: 2.0,
            beta: Some(1.0),
            t_end: 1.0,
            value: 0.25,
            grid_h: 0.1,
            grid_tau: 0.1,
            space_part: None,
            time_part: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"weighted_low","alpha":0.5,"p":2.0,"beta":1.0,"T":1.0,"value":0.25,"grid_h":0.1,"grid_tau":0.1}"#
        );
        assert!(NormKind::parse("bogus").is_err());
    }
}
