//! Weighted space-time functionals with weight `(x_n ∧ √t)^γ`.

use crate::numerics::GaussLegendre;
use crate::{Error, Result};

/// One quadrature node of an interior field with the derivatives the
/// functionals need. Empty vectors mean "not supplied".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InteriorSample {
    pub x_n: f64,
    pub t: f64,
    /// Quadrature weight, including the tangential measure.
    pub weight: f64,
    pub u: Vec<f64>,
    /// Spatial first derivatives, any flattening.
    pub du: Vec<f64>,
    pub dt: Vec<f64>,
    /// Spatial second derivatives.
    pub d2u: Vec<f64>,
    /// Mixed `D_x D_t u`.
    pub dxdt: Vec<f64>,
}

impl InteriorSample {
    pub fn new(x_n: f64, t: f64, weight: f64, u: Vec<f64>) -> Self {
        InteriorSample {
            x_n,
            t,
            weight,
            u,
            ..Default::default()
        }
    }

    /// `x_n ∧ √t`.
    pub fn scale(&self) -> f64 {
        self.x_n.min(self.t.sqrt())
    }
}

fn lp(v: &[f64], p: f64, what: &str) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Contract(format!("weighted functional needs {what}")));
    }
    Ok(v.iter().map(|x| x.abs().powf(p)).sum())
}

fn check(alpha: f64, p: f64, lo: f64, hi: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param("p", "must satisfy 1 < p < infinity"));
    }
    if !(alpha > lo && alpha < hi) {
        return Err(Error::param("alpha", format!("must lie in ({lo}, {hi}), got {alpha}")));
    }
    Ok(())
}

/// `∫∫ m^{p−pα}(|D_x u|^p + |u|^p) + m^{2p−pα}(|u|^p + |D_t u|^p)`, `m = x_n ∧ √t`.
///
/// Accepts `0 < α < 1 + 1/p`, the range where the smaller weight exponent
/// stays above −1; the trace embedding calls it with `α + 1/p`.
pub fn weighted_functional_low(samples: &[InteriorSample], alpha: f64, p: f64) -> Result<f64> {
    check(alpha, p, 0.0, 1.0 + 1.0 / p)?;
    let (e1, e2) = (p - p * alpha, 2.0 * p - p * alpha);
    let mut total = 0.0;
    for s in samples {
        let m = s.scale();
        let u = lp(&s.u, p, "u")?;
        let a = m.powf(e1) * (lp(&s.du, p, "D_x u")? + u);
        let b = m.powf(e2) * (u + lp(&s.dt, p, "D_t u")?);
        total += s.weight * (a + b);
    }
    Ok(total)
}

/// `∫∫ m^{2p−pα}(|D²_x u|^p + |D_x u|^p + |u|^p + |D_t u|^p)
///   + m^{3p−pα}(|D_t u|^p + |D_x D_t u|^p + |D_x u|^p)`.
///
/// Accepts `1 < α < 2 + 1/p`.
pub fn weighted_functional_high(samples: &[InteriorSample], alpha: f64, p: f64) -> Result<f64> {
    check(alpha, p, 1.0, 2.0 + 1.0 / p)?;
    let (e2, e3) = (2.0 * p - p * alpha, 3.0 * p - p * alpha);
    let mut total = 0.0;
    for s in samples {
        let m = s.scale();
        let du = lp(&s.du, p, "D_x u")?;
        let dt = lp(&s.dt, p, "D_t u")?;
        let a = m.powf(e2) * (lp(&s.d2u, p, "D²_x u")? + du + lp(&s.u, p, "u")? + dt);
        let b = m.powf(e3) * (dt + lp(&s.dxdt, p, "D_x D_t u")? + du);
        total += s.weight * (a + b);
    }
    Ok(total)
}

/// `∫₀¹∫₀¹ (x_n ∧ √t)^γ x_n^q dx_n dt`, split at `x_n² = t`.
pub fn weight_integral(gamma: f64, q: f64) -> f64 {
    2.0 / ((gamma + q + 1.0) * (gamma + q + 3.0)) + 2.0 / ((gamma + 2.0) * (gamma + q + 3.0))
}

/// Nodes and weights `(x_n, t, w)` on `(0, x_max) × (0, t_max)` that follow
/// the kink of `x_n ∧ √t`: for each time the normal axis is split at `√t`,
/// and time is integrated in `√t` over the given breakpoints.
pub fn parabolic_nodes(x_breaks: &[f64], t_breaks: &[f64], order: usize) -> Result<Vec<(f64, f64, f64)>> {
    let bad = |b: &[f64]| b.len() < 2 || b[0] != 0.0 || b.windows(2).any(|w| w[1] <= w[0]);
    if bad(x_breaks) || bad(t_breaks) || order == 0 {
        return Err(Error::Contract("breakpoints must start at 0 and increase".into()));
    }
    let gl = GaussLegendre::new(order);
    let mut out = Vec::new();
    for tw in t_breaks.windows(2) {
        let (wa, wb) = (tw[0].sqrt(), tw[1].sqrt());
        for (w, ww) in gl.mapped(wa, wb) {
            let t = w * w;
            let jac = 2.0 * w * ww;
            let r = t.sqrt();
            let mut cuts: Vec<f64> = x_breaks.to_vec();
            if r < *x_breaks.last().unwrap() && !cuts.contains(&r) {
                cuts.push(r);
                cuts.sort_by(f64::total_cmp);
            }
            for xw in cuts.windows(2) {
                for (x, wx) in gl.mapped(xw[0], xw[1]) {
                    out.push((x, t, jac * wx));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(order: usize) -> Vec<(f64, f64, f64)> {
        parabolic_nodes(&[0.0, 0.25, 0.5, 1.0], &[0.0, 0.0625, 0.25, 1.0], order).unwrap()
    }

    #[test]
    fn constant_field_oracle() {
        // u ≡ 1 on [0,1]ⁿ × (0,1), α = 1/2, p = 2: 17/30
        let s: Vec<InteriorSample> = unit_box(6)
            .into_iter()
            .map(|(x, t, w)| InteriorSample {
                du: vec![0.0; 9],
                dt: vec![0.0; 3],
                ..InteriorSample::new(x, t, w, vec![1.0, 0.0, 0.0])
            })
            .collect();
        let v = weighted_functional_low(&s, 0.5, 2.0).unwrap();
        assert!((weight_integral(1.0, 0.0) + weight_integral(3.0, 0.0) - 17.0 / 30.0).abs() < 1e-14);
        assert!((v - 17.0 / 30.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn linear_normal_field_oracle() {
        // u = x_n: |u|^p = x_n^p, |D_x u| = 1, the rest vanish
        let (alpha, p) = (1.5, 2.0);
        let s: Vec<InteriorSample> = unit_box(8)
            .into_iter()
            .map(|(x, t, w)| InteriorSample {
                du: vec![0.0, 0.0, 1.0],
                dt: vec![0.0],
                d2u: vec![0.0; 9],
                dxdt: vec![0.0; 3],
                ..InteriorSample::new(x, t, w, vec![x])
            })
            .collect();
        let v = weighted_functional_high(&s, alpha, p).unwrap();
        let (e2, e3) = (2.0 * p - p * alpha, 3.0 * p - p * alpha);
        let exact = weight_integral(e2, 0.0) + weight_integral(e2, p) + weight_integral(e3, 0.0);
        assert!((v / exact - 1.0).abs() < 1e-9, "{v} {exact}");
    }

    #[test]
    fn zero_field_and_homogeneity() {
        let mk = |c: f64| -> Vec<InteriorSample> {
            unit_box(4)
                .into_iter()
                .map(|(x, t, w)| InteriorSample {
                    du: vec![c * x.cos(), c * t],
                    dt: vec![c * x * t],
                    ..InteriorSample::new(x, t, w, vec![c * (x + t).sin()])
                })
                .collect()
        };
        assert_eq!(weighted_functional_low(&mk(0.0), 0.5, 3.0).unwrap(), 0.0);
        let a = weighted_functional_low(&mk(1.0), 0.5, 3.0).unwrap();
        let b = weighted_functional_low(&mk(-2.0), 0.5, 3.0).unwrap();
        assert!((b / a - 8.0).abs() < 1e-12);
    }

    #[test]
    fn larger_alpha_increases_value_where_weight_below_one() {
        let s: Vec<InteriorSample> = unit_box(4)
            .into_iter()
            .map(|(x, t, w)| InteriorSample {
                du: vec![0.5],
                dt: vec![-0.5],
                ..InteriorSample::new(x, t, w, vec![0.7])
            })
            .collect();
        let a = weighted_functional_low(&s, 0.25, 2.0).unwrap();
        let b = weighted_functional_low(&s, 0.75, 2.0).unwrap();
        // every weight base is at most 1, so the smaller exponents of the
        // larger α give the larger value
        assert!(b > a);
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let s = vec![InteriorSample::new(0.5, 0.5, 1.0, vec![1.0])];
        assert!(matches!(weighted_functional_low(&s, 0.5, 2.0), Err(Error::Contract(_))));
        assert!(weighted_functional_low(&s, 1.8, 2.0).is_err());
    }
}
