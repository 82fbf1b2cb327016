//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7/15) over
//! vector-like values, and fixed Gauss–Legendre rules.

use super::scalar::Jet;
use crate::{Error, Result};

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Clone {
    fn zeroed(&self) -> Self;
    /// `self += w · x`
    fn axpy(&mut self, w: f64, x: &Self);
    /// Max-norm of `self - other`.
    fn dist(&self, other: &Self) -> f64;
    /// Max-norm of `self`.
    fn size(&self) -> f64;
}

impl QuadValue for f64 {
    fn zeroed(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        *self += w * x;
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn size(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Jet {
    fn zeroed(&self) -> Self {
        Jet::default()
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        for (a, b) in self.0.iter_mut().zip(x.0.iter()) {
            *a += w * b;
        }
    }
    fn dist(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
    fn size(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl<T: QuadValue> QuadValue for Vec<T> {
    fn zeroed(&self) -> Self {
        self.iter().map(|v| v.zeroed()).collect()
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x.iter()) {
            a.axpy(w, b);
        }
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .fold(0.0, |m, (a, b)| m.max(a.dist(b)))
    }
    fn size(&self) -> f64 {
        self.iter().fold(0.0, |m, a| m.max(a.size()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Hard cap on the number of subintervals.
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance {
            rel,
            abs: 0.0,
            max_depth: 40,
            max_intervals: 400,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.max_depth = depth;
        self
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<V> {
    a: f64,
    b: f64,
    depth: u32,
    value: V,
    err: f64,
}

fn gk15<V, F>(f: &mut F, a: f64, b: f64) -> Result<(V, f64)>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc.zeroed();
    let mut g = fc.zeroed();
    k.axpy(WGK[7] * h, &fc);
    g.axpy(WG[3] * h, &fc);
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        k.axpy(WGK[i] * h, &f1);
        k.axpy(WGK[i] * h, &f2);
        if i % 2 == 1 {
            g.axpy(WG[i / 2] * h, &f1);
            g.axpy(WG[i / 2] * h, &f2);
        }
    }
    let err = k.dist(&g);
    Ok((k, err))
}

/// Adaptive integration of `f` over `[a, b]`; returns the estimate and its error bound.
///
/// The integrand may fail, in which case the error is propagated unchanged.
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<(V, f64)>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let (v0, e0) = gk15(&mut f, a, b)?;
    let mut panels = vec![Panel {
        a,
        b,
        depth: 0,
        value: v0.clone(),
        err: e0,
    }];
    let mut total = v0;
    let mut err_total = e0;
    loop {
        let floor = 1e-14 * panels.iter().map(|p| p.value.size()).sum::<f64>();
        let target = tol.abs.max(tol.rel * total.size()).max(floor);
        if err_total <= target {
            break;
        }
        let pick = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < tol.max_depth)
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i);
        let Some(i) = pick else {
            return Err(Error::Accuracy {
                estimate: err_total,
                target,
            });
        };
        if panels.len() >= tol.max_intervals {
            return Err(Error::Accuracy {
                estimate: err_total,
                target,
            });
        }
        let p = panels.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        let (vl, el) = gk15(&mut f, p.a, m)?;
        let (vr, er) = gk15(&mut f, m, p.b)?;
        total.axpy(-1.0, &p.value);
        total.axpy(1.0, &vl);
        total.axpy(1.0, &vr);
        err_total += el + er - p.err;
        panels.push(Panel {
            a: p.a,
            b: m,
            depth: p.depth + 1,
            value: vl,
            err: el,
        });
        panels.push(Panel {
            a: m,
            b: p.b,
            depth: p.depth + 1,
            value: vr,
            err: er,
        });
    }
    // Re-sum in a fixed order so the result does not depend on update history.
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut sum = panels[0].value.zeroed();
    let mut err = 0.0;
    for p in &panels {
        sum.axpy(1.0, &p.value);
        err += p.err;
    }
    Ok((sum, err))
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rules_are_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 24] {
            let g = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let v = g.integrate(|x| x.powi(deg as i32 - 1) + 1.0, 0.0, 1.0);
            assert!((v - (1.0 / deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let (v, _) = integrate(
            |x: f64| Ok((-(x - 0.3).powi(2) / 1e-3).exp()),
            -1.0,
            1.0,
            Tolerance::rel(1e-10),
        )
        .unwrap();
        let exact = (std::f64::consts::PI * 1e-3).sqrt();
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn adaptive_vector_values() {
        let (v, _) = integrate(
            |x: f64| Ok(vec![x.sin(), x.cos()]),
            0.0,
            std::f64::consts::PI,
            Tolerance::rel(1e-12),
        )
        .unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
    }

    #[test]
    fn reports_accuracy_failure() {
        let r: Result<(f64, f64)> = integrate(
            |x: f64| Ok(if x > 0.123 { 1.0 } else { 0.0 }),
            0.0,
            1.0,
            Tolerance::rel(1e-15).with_depth(3),
        );
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
