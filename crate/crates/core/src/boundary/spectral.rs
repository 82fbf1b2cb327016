//! Fourier multipliers on the periodic tangential box: Riesz transforms, the
//! data split and the gradient lift.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::BoundaryField;
use crate::kernels::{DerivOrder, SpaceTimePoint};
use crate::{Error, Result};

/// In-place multidimensional FFT of an `m`-dimensional cube with `nodes` per axis.
fn fft_nd(data: &mut [Complex64], nodes: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(nodes)
    } else {
        planner.plan_fft_forward(nodes)
    };
    let total = data.len();
    let mut stride = 1;
    let mut line = vec![Complex64::new(0.0, 0.0); nodes];
    while stride < total {
        let block = stride * nodes;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + off + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[start + off + i * stride] = *v;
                }
            }
        }
        stride = block;
    }
    if inverse {
        let s = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

fn dims_of(len: usize, nodes: usize) -> Result<usize> {
    if nodes < 2 {
        return Err(Error::param("nodes", "need at least two nodes per axis"));
    }
    let mut m = 0;
    let mut p = 1;
    while p < len {
        p *= nodes;
        m += 1;
    }
    if p != len || m == 0 {
        return Err(Error::Contract(format!("{len} samples do not form a cube with {nodes} per axis")));
    }
    Ok(m)
}

/// Signed integer wave numbers of flat index `idx` (last axis fastest).
fn wave_index(mut idx: usize, nodes: usize, m: usize, out: &mut [i64]) {
    for a in (0..m).rev() {
        let k = (idx % nodes) as i64;
        out[a] = if k > nodes as i64 / 2 { k - nodes as i64 } else { k };
        idx /= nodes;
    }
}

fn to_complex(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Riesz transform `R_j` (multiplier `−iξ_j/|ξ|`, 1-based `j`) of a periodic
/// grid function with `nodes` samples per axis. The zero mode maps to zero,
/// and so does every mode at the Nyquist index of axis `j`, where the
/// multiplier has no real-valued discrete counterpart.
pub fn riesz_transform(f: &[f64], nodes: usize, j: usize) -> Result<Vec<f64>> {
    let m = dims_of(f.len(), nodes)?;
    if j == 0 || j > m {
        return Err(Error::param("j", format!("must lie in 1..={m}")));
    }
    if f.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; f.len()]);
    }
    let mut data = to_complex(f);
    fft_nd(&mut data, nodes, false);
    let mut k = vec![0i64; m];
    let nyq = nodes % 2 == 0;
    for (idx, v) in data.iter_mut().enumerate() {
        wave_index(idx, nodes, m, &mut k);
        let rho = k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        let kj = k[j - 1];
        if rho == 0.0 || (nyq && kj.unsigned_abs() as usize * 2 == nodes) {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= Complex64::new(0.0, -(kj as f64) / rho);
        }
    }
    fft_nd(&mut data, nodes, true);
    Ok(data.iter().map(|c| c.re).collect())
}

/// `g = g¹ + g²` with `g¹ = (R g_n, g_n)` and `g² = (g′ − R g_n, 0)`, per time node.
pub fn split_boundary_data(g: &BoundaryField) -> Result<(BoundaryField, BoundaryField)> {
    let n = g.dim;
    let mut g1 = g.zeros_like();
    let mut g2 = g.zeros_like();
    for k in 0..=g.steps() {
        let gn = g.slice(k, n - 1);
        g1.set_slice(k, n - 1, &gn);
        for j in 1..n {
            let r = riesz_transform(&gn, g.nodes(), j)?;
            let gj = g.slice(k, j - 1);
            let rest: Vec<f64> = gj.iter().zip(&r).map(|(a, b)| a - b).collect();
            g1.set_slice(k, j - 1, &r);
            g2.set_slice(k, j - 1, &rest);
        }
    }
    Ok((g1, g2))
}

/// Values of the lift `φ` at one point, after applying a derivative order.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftValue {
    pub phi: f64,
    /// `(∂_1φ, …, ∂_nφ)`.
    pub grad: Vec<f64>,
    pub phi_t: f64,
}

/// Spectral single-layer lift of the normal data on the periodic box.
///
/// With `ρ = |ξ|` the lift is `φ̂(ξ, x_n) = −e^{−ρ x_n} ĝ_n(ξ)/ρ`, which is
/// `2∫E(x′−y′, x_n) g_n(y′) dy′` in Fourier variables (so `ω_n = −2` under
/// `ΔE = δ`) and gives `∂_nφ → g_n` as `x_n → 0⁺`. The zero mode, where the
/// periodic problem has no decaying solution, is taken as `x_n ĝ_n(0)`.
/// Between time nodes `ĝ_n` is interpolated by C¹ cubic Hermite splines with
/// centred slopes.
#[derive(Clone, Debug)]
pub struct GradientLift {
    nodes: usize,
    m: usize,
    half_width: f64,
    tau: f64,
    spectra: Vec<Vec<Complex64>>,
}

impl GradientLift {
    pub fn new(g: &BoundaryField) -> Result<Self> {
        let n = g.dim;
        let spectra = (0..=g.steps())
            .map(|k| {
                let mut d = to_complex(&g.slice(k, n - 1));
                fft_nd(&mut d, g.nodes(), false);
                d
            })
            .collect();
        Ok(GradientLift {
            nodes: g.nodes(),
            m: n - 1,
            half_width: g.box_half_width,
            tau: g.spacing_time,
            spectra,
        })
    }

    /// Hermite weights `(node, w, w′, w″)` for the value and two time derivatives at `t`.
    fn time_weights(&self, t: f64) -> Result<Vec<(usize, [f64; 3])>> {
        let last = self.spectra.len() - 1;
        let horizon = last as f64 * self.tau;
        if !(t >= 0.0 && t <= horizon * (1.0 + 1e-12)) {
            return Err(Error::OutsideGrid(t));
        }
        if last == 0 {
            return Ok(vec![(0, [1.0, 0.0, 0.0])]);
        }
        let k = ((t / self.tau).floor() as usize).min(last - 1);
        let s = (t - k as f64 * self.tau) / self.tau;
        let h = self.tau;
        // Hermite basis on [0, 1] and its derivatives in s.
        let h00 = [2.0 * s * s * s - 3.0 * s * s + 1.0, 6.0 * s * s - 6.0 * s, 12.0 * s - 6.0];
        let h10 = [s * s * s - 2.0 * s * s + s, 3.0 * s * s - 4.0 * s + 1.0, 6.0 * s - 4.0];
        let h01 = [-2.0 * s * s * s + 3.0 * s * s, -6.0 * s * s + 6.0 * s, -12.0 * s + 6.0];
        let h11 = [s * s * s - s * s, 3.0 * s * s - 2.0 * s, 6.0 * s - 2.0];
        let mut w: Vec<(usize, [f64; 3])> = Vec::new();
        let mut add = |node: usize, c: f64, basis: &[f64; 3]| {
            let v = [c * basis[0], c * basis[1] / h, c * basis[2] / (h * h)];
            if let Some(e) = w.iter_mut().find(|e| e.0 == node) {
                for i in 0..3 {
                    e.1[i] += v[i];
                }
            } else {
                w.push((node, v));
            }
        };
        add(k, 1.0, &h00);
        add(k + 1, 1.0, &h01);
        // slope (per unit s) at node i: centred, one-sided at the ends
        let mut slope = |i: usize, basis: &[f64; 3]| {
            if i == 0 {
                add(1, 1.0, basis);
                add(0, -1.0, basis);
            } else if i == last {
                add(last, 1.0, basis);
                add(last - 1, -1.0, basis);
            } else {
                add(i + 1, 0.5, basis);
                add(i - 1, -0.5, basis);
            }
        };
        slope(k, &h10);
        slope(k + 1, &h11);
        w.sort_by_key(|e| e.0);
        Ok(w)
    }

    /// `D^d` applied to `φ`, `∇φ` and `φ_t` at `pt`.
    pub fn eval(&self, pt: &SpaceTimePoint, d: DerivOrder) -> Result<LiftValue> {
        if pt.dim() != self.m + 1 {
            return Err(Error::Domain("point dimension does not match the field".into()));
        }
        if !(pt.x_n > 0.0) {
            return Err(Error::Domain("the lift is evaluated for x_n > 0".into()));
        }
        if d.m0 > 1 {
            return Err(Error::UnsupportedOrder(d.to_string()));
        }
        let tw = self.time_weights(pt.t)?;
        let total = self.spectra[0].len();
        let scale = PI / self.half_width;
        let mut k = vec![0i64; self.m];
        // accumulators: φ, ∂_1..∂_nφ, φ_t
        let mut acc = vec![0.0; self.m + 3];
        for idx in 0..total {
            let mut ghat = [Complex64::new(0.0, 0.0); 2];
            for (node, w) in &tw {
                let c = self.spectra[*node][idx];
                ghat[0] += c * w[d.m0 as usize];
                ghat[1] += c * w[d.m0 as usize + 1];
            }
            if ghat[0] == Complex64::new(0.0, 0.0) && ghat[1] == Complex64::new(0.0, 0.0) {
                continue;
            }
            wave_index(idx, self.nodes, self.m, &mut k);
            let xi: Vec<f64> = k.iter().map(|&v| v as f64 * scale).collect();
            let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let phase: f64 = xi.iter().zip(&pt.x_tan).map(|(a, b)| a * b).sum();
            let e_phase = Complex64::from_polar(1.0, phase);
            let iu = Complex64::new(0.0, 1.0);
            let tan_d = if d.k0 > 0 {
                (iu * xi[d.dir as usize - 1]).powu(d.k0 as u32)
            } else {
                Complex64::new(1.0, 0.0)
            };
            // base symbol of φ and its x_n derivatives
            let base = |extra_normal: u32| -> Complex64 {
                let l = d.l0 as u32 + extra_normal;
                if rho == 0.0 {
                    let v = match l {
                        0 => pt.x_n,
                        1 => 1.0,
                        _ => 0.0,
                    };
                    Complex64::new(v, 0.0)
                } else {
                    Complex64::new(-(-rho).powi(l as i32) * (-rho * pt.x_n).exp() / rho, 0.0)
                }
            };
            let b0 = base(0) * tan_d * e_phase;
            acc[0] += (b0 * ghat[0]).re;
            for a in 0..self.m {
                acc[1 + a] += (b0 * iu * xi[a] * ghat[0]).re;
            }
            acc[1 + self.m] += (base(1) * tan_d * e_phase * ghat[0]).re;
            acc[2 + self.m] += (b0 * ghat[1]).re;
        }
        let norm = 1.0 / total as f64;
        Ok(LiftValue {
            phi: acc[0] * norm,
            grad: acc[1..=1 + self.m].iter().map(|v| v * norm).collect(),
            phi_t: acc[2 + self.m] * norm,
        })
    }

    /// `(R_j g_n)(x′, t)` for all tangential `j`, by trigonometric interpolation.
    pub fn riesz_at(&self, x_tan: &[f64], t: f64) -> Result<Vec<f64>> {
        let tw = self.time_weights(t)?;
        let scale = PI / self.half_width;
        let mut k = vec![0i64; self.m];
        let mut acc = vec![0.0; self.m];
        let total = self.spectra[0].len();
        for idx in 0..total {
            let mut ghat = Complex64::new(0.0, 0.0);
            for (node, w) in &tw {
                ghat += self.spectra[*node][idx] * w[0];
            }
            wave_index(idx, self.nodes, self.m, &mut k);
            let rho = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            if rho == 0.0 {
                continue;
            }
            let phase: f64 = k.iter().zip(x_tan).map(|(a, b)| *a as f64 * scale * b).sum();
            let e = Complex64::from_polar(1.0, phase) * ghat;
            for a in 0..self.m {
                acc[a] += (Complex64::new(0.0, -(k[a] as f64) / rho) * e).re;
            }
        }
        Ok(acc.iter().map(|v| v / total as f64).collect())
    }
}

/// `D^d(φ, ∇φ, φ_t)` at `pt` for the normal component of `g`.
pub fn gradient_lift(g: &BoundaryField, pt: &SpaceTimePoint, d: DerivOrder) -> Result<LiftValue> {
    GradientLift::new(g)?.eval(pt, d)
}

/// `max_j |∂_jφ(x′, h, t) − (R_j g_n)(x′, t)|`.
pub fn tangential_trace_check(g: &BoundaryField, x_tan: &[f64], t: f64, h: f64) -> Result<f64> {
    let lift = GradientLift::new(g)?;
    let pt = SpaceTimePoint::new(x_tan.to_vec(), h, t);
    let v = lift.eval(&pt, DerivOrder::ZERO)?;
    let r = lift.riesz_at(x_tan, t)?;
    Ok(v.grad
        .iter()
        .zip(&r)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nodes: usize, half: f64, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let h = 2.0 * half / nodes as f64;
        let mut v = Vec::new();
        for i in 0..nodes {
            for j in 0..nodes {
                v.push(f(-half + i as f64 * h, -half + j as f64 * h));
            }
        }
        v
    }

    #[test]
    fn riesz_on_single_mode() {
        let (nodes, half) = (32, PI);
        let f = grid(nodes, half, |x, y| (2.0 * x + 3.0 * y).cos());
        let r1 = riesz_transform(&f, nodes, 1).unwrap();
        let want = grid(nodes, half, |x, y| 2.0 / 13f64.sqrt() * (2.0 * x + 3.0 * y).sin());
        for (a, b) in r1.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity() {
        let (nodes, half) = (64, 8.0);
        let f = grid(nodes, half, |x, y| (x * y) * (-(x * x + y * y) / 2.0).exp());
        let mut s = vec![0.0; f.len()];
        for j in 1..=2 {
            let r = riesz_transform(&riesz_transform(&f, nodes, j).unwrap(), nodes, j).unwrap();
            for (a, b) in s.iter_mut().zip(&r) {
                *a += b;
            }
        }
        for (a, b) in s.iter().zip(&f) {
            assert!((a + b).abs() < 1e-10);
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert!(norm(&riesz_transform(&f, nodes, 1).unwrap()) <= norm(&f) * (1.0 + 1e-10));
    }

    #[test]
    fn riesz_of_radial_vanishes_at_center() {
        let (nodes, half) = (32, 4.0);
        let f = grid(nodes, half, |x, y| (-(x * x + y * y)).exp());
        let r = riesz_transform(&f, nodes, 2).unwrap();
        let center = (nodes / 2) * nodes + nodes / 2;
        assert!(r[center].abs() < 1e-14);
        assert_eq!(riesz_transform(&[0.0; 16], 4, 1).unwrap(), vec![0.0; 16]);
    }

    fn mode_field(half: f64, nodes: usize) -> BoundaryField {
        let k = PI / half;
        BoundaryField::from_fn(3, half, 2.0 * half / nodes as f64, 0.25, 1.0, move |y, s| {
            vec![0.0, 0.0, (k * (y[0] + y[1])).cos() * s * s]
        })
        .unwrap()
    }

    #[test]
    fn lift_traces_and_harmonicity() {
        let g = mode_field(16.0, 32);
        let lift = GradientLift::new(&g).unwrap();
        let k = PI / 16.0;
        let rho = k * 2f64.sqrt();
        let x = vec![0.7, -1.3];
        for &h in &[0.2, 0.1, 0.05] {
            let v = lift.eval(&SpaceTimePoint::new(x.clone(), h, 0.6), DerivOrder::ZERO).unwrap();
            let phase = k * (x[0] + x[1]);
            let want_n = phase.cos() * 0.36 * (-rho * h).exp();
            assert!((v.grad[2] - want_n).abs() < 1e-10);
            let want_t = k / rho * phase.sin() * 0.36 * (-rho * h).exp();
            assert!((v.grad[0] - want_t).abs() < 1e-10);
            assert!((v.phi_t - (-phase.cos() * 1.2 * (-rho * h).exp() / rho)).abs() < 1e-9);
        }
        let err = |h: f64| tangential_trace_check(&g, &x, 0.6, h).unwrap();
        let (e1, e2) = (err(0.1), err(0.05));
        assert!((e1 / e2 - 2.0).abs() < 0.05, "{e1} {e2}");
        // Laplacian of φ by the symbol: ∂_n² + Δ′ = 0
        let pt = SpaceTimePoint::new(x.clone(), 0.3, 0.6);
        let dnn = lift.eval(&pt, DerivOrder::new(2, 0, 0)).unwrap().phi;
        let d11 = lift.eval(&pt, DerivOrder::new(0, 2, 0)).unwrap().phi;
        let d22 = lift.eval(&pt, DerivOrder::new(0, 2, 0).along(2)).unwrap().phi;
        assert!((dnn + d11 + d22).abs() < 1e-12 * dnn.abs().max(1e-3));
    }

    #[test]
    fn split_is_additive() {
        let g = BoundaryField::from_fn(3, 4.0, 0.25, 0.5, 1.0, |y, s| {
            let b = (-(y[0] * y[0] + y[1] * y[1])).exp() * s;
            vec![y[1] * b, 0.5 * b, b]
        })
        .unwrap();
        let (g1, g2) = split_boundary_data(&g).unwrap();
        let scale = g.max_abs();
        for ((a, b), c) in g1.samples().iter().zip(g2.samples()).zip(g.samples()) {
            assert!((a + b - c).abs() <= 4.0 * f64::EPSILON * scale);
        }
        assert_eq!(g2.max_abs_component(2), 0.0);
        let tan_only = BoundaryField::from_fn(3, 4.0, 0.25, 0.5, 1.0, |y, _| vec![y[0].sin(), 0.0, 0.0]).unwrap();
        let (h1, h2) = split_boundary_data(&tan_only).unwrap();
        assert_eq!(h1.max_abs(), 0.0);
        assert_eq!(h2, tan_only);
    }
}
