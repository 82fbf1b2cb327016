//! Gaussian convolutions of piecewise polynomials in one variable.
//!
//! `F(x) = ∫ e^{−q(x−y)²} φ(y) dy` is evaluated in closed form (truncated
//! Gaussian moments) or by a fixed Gauss–Legendre rule when the Gaussian is
//! nearly flat over a piece. Derivatives in `x` are moved onto `φ`; jumps
//! of `φ` and `φ′` at breakpoints contribute point terms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::numerics::{gauss_legendre, Real};

/// Polynomial on `[c − half, c + half]` in the local variable `u = (y − c)/half`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    /// Coefficients in ascending powers of `u`.
    pub poly: Vec<f64>,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, poly: Vec<f64>) -> Self {
        Piece { lo, hi, poly }
    }

    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn half(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// The derivative piece, in `y`.
    fn derivative(&self) -> Piece {
        let h = self.half();
        let poly = self
            .poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64 / h)
            .collect();
        Piece {
            lo: self.lo,
            hi: self.hi,
            poly,
        }
        .trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.poly.len() > 1 && *self.poly.last().unwrap() == 0.0 {
            self.poly.pop();
        }
        self
    }

    fn at_u(&self, u: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y < self.lo || y > self.hi {
            return 0.0;
        }
        self.at_u((y - self.center()) / self.half())
    }
}

/// A piecewise polynomial basis function together with the data needed for
/// its first two convolution derivatives.
#[derive(Clone, Debug)]
pub(crate) struct Basis1d {
    levels: [Vec<Piece>; 3],
    /// `(y, jump of φ, jump of φ′)` at breakpoints.
    jumps: Vec<(f64, f64, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Basis1d {
    pub fn new(pieces: Vec<Piece>) -> Self {
        let d1: Vec<Piece> = pieces.iter().map(Piece::derivative).collect();
        let d2: Vec<Piece> = d1.iter().map(Piece::derivative).collect();
        let mut pts: Vec<f64> = pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let side = |set: &[Piece], y: f64| -> (f64, f64) {
            let mut left = 0.0;
            let mut right = 0.0;
            for p in set {
                if p.hi == y {
                    left += p.at_u(1.0);
                }
                if p.lo == y {
                    right += p.at_u(-1.0);
                }
            }
            (left, right)
        };
        let mut jumps = Vec::new();
        for &y in &pts {
            let (l0, r0) = side(&pieces, y);
            let (l1, r1) = side(&d1, y);
            let (j0, j1) = (r0 - l0, r1 - l1);
            if j0 != 0.0 || j1 != 0.0 {
                jumps.push((y, j0, j1));
            }
        }
        let lo = pts.first().copied().unwrap_or(0.0);
        let hi = pts.last().copied().unwrap_or(0.0);
        Basis1d {
            levels: [pieces, d1, d2],
            jumps,
            lo,
            hi,
        }
    }

    /// A single polynomial bump `b((y − c)/half)` on `[c − half, c + half]`.
    pub fn bump(c: f64, half: f64, poly: Vec<f64>) -> Self {
        Basis1d::new(vec![Piece::new(c - half, c + half, poly)])
    }

    /// The piecewise linear hat with peak at `y` and support `[y − h, y + h]`.
    #[cfg(test)]
    pub fn hat(y_lo: f64, y: f64, y_hi: f64) -> Self {
        Basis1d::new(vec![
            Piece::new(y_lo, y, vec![0.5, 0.5]),
            Piece::new(y, y_hi, vec![0.5, -0.5]),
        ])
    }

    pub fn eval(&self, y: f64) -> f64 {
        // Pieces share endpoints, so count each point once from the right.
        let p = &self.levels[0];
        for piece in p {
            if y >= piece.lo && y < piece.hi {
                return piece.eval(y);
            }
        }
        p.iter().filter(|q| q.hi == y).map(|q| q.eval(y)).next().unwrap_or(0.0)
    }

    /// `∂_x^level ∫ e^{−q(x−y)²} φ(y) dy` for `level ≤ 2`.
    pub fn conv<S: Real>(&self, x: S, q: f64, level: usize) -> S {
        let xr = x.re();
        // Every contribution carries at least exp(−q·dist²).
        let dist = if xr < self.lo {
            self.lo - xr
        } else if xr > self.hi {
            xr - self.hi
        } else {
            0.0
        };
        if q * dist * dist > 745.0 {
            return S::cst(0.0);
        }
        let mut acc = S::cst(0.0);
        for piece in &self.levels[level] {
            acc += piece_conv(piece, x, q);
        }
        if level >= 1 {
            for &(y, j0, j1) in &self.jumps {
                let d = x - y;
                let g = (-(d * d * q)).exp();
                if level == 1 {
                    acc += g * j0;
                } else {
                    acc += g * j1 + g * d * (-2.0 * q * j0);
                }
            }
        }
        acc
    }
}

/// Hats `φ_i` with peaks `first + i·h`, `i < count`, on a uniform grid.
///
/// All hats of the axis share node values `e^{−q d_k²}` and `erfc(√q|d_k|)`
/// (`d_k = x − y_k`), so one table costs one exponential and one `erfc`
/// per node instead of a few per hat.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct HatAxis {
    pub first: f64,
    pub h: f64,
    pub count: usize,
}

impl HatAxis {
    pub fn eval(&self, i: usize, y: f64) -> f64 {
        let c = self.first + i as f64 * self.h;
        (1.0 - (y - c).abs() / self.h).max(0.0)
    }

    /// Appends `∂_x^level ∫ e^{−q(x−y)²} φ_i(y) dy` for every hat `i` at `x`,
    /// for all `level ≤ top`, to `out[level]` (hat-major per call).
    pub fn conv_all<S: Real>(&self, x: S, q: f64, top: usize, out: &mut [Vec<S>]) {
        let h = self.h;
        let nodes = self.count + 2;
        let sq = q.sqrt();
        let y = |k: usize| self.first + (k as f64 - 1.0) * h;
        let d: Vec<S> = (0..nodes).map(|k| x - y(k)).collect();
        let e: Vec<S> = d.iter().map(|&v| (-(v * v * q)).exp()).collect();
        let zero = S::cst(0.0);
        // I0_k = ∫_{y_k}^{y_{k+1}} e^{−q(x−y)²} dy, I1_k = ∫ (y−x) e^{…} dy
        let cells = nodes - 1;
        let mut i0 = Vec::with_capacity(cells);
        let mut i1 = Vec::with_capacity(cells);
        let cerf: Vec<S> = d.iter().map(|&v| if v.re() >= 0.0 { v * sq } else { -(v * sq) }.erfc()).collect();
        let c0 = PI.sqrt() / (2.0 * sq);
        for k in 0..cells {
            let (za, zb) = (d[k].re(), d[k + 1].re());
            if q * za.abs().min(zb.abs()).powi(2) > 745.0 && za * zb > 0.0 {
                i0.push(zero);
                i1.push(zero);
                continue;
            }
            let diff = if zb >= 0.0 {
                cerf[k + 1] - cerf[k]
            } else if za < 0.0 {
                cerf[k] - cerf[k + 1]
            } else {
                -(cerf[k] + cerf[k + 1]) + 2.0
            };
            i0.push(diff * c0);
            let s = d[k] + d[k + 1];
            let v = if s.re() >= 0.0 {
                e[k + 1] * (s * (-q * h)).expm1()
            } else {
                -(e[k] * (s * (q * h)).expm1())
            };
            i1.push(v / (2.0 * q));
        }
        for k in 1..=self.count {
            let left = (i1[k - 1] + d[k - 1] * i0[k - 1]) / h;
            let right = (-(d[k + 1] * i0[k]) - i1[k]) / h;
            out[0].push(left + right);
            if top >= 1 {
                out[1].push((i0[k - 1] - i0[k]) / h);
            }
            if top >= 2 {
                out[2].push((e[k - 1] - e[k] * 2.0 + e[k + 1]) / h);
            }
        }
    }
}

/// `∫_{piece} e^{−q(x−y)²} P(y) dy`.
fn piece_conv<S: Real>(p: &Piece, x: S, q: f64) -> S {
    let half = p.half();
    let ux = (x - p.center()) / half;
    gauss_poly_integral(ux, q * half * half, &p.poly) * half
}

fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

/// `∫_{−1}^{1} e^{−Q(u−ux)²} P(u) du` with `P` given by ascending coefficients.
pub(crate) fn gauss_poly_integral<S: Real>(ux: S, big_q: f64, poly: &[f64]) -> S {
    let uxr = ux.re();
    let zero = S::cst(0.0);
    if poly.iter().all(|c| *c == 0.0) {
        return zero;
    }
    if big_q <= 1.0 && 4.0 * big_q * uxr.abs() <= 12.0 {
        // The exponent varies by a bounded amount over the piece.
        let (nodes, weights) = gl24();
        let mut acc = zero;
        for (&u, &w) in nodes.iter().zip(weights.iter()) {
            let pu: f64 = poly.iter().rev().fold(0.0, |a, c| a * u + c);
            let d = ux - u;
            acc += (-(d * d * big_q)).exp() * (w * pu);
        }
        return acc;
    }
    let deg = poly.len() - 1;
    // Taylor coefficients of P about ux: P(ux + w) = Σ c_k w^k.
    let mut c: Vec<S> = poly.iter().map(|&v| S::cst(v)).collect();
    for k in 0..deg {
        for i in (k..deg).rev() {
            let t = c[i + 1] * ux;
            c[i] += t;
        }
    }
    let a = -ux - 1.0;
    let b = -ux + 1.0;
    let sq = big_q.sqrt();
    let ea = (-(a * a * big_q)).exp();
    let eb = (-(b * b * big_q)).exp();
    let (sa, sb) = (a * sq, b * sq);
    let m0 = if sa.re() > 3.0 {
        sa.erfc() - sb.erfc()
    } else if sb.re() < -3.0 {
        (-sb).erfc() - (-sa).erfc()
    } else {
        sb.erf() - sa.erf()
    } * (PI.sqrt() / (2.0 * sq));
    let inv2q = 0.5 / big_q;
    let mut moments = Vec::with_capacity(deg + 1);
    moments.push(m0);
    if deg >= 1 {
        moments.push((ea - eb) * inv2q);
    }
    let (mut pa, mut pb) = (S::cst(1.0), S::cst(1.0));
    for k in 2..=deg {
        pa = pa * a;
        pb = pb * b;
        let m = (pa * ea - pb * eb) * inv2q + moments[k - 2] * ((k - 1) as f64 * inv2q);
        moments.push(m);
    }
    let mut acc = zero;
    for (ck, mk) in c.iter().zip(moments.iter()) {
        acc += *ck * *mk;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{GaussLegendre, Jet};

    fn brute(p: &Piece, x: f64, q: f64) -> f64 {
        let gl = GaussLegendre::new(64);
        let panels = 64;
        let w = (p.hi - p.lo) / panels as f64;
        (0..panels)
            .map(|k| {
                let a = p.lo + k as f64 * w;
                gl.integrate(|y| (-q * (x - y) * (x - y)).exp() * p.eval(y), a, a + w)
            })
            .sum()
    }

    #[test]
    fn closed_form_matches_brute_force() {
        let p = Piece::new(-0.4, 0.6, vec![1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]);
        for &q in &[1e-3, 0.5, 3.0, 40.0, 1e3, 1e5] {
            for &x in &[-3.0, -0.45, 0.0, 0.1, 0.55, 0.61, 2.0] {
                let v: f64 = piece_conv(&p, x, q);
                let e = brute(&p, x, q);
                // Far tails lose relative digits to cancellation; bound against the peak.
                let peak = (PI / q).sqrt().min(p.hi - p.lo);
                assert!((v - e).abs() <= 1e-10 * e.abs() + 1e-14 * peak, "q={q} x={x}: {v} vs {e}");
            }
        }
    }

    #[test]
    fn derivative_levels_match_jets() {
        let b = Basis1d::bump(0.2, 0.7, vec![1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]);
        let hat = Basis1d::hat(-0.5, 0.0, 0.5);
        for basis in [&b, &hat] {
            for &q in &[0.3, 7.0, 300.0] {
                for &x in &[-0.9, 0.1, 0.45, 1.3] {
                    let j: Jet = basis.conv(Jet::var(x, 0b11), q, 0);
                    let d1: f64 = basis.conv(x, q, 1);
                    let d2: f64 = basis.conv(x, q, 2);
                    assert!((j.part(1) - d1).abs() <= 1e-9 * d1.abs().max(1e-12), "{q} {x}");
                    assert!((j.part(3) - d2).abs() <= 1e-8 * d2.abs().max(1e-10), "{q} {x}");
                }
            }
        }
    }

    #[test]
    fn hat_axis_matches_general_hats() {
        let ax = HatAxis {
            first: -0.5,
            h: 0.25,
            count: 5,
        };
        for &q in &[1e-7, 1e-3, 0.8, 30.0, 2e3, 1e5] {
            for &x in &[-1.3, -0.5, -0.1, 0.0, 0.37, 2.0] {
                let mut out = vec![Vec::new(), Vec::new(), Vec::new()];
                ax.conv_all(Jet::var(x, 1), q, 2, &mut out);
                for i in 0..5 {
                    let c = -0.5 + 0.25 * i as f64;
                    let b = Basis1d::hat(c - 0.25, c, c + 0.25);
                    for lev in 0..3 {
                        let g: f64 = b.conv(x, q, lev);
                        let f = out[lev][i];
                        let peak = 0.25 * if lev == 0 { 1.0 } else { q.sqrt().max(4.0).powi(lev as i32) };
                        // erfc differences lose about ε/(√q h) for nearly flat Gaussians
                        let tol = 1e-12 + 1e-15 / (q.sqrt() * 0.25);
                        assert!((f.re() - g).abs() <= tol * peak, "q={q} x={x} i={i} lev={lev}: {} vs {g}", f.re());
                        if lev < 2 {
                            let g1: f64 = b.conv(x, q, lev + 1);
                            // the jet part is a difference of O(1/h) terms
                            let scale = q.sqrt().max(4.0).powi(lev as i32 + 1);
                            assert!((f.part(1) - g1).abs() <= 10.0 * tol * scale, "deriv q={q} x={x} i={i} lev={lev}: {} vs {g1}", f.part(1));
                        }
                    }
                }
                assert_eq!(ax.eval(2, 0.0), 1.0);
            }
        }
    }

    #[test]
    fn hat_is_continuous_with_kinks() {
        let hat = Basis1d::hat(-1.0, 0.0, 1.0);
        assert_eq!(hat.eval(0.0), 1.0);
        assert_eq!(hat.eval(-0.5), 0.5);
        assert_eq!(hat.eval(1.0), 0.0);
        assert_eq!(hat.jumps.len(), 3);
        // narrow Gaussian recovers the function
        let q = 1e6;
        let v: f64 = hat.conv(0.3, q, 0);
        assert!((v / (PI / q).sqrt() - 0.7).abs() < 1e-6);
    }
}
