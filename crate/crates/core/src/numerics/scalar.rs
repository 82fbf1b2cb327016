//! Scalars that can carry exact low-order derivatives.
//!
//! Kernel evaluators are written once, generic over [`Real`], and run either
//! on plain `f64` or on [`Jet`], a truncated multivariate Taylor number with
//! three nilpotent directions (`ε_i² = 0`). Seeding up to three coordinates
//! with those directions yields every mixed partial of total order ≤ 3 in a
//! single evaluation, without finite differences.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

pub trait Real:
    Copy
    + Send
    + Sync
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + super::quad::QuadValue
{
    fn cst(v: f64) -> Self;
    /// The order-0 part.
    fn re(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn erf(self) -> Self;
    fn erfc(self) -> Self;
    /// `e^x − 1` without cancellation near zero.
    fn expm1(self) -> Self;
    /// True when every derivative part vanishes.
    fn is_real(&self) -> bool;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn sq(self) -> Self {
        self * self
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::cst(1.0),
            1 => self,
            2 => self * self,
            3 => self * self * self,
            _ if k < 0 => self.powi(-k).recip(),
            _ => {
                let h = self.powi(k / 2);
                if k % 2 == 0 {
                    h * h
                } else {
                    h * h * self
                }
            }
        }
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn is_real(&self) -> bool {
        true
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    #[inline]
    fn erf(self) -> Self {
        libm::erf(self)
    }
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
    #[inline]
    fn expm1(self) -> Self {
        libm::expm1(self)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

/// Truncated Taylor number in three nilpotent directions.
///
/// Component `m` (a bitmask over the directions) holds the mixed partial
/// `∂^{|m|} f / ∏_{i∈m} ∂ε_i`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet(pub [f64; 8]);

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; 8];
        c[0] = v;
        Jet(c)
    }

    /// A variable with value `v`, seeded along every direction in `dirs`.
    pub fn var(v: f64, dirs: u8) -> Self {
        let mut c = [0.0; 8];
        c[0] = v;
        for i in 0..3 {
            if dirs & (1 << i) != 0 {
                c[1 << i] = 1.0;
            }
        }
        Jet(c)
    }

    #[inline]
    pub fn part(&self, mask: u8) -> f64 {
        self.0[mask as usize & 7]
    }

    /// Highest mixed component, i.e. the derivative along all seeded directions.
    #[inline]
    pub fn top(&self, mask: u8) -> f64 {
        self.part(mask)
    }

    /// Compose a scalar function given its value and first three derivatives at `self.re()`.
    #[inline]
    fn compose(self, f0: f64, f1: f64, f2: f64, f3: f64) -> Self {
        let mut d = self;
        d.0[0] = 0.0;
        let d2 = d * d;
        let d3 = d2 * d;
        let mut out = [0.0; 8];
        for m in 1..8 {
            out[m] = f1 * d.0[m] + 0.5 * f2 * d2.0[m] + f3 / 6.0 * d3.0[m];
        }
        out[0] = f0;
        Jet(out)
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(o.0.iter()) {
            *a += b;
        }
        Jet(c)
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(o.0.iter()) {
            *a -= b;
        }
        Jet(c)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let a = &self.0;
        let b = &o.0;
        Jet([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[2] * b[0],
            a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
            a[0] * b[4] + a[4] * b[0],
            a[0] * b[5] + a[1] * b[4] + a[4] * b[1] + a[5] * b[0],
            a[0] * b[6] + a[2] * b[4] + a[4] * b[2] + a[6] * b[0],
            a[0] * b[7]
                + a[1] * b[6]
                + a[2] * b[5]
                + a[3] * b[4]
                + a[4] * b[3]
                + a[5] * b[2]
                + a[6] * b[1]
                + a[7] * b[0],
        ])
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        let mut c = self.0;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Jet(c)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, o: f64) -> Jet {
        self.0[0] += o;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, o: f64) -> Jet {
        self.0[0] -= o;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: f64) -> Jet {
        let mut c = self.0;
        for a in c.iter_mut() {
            *a *= o;
        }
        Jet(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: f64) -> Jet {
        self * (1.0 / o)
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl SubAssign for Jet {
    #[inline]
    fn sub_assign(&mut self, o: Jet) {
        *self = *self - o;
    }
}

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

impl Real for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn is_real(&self) -> bool {
        self.0[1..].iter().all(|v| *v == 0.0)
    }
    #[inline]
    fn re(&self) -> f64 {
        self.0[0]
    }
    fn exp(self) -> Self {
        let e = self.0[0].exp();
        self.compose(e, e, e, e)
    }
    fn ln(self) -> Self {
        let x = self.0[0];
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
    fn sqrt(self) -> Self {
        let x = self.0[0];
        let s = x.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x))
    }
    fn powf(self, e: f64) -> Self {
        let x = self.0[0];
        let v = x.powf(e);
        self.compose(
            v,
            e * v / x,
            e * (e - 1.0) * v / (x * x),
            e * (e - 1.0) * (e - 2.0) * v / (x * x * x),
        )
    }
    fn recip(self) -> Self {
        let x = self.0[0];
        let r = 1.0 / x;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }
    fn erf(self) -> Self {
        let x = self.0[0];
        let g = FRAC_2_SQRT_PI * (-x * x).exp();
        self.compose(libm::erf(x), g, -2.0 * x * g, (4.0 * x * x - 2.0) * g)
    }
    fn erfc(self) -> Self {
        let x = self.0[0];
        let g = -FRAC_2_SQRT_PI * (-x * x).exp();
        self.compose(libm::erfc(x), g, -2.0 * x * g, (4.0 * x * x - 2.0) * g)
    }
    fn expm1(self) -> Self {
        let x = self.0[0];
        let e = x.exp();
        self.compose(libm::expm1(x), e, e, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd3<F: Fn(f64) -> f64>(f: F, x: f64) -> [f64; 3] {
        let h = 1e-3;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
        [d1, d2, d3]
    }

    #[test]
    fn univariate_derivatives_match_differences() {
        let x0 = 0.7;
        let j = Jet::var(x0, 0b111);
        let funcs: Vec<(Box<dyn Fn(Jet) -> Jet>, Box<dyn Fn(f64) -> f64>)> = vec![
            (Box::new(|x: Jet| x.exp()), Box::new(|x: f64| x.exp())),
            (Box::new(|x: Jet| x.ln()), Box::new(|x: f64| x.ln())),
            (Box::new(|x: Jet| x.sqrt()), Box::new(|x: f64| x.sqrt())),
            (Box::new(|x: Jet| x.powf(-1.5)), Box::new(|x: f64| x.powf(-1.5))),
            (Box::new(|x: Jet| x.erf()), Box::new(libm::erf)),
            (Box::new(|x: Jet| x.erfc()), Box::new(libm::erfc)),
            (Box::new(|x: Jet| x.recip() * x.sq()), Box::new(|x: f64| x)),
        ];
        for (fj, ff) in funcs {
            let v = fj(j);
            let d = fd3(&ff, x0);
            assert!((v.part(0) - ff(x0)).abs() < 1e-14);
            let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * (1.0 + b.abs());
            assert!(close(v.part(0b001), d[0], 1e-5), "{} vs {}", v.part(1), d[0]);
            assert!(close(v.part(0b011), d[1], 1e-5), "{} vs {}", v.part(3), d[1]);
            assert!(close(v.part(0b111), d[2], 1e-4), "{} vs {}", v.part(7), d[2]);
        }
    }

    #[test]
    fn mixed_partials_of_product() {
        // f(x,y) = x² y exp(y), seeds: x→ε1, y→ε2, x→ε3
        let x = Jet::var(1.3, 0b101);
        let y = Jet::var(-0.4, 0b010);
        let f = x * x * y * y.exp();
        let (xv, yv) = (1.3f64, -0.4f64);
        // ∂x∂y: 2x (1+y) e^y ; ∂x∂x∂y: 2 (1+y) e^y
        assert!((f.part(0b011) - 2.0 * xv * (1.0 + yv) * yv.exp()).abs() < 1e-12);
        assert!((f.part(0b101) - 2.0 * yv * yv.exp()).abs() < 1e-12);
        assert!((f.part(0b111) - 2.0 * (1.0 + yv) * yv.exp()).abs() < 1e-12);
    }
}
