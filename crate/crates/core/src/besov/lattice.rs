//! Spatial seminorms of fields sampled on uniform lattices.
//!
//! The double integral over pairs `(x, y)` becomes a sum over lattice
//! offsets `z = y − x`; the offset `z = 0` cell is replaced by the local
//! Taylor surrogate integrated exactly over the ball of equal volume.

use std::f64::consts::PI;

use crate::numerics::special::{ball_volume, sphere_abs_moment};
use crate::numerics::GaussLegendre;
use crate::{Error, Result};

/// How the field continues outside the sampled box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// Domain `ℝ^d`, field zero outside the box.
    Zero,
    /// Domain is the box itself.
    Restrict,
}

/// Which difference quotient defines the seminorm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Difference {
    /// `|f(x) − f(y)|`, for `0 < α < 1`.
    First,
    /// `|f(x+z) − 2f(x) + f(x−z)|`, for `0 < α < 2`.
    Second,
    /// `|∇f(x) − ∇f(y)|` with exponent `α − 1`, for `1 < α < 2`.
    Gradient,
}

impl Difference {
    /// First differences below 1, gradients above, second differences at 1.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        let d = if alpha == 1.0 {
            Difference::Second
        } else if alpha > 1.0 {
            Difference::Gradient
        } else {
            Difference::First
        };
        d.check(alpha)?;
        Ok(d)
    }

    pub fn check(self, alpha: f64) -> Result<()> {
        let ok = match self {
            Difference::First => alpha > 0.0 && alpha < 1.0,
            Difference::Second => alpha > 0.0 && alpha < 2.0,
            Difference::Gradient => alpha > 1.0 && alpha < 2.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedOrder(format!("{self:?} differences with alpha = {alpha}")))
        }
    }

    /// Integer smoothness carried by the Sobolev part of the norm.
    pub fn sobolev_order(self) -> usize {
        usize::from(self == Difference::Gradient)
    }
}

/// Quadrature rule on `S^{d−1}` as `(direction, weight)` pairs.
pub(crate) fn sphere_rule(d: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match d {
        1 => Ok(vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)]),
        2 => {
            let m = 96;
            Ok((0..m)
                .map(|k| {
                    let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    (vec![a.cos(), a.sin()], 2.0 * PI / m as f64)
                })
                .collect())
        }
        3 => {
            let gl = GaussLegendre::new(24);
            let m = 48;
            let mut out = Vec::with_capacity(24 * m);
            for (c, w) in gl.mapped(-1.0, 1.0) {
                let s = (1.0 - c * c).sqrt();
                for k in 0..m {
                    let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    out.push((vec![s * a.cos(), s * a.sin(), c], w * 2.0 * PI / m as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Domain(format!("lattice seminorms support 1 to 3 dimensions, got {d}"))),
    }
}

/// `∫_{ℝ^d ∖ B} |y|^{−d−s} dy` for the box `B = Π[lo_a, hi_a]` containing 0.
fn exterior_weight(lo: &[f64], hi: &[f64], s: f64) -> Result<f64> {
    let rule = sphere_rule(lo.len())?;
    let mut acc = 0.0;
    for (th, w) in &rule {
        let mut rho = f64::INFINITY;
        for a in 0..lo.len() {
            if th[a] > 0.0 {
                rho = rho.min(hi[a] / th[a]);
            } else if th[a] < 0.0 {
                rho = rho.min(lo[a] / th[a]);
            }
        }
        acc += w * rho.powf(-s);
    }
    Ok(acc / s)
}

/// A (vector) field on the lattice `origin + h·i`, `0 ≤ i_a < shape_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub h: f64,
    pub shape: Vec<usize>,
    pub comps: usize,
    /// Component-major, then last axis fastest.
    pub values: Vec<f64>,
    pub extension: Extension,
}

impl Lattice {
    pub fn new(
        origin: Vec<f64>,
        h: f64,
        shape: Vec<usize>,
        comps: usize,
        values: Vec<f64>,
        extension: Extension,
    ) -> Result<Self> {
        if shape.len() != origin.len() || shape.is_empty() || shape.contains(&0) {
            return Err(Error::Contract("lattice shape and origin must agree and be nonempty".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param("grid.h", "lattice spacing must be positive"));
        }
        let n: usize = shape.iter().product();
        if values.len() != n * comps || comps == 0 {
            return Err(Error::Contract(format!(
                "lattice holds {} values, expected {} x {comps}",
                values.len(),
                n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("lattice values must be finite".into()));
        }
        Ok(Lattice {
            origin,
            h,
            shape,
            comps,
            values,
            extension,
        })
    }

    /// Scalar lattice sampled from `f`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(
        origin: Vec<f64>,
        h: f64,
        shape: Vec<usize>,
        extension: Extension,
        f: F,
    ) -> Result<Self> {
        let n: usize = shape.iter().product();
        let mut x = vec![0.0; shape.len()];
        let mut vals = Vec::with_capacity(n);
        for idx in 0..n {
            decode(idx, &shape, &mut x);
            for (a, v) in x.iter_mut().enumerate() {
                *v = origin[a] + h * *v;
            }
            vals.push(f(&x));
        }
        Lattice::new(origin, h, shape, 1, vals, extension)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn points(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.points();
        &self.values[c * n..(c + 1) * n]
    }

    fn cell(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// `‖f‖_p^p`, summed over components.
    pub fn lp_pow(&self, p: f64) -> f64 {
        self.cell() * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()
    }

    /// Central-difference partial derivatives `[comp][axis][point]`.
    pub fn gradient(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.comps)
            .map(|c| grad_of(self.component(c), &self.shape, self.h, self.extension))
            .collect()
    }

    /// `‖∇f‖_p^p`, summed over components and axes.
    pub fn grad_lp_pow(&self, p: f64) -> f64 {
        let cell = self.cell();
        self.gradient()
            .iter()
            .flatten()
            .flatten()
            .map(|v| cell * v.abs().powf(p))
            .sum()
    }

    /// `|f|^p` for the chosen difference, summed over components.
    pub fn seminorm_pow(&self, alpha: f64, p: f64, diff: Difference) -> Result<f64> {
        diff.check(alpha)?;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::param("p", "must satisfy 1 <= p < infinity"));
        }
        sphere_rule(self.dim())?;
        if self.extension == Extension::Zero {
            if let Some(small) = self.crop() {
                return small.seminorm_pow(alpha, p, diff);
            }
        }
        let mut total = 0.0;
        for c in 0..self.comps {
            let f = self.component(c);
            if f.iter().all(|v| *v == 0.0) {
                continue;
            }
            total += match diff {
                Difference::First => self.first_pow(f, alpha, p)?,
                Difference::Second => self.second_pow(f, alpha, p)?,
                Difference::Gradient => {
                    let g = grad_of(f, &self.shape, self.h, self.extension);
                    let mut s = 0.0;
                    for gk in &g {
                        s += self.first_pow(gk, alpha - 1.0, p)?;
                    }
                    s
                }
            };
        }
        Ok(total)
    }

    /// Full `‖f‖^p_{B^α_p}`: Sobolev part plus seminorm.
    pub fn besov_pow(&self, alpha: f64, p: f64) -> Result<f64> {
        let diff = Difference::for_alpha(alpha)?;
        let mut v = self.lp_pow(p) + self.seminorm_pow(alpha, p, diff)?;
        if diff.sobolev_order() == 1 {
            v += self.grad_lp_pow(p);
        }
        Ok(v)
    }

    /// The smallest sub-lattice holding every nonzero value, when smaller.
    /// Exact under zero extension.
    fn crop(&self) -> Option<Lattice> {
        let d = self.dim();
        let n = self.points();
        let mut lo = self.shape.clone();
        let mut hi = vec![0usize; d];
        let mut x = vec![0.0; d];
        let mut any = false;
        for idx in 0..n {
            if (0..self.comps).all(|c| self.values[c * n + idx] == 0.0) {
                continue;
            }
            any = true;
            decode(idx, &self.shape, &mut x);
            for a in 0..d {
                lo[a] = lo[a].min(x[a] as usize);
                hi[a] = hi[a].max(x[a] as usize);
            }
        }
        if !any {
            lo = vec![0; d];
            hi = vec![0; d];
        }
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| h - l + 1).collect();
        if shape == self.shape {
            return None;
        }
        let m: usize = shape.iter().product();
        let mut values = Vec::with_capacity(m * self.comps);
        let strides = self.strides();
        for c in 0..self.comps {
            for k in 0..m {
                decode(k, &shape, &mut x);
                let idx: isize = (0..d).map(|a| (x[a] as isize + lo[a] as isize) * strides[a]).sum();
                values.push(self.values[c * n + idx as usize]);
            }
        }
        let origin = (0..d).map(|a| self.origin[a] + self.h * lo[a] as f64).collect();
        Some(Lattice {
            origin,
            h: self.h,
            shape,
            comps: self.comps,
            values,
            extension: Extension::Zero,
        })
    }

    fn strides(&self) -> Vec<isize> {
        let d = self.dim();
        let mut s = vec![1isize; d];
        for a in (0..d - 1).rev() {
            s[a] = s[a + 1] * self.shape[a + 1] as isize;
        }
        s
    }

    fn coords(&self) -> Vec<Vec<isize>> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        (0..self.points())
            .map(|idx| {
                decode(idx, &self.shape, &mut x);
                x.iter().map(|&v| v as isize).collect()
            })
            .collect()
    }

    /// Offsets `z ≠ 0` with `|z_a| ≤ w_a`, and their weight `h^d |z|^{−d−s}`.
    fn offsets(&self, win: &[usize], s: f64) -> Vec<(Vec<isize>, f64)> {
        let d = self.dim();
        let ext: Vec<usize> = win.iter().map(|w| 2 * w + 1).collect();
        let total: usize = ext.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut z = vec![0.0; d];
        for k in 0..total {
            decode(k, &ext, &mut z);
            let zi: Vec<isize> = z.iter().zip(win).map(|(&v, &w)| v as isize - w as isize).collect();
            if zi.iter().all(|&v| v == 0) {
                continue;
            }
            let r = self.h * (zi.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
            out.push((zi, self.cell() * r.powf(-(d as f64) - s)));
        }
        out
    }

    /// Radius of the ball with the volume of one cell.
    fn rho(&self) -> f64 {
        self.h * ball_volume(self.dim()).powf(-1.0 / self.dim() as f64)
    }

    fn first_pow(&self, f: &[f64], alpha: f64, p: f64) -> Result<f64> {
        let d = self.dim();
        let s = alpha * p;
        let cell = self.cell();
        let coords = self.coords();
        let strides = self.strides();
        let win: Vec<usize> = self.shape.iter().map(|n| n - 1).collect();
        let pw = |v: f64| pow_abs(v, p);
        let mut sum = 0.0;
        for (z, wz) in self.offsets(&win, s) {
            let shift: isize = z.iter().zip(&strides).map(|(a, b)| a * b).sum();
            let mut acc = 0.0;
            for (idx, c) in coords.iter().enumerate() {
                let fx = f[idx];
                let fwd = inside(c, &z, 1, &self.shape);
                match (fwd, self.extension) {
                    (true, _) => acc += pw(f[(idx as isize + shift) as usize] - fx),
                    (false, Extension::Zero) => acc += pw(fx),
                    (false, Extension::Restrict) => {}
                }
                if self.extension == Extension::Zero && !inside(c, &z, -1, &self.shape) {
                    acc += pw(fx);
                }
            }
            sum += wz * cell * acc;
        }
        let lp: f64 = cell * f.iter().map(|v| pw(*v)).sum::<f64>();
        if self.extension == Extension::Zero {
            sum += 2.0 * lp * self.tail(s)?;
        }
        // near-diagonal cell
        let g = grad_of(f, &self.shape, self.h, self.extension);
        let rho = self.rho();
        let m = sphere_abs_moment(d, p) * rho.powf(p - s) / (p - s);
        for idx in 0..f.len() {
            let norm = g.iter().map(|gk| gk[idx] * gk[idx]).sum::<f64>().sqrt();
            sum += cell * m * pw(norm);
        }
        Ok(sum)
    }

    fn second_pow(&self, f: &[f64], alpha: f64, p: f64) -> Result<f64> {
        let d = self.dim();
        let s = alpha * p;
        let cell = self.cell();
        let pw = |v: f64| pow_abs(v, p);
        let zero = self.extension == Extension::Zero;
        let win: Vec<usize> = self
            .shape
            .iter()
            .map(|n| if zero { n - 1 } else { (n - 1) / 2 })
            .collect();
        let strides = self.strides();
        let get = |c: &[isize]| -> f64 {
            let mut idx = 0isize;
            for a in 0..d {
                if c[a] < 0 || c[a] >= self.shape[a] as isize {
                    return 0.0;
                }
                idx += c[a] * strides[a];
            }
            f[idx as usize]
        };
        let mut sum = 0.0;
        let mut x = vec![0isize; d];
        let (mut xp, mut xm) = (vec![0isize; d], vec![0isize; d]);
        for (z, wz) in self.offsets(&win, s) {
            // range of x: all of the box (restricted needs x ± z inside),
            // or the box grown by |z| (zero extension)
            let (lo, hi): (Vec<isize>, Vec<isize>) = (0..d)
                .map(|a| {
                    let n = self.shape[a] as isize;
                    let za = z[a].abs();
                    if zero {
                        (-za, n - 1 + za)
                    } else {
                        (za, n - 1 - za)
                    }
                })
                .unzip();
            if lo.iter().zip(&hi).any(|(l, h)| l > h) {
                continue;
            }
            let ext: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
            let total: usize = ext.iter().product();
            let mut acc = 0.0;
            let mut tmp = vec![0.0; d];
            for k in 0..total {
                decode(k, &ext, &mut tmp);
                for a in 0..d {
                    x[a] = lo[a] + tmp[a] as isize;
                    xp[a] = x[a] + z[a];
                    xm[a] = x[a] - z[a];
                }
                acc += pw(get(&xp) - 2.0 * get(&x) + get(&xm));
            }
            sum += wz * cell * acc;
        }
        if zero {
            let lp: f64 = cell * f.iter().map(|v| pw(*v)).sum::<f64>();
            sum += (2.0 + 2f64.powf(p)) * lp * self.tail(s)?;
        }
        // near-diagonal cell: |zᵀHz|^p over the ball
        let g = grad_of(f, &self.shape, self.h, self.extension);
        let hess: Vec<Vec<Vec<f64>>> = g.iter().map(|gk| grad_of(gk, &self.shape, self.h, self.extension)).collect();
        let rule = sphere_rule(d)?;
        let rho = self.rho();
        let radial = rho.powf(2.0 * p - s) / (2.0 * p - s);
        for idx in 0..f.len() {
            let mut ang = 0.0;
            for (th, w) in &rule {
                let mut q = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        q += th[a] * th[b] * 0.5 * (hess[a][b][idx] + hess[b][a][idx]);
                    }
                }
                ang += w * pw(q);
            }
            sum += cell * radial * ang;
        }
        Ok(sum)
    }

    /// Lattice offsets outside the window, as an exterior integral.
    fn tail(&self, s: f64) -> Result<f64> {
        let hi: Vec<f64> = self.shape.iter().map(|&n| (n as f64 - 0.5) * self.h).collect();
        let lo: Vec<f64> = hi.iter().map(|v| -v).collect();
        exterior_weight(&lo, &hi, s)
    }
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// `c + sign·z` lies in the box.
fn inside(c: &[isize], z: &[isize], sign: isize, shape: &[usize]) -> bool {
    c.iter()
        .zip(z)
        .zip(shape)
        .all(|((&a, &b), &n)| (0..n as isize).contains(&(a + sign * b)))
}

/// Multi-index of flat `idx` (last axis fastest), as floats.
fn decode(mut idx: usize, shape: &[usize], out: &mut [f64]) {
    for a in (0..shape.len()).rev() {
        out[a] = (idx % shape[a]) as f64;
        idx /= shape[a];
    }
}

/// Partial derivatives `[axis][point]` by central differences. At the edge,
/// zero extension keeps the central stencil; a restricted box goes one-sided.
fn grad_of(f: &[f64], shape: &[usize], h: f64, ext: Extension) -> Vec<Vec<f64>> {
    let d = shape.len();
    let mut stride = vec![1usize; d];
    for a in (0..d - 1).rev() {
        stride[a] = stride[a + 1] * shape[a + 1];
    }
    (0..d)
        .map(|a| {
            let n = shape[a];
            (0..f.len())
                .map(|idx| {
                    let i = (idx / stride[a]) % n;
                    let at = |j: isize| -> Option<f64> {
                        let k = i as isize + j;
                        (0..n as isize).contains(&k).then(|| f[(idx as isize + j * stride[a] as isize) as usize])
                    };
                    match (at(-1), at(1), ext) {
                        (Some(l), Some(r), _) => (r - l) / (2.0 * h),
                        (l, r, Extension::Zero) => (r.unwrap_or(0.0) - l.unwrap_or(0.0)) / (2.0 * h),
                        (None, Some(r), Extension::Restrict) => (r - f[idx]) / h,
                        (Some(l), None, Extension::Restrict) => (f[idx] - l) / h,
                        (None, None, Extension::Restrict) => 0.0,
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(h: f64, l: f64, lam: f64) -> Lattice {
        let n = (2.0 * l / h).round() as usize + 1;
        Lattice::from_fn(vec![-l], h, vec![n], Extension::Zero, |x| (-(lam * x[0]).powi(2)).exp()).unwrap()
    }

    #[test]
    fn exterior_of_centered_cube_in_one_dimension() {
        // ∫_{|y|>a} |y|^{-1-s} = 2 a^{-s}/s
        let v = exterior_weight(&[-2.0], &[2.0], 0.5).unwrap();
        assert!((v - 2.0 * 2f64.powf(-0.5) / 0.5).abs() < 1e-12);
    }

    #[test]
    fn constants_have_zero_seminorm_on_a_box() {
        let f = Lattice::from_fn(vec![0.0, 0.0], 0.1, vec![9, 7], Extension::Restrict, |_| 3.0).unwrap();
        for diff in [Difference::First, Difference::Second] {
            assert!(f.seminorm_pow(0.5, 2.0, diff).unwrap().abs() < 1e-12);
        }
        assert!(f.seminorm_pow(1.5, 3.0, Difference::Gradient).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gaussian_self_convergence() {
        let a = gauss(0.05, 6.0, 1.0).seminorm_pow(0.5, 2.0, Difference::First).unwrap().sqrt();
        let b = gauss(0.025, 6.0, 1.0).seminorm_pow(0.5, 2.0, Difference::First).unwrap().sqrt();
        assert!((a / b - 1.0).abs() < 0.02, "{a} {b}");
    }

    #[test]
    fn gaussian_matches_fourier_value() {
        // For p = 2 the first-difference seminorm of e^{−x²} in 1D is
        // 2 ∫ (1 − cos ξz)/|z|^{1+2α} dz |f̂|² dξ/2π, computed here by quadrature.
        let alpha: f64 = 0.4;
        let c = 2.0 * crate::numerics::special::gamma(1.0 - 2.0 * alpha) * (PI * alpha).cos() / alpha;
        let gl = GaussLegendre::new(200);
        let exact = gl.integrate(|xi| c * xi.abs().powf(2.0 * alpha) * PI * (-xi * xi / 2.0).exp() / (2.0 * PI), -12.0, 12.0);
        let got = gauss(0.02, 6.0, 1.0).seminorm_pow(alpha, 2.0, Difference::First).unwrap();
        assert!((got / exact - 1.0).abs() < 0.01, "{got} {exact}");
    }

    #[test]
    fn dilation_scaling() {
        // f(λx) on ℝ: seminorm scales like λ^{α − 1/p}
        let (alpha, p) = (0.5, 2.0);
        let base = gauss(0.02, 8.0, 1.0).seminorm_pow(alpha, p, Difference::First).unwrap().powf(1.0 / p);
        for lam in [0.5, 2.0] {
            let v = gauss(0.02, 8.0, lam).seminorm_pow(alpha, p, Difference::First).unwrap().powf(1.0 / p);
            let want: f64 = lam.powf(alpha - 1.0 / p);
            assert!((v / base / want - 1.0).abs() < 0.05, "lam {lam}: {}", v / base);
        }
    }

    #[test]
    fn second_differences_agree_in_scaling() {
        let (alpha, p) = (1.0, 2.0);
        let a = gauss(0.04, 8.0, 1.0).seminorm_pow(alpha, p, Difference::Second).unwrap();
        let b = gauss(0.04, 8.0, 2.0).seminorm_pow(alpha, p, Difference::Second).unwrap();
        // λ^{(α − 1/p)p} = 2 for λ = 2
        assert!((b / a / 2.0 - 1.0).abs() < 0.05, "{}", b / a);
        let c = gauss(0.02, 8.0, 1.0).seminorm_pow(alpha, p, Difference::Second).unwrap();
        assert!((a / c - 1.0).abs() < 0.02);
    }

    #[test]
    fn homogeneous_of_degree_p() {
        let f = Lattice::from_fn(vec![-1.0, -1.0], 0.1, vec![21, 21], Extension::Zero, |x| {
            (-(x[0] * x[0] + 2.0 * x[1] * x[1]) * 3.0).exp()
        })
        .unwrap();
        let mut g = f.clone();
        g.values.iter_mut().for_each(|v| *v *= -3.0);
        for (alpha, diff) in [(0.3, Difference::First), (1.0, Difference::Second), (1.4, Difference::Gradient)] {
            let a = f.seminorm_pow(alpha, 3.0, diff).unwrap();
            let b = g.seminorm_pow(alpha, 3.0, diff).unwrap();
            assert!((b / a - 27.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_unsupported_orders() {
        let f = gauss(0.1, 1.0, 1.0);
        assert!(matches!(
            f.seminorm_pow(1.0, 2.0, Difference::First),
            Err(Error::UnsupportedOrder(_))
        ));
        assert!(f.seminorm_pow(0.5, 2.0, Difference::Gradient).is_err());
        assert_eq!(Difference::for_alpha(1.0).unwrap(), Difference::Second);
        assert_eq!(Difference::for_alpha(1.5).unwrap(), Difference::Gradient);
    }
}
