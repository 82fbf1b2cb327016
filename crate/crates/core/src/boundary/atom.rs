//! Atoms and atom expansions.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Built-in bump shapes `b(u) = (1 − u²)^k` on `[−1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `k = 3`, twice continuously differentiable.
    Poly3,
    /// `k = 4`, three times continuously differentiable.
    Poly4,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "poly3" => Ok(Profile::Poly3),
            "poly4" => Ok(Profile::Poly4),
            other => Err(Error::param("profile", format!("unknown profile `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Poly3 => "poly3",
            Profile::Poly4 => "poly4",
        }
    }

    fn power(&self) -> i32 {
        match self {
            Profile::Poly3 => 3,
            Profile::Poly4 => 4,
        }
    }

    /// Ascending coefficients of `b` in `u`.
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.power() as usize;
        // (1 − u²)^k = Σ C(k,i) (−1)^i u^{2i}
        let mut c = vec![0.0; 2 * k + 1];
        let mut binom = 1.0;
        for i in 0..=k {
            c[2 * i] = if i % 2 == 0 { binom } else { -binom };
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        c
    }

    pub fn value(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - u * u).powi(self.power())
        }
    }

    pub fn slope(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let k = self.power();
        -2.0 * k as f64 * u * (1.0 - u * u).powi(k - 1)
    }

    /// `max |b′|`, attained at `u² = 1/(2k−1)`.
    pub fn max_slope(&self) -> f64 {
        let k = self.power() as f64;
        let u = (1.0 / (2.0 * k - 1.0)).sqrt();
        2.0 * k * u * (1.0 - u * u).powf(k - 1.0)
    }
}

/// An (α, p)-atom `a(y′, s) = c·κ·r^{α−(n+1)/p} B(y′) C(s)` on `Δ(y₀′, r) × (t₀, t₀ + r²)`.
///
/// `B` is the tensor product of `b((y_k − y₀_k)/ℓ)` over the square of half
/// side `ℓ = r/√(n−1)` inscribed in the ball, and `C(s) = b(2(s−t₀)/r² − 1)`.
/// The factor `κ ≤ 1` makes the gradient and time-derivative budgets hold
/// with constant one; `c` is an extra scale (1 for [`make_atom`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub r: f64,
    pub center_tan: Vec<f64>,
    pub t0: f64,
    pub alpha: f64,
    pub p: f64,
    pub profile: Profile,
    pub scale: f64,
}

/// Validated constructor.
pub fn make_atom(r: f64, center: Vec<f64>, t0: f64, alpha: f64, p: f64, profile: Profile) -> Result<Atom> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", "radius must be positive"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", "must lie in (0, 1)"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param("p", "must lie in (1, ∞)"));
    }
    if center.len() < 2 {
        return Err(Error::param("center", "needs n − 1 ≥ 2 tangential coordinates"));
    }
    if !t0.is_finite() || t0 < 0.0 {
        return Err(Error::param("t0", "must be finite and non-negative"));
    }
    Ok(Atom {
        r,
        center_tan: center,
        t0,
        alpha,
        p,
        profile,
        scale: 1.0,
    })
}

impl Atom {
    pub fn dim(&self) -> usize {
        self.center_tan.len() + 1
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    /// `r^{α−(n+1)/p}`.
    pub fn size_budget(&self) -> f64 {
        self.r.powf(self.alpha - (self.dim() as f64 + 1.0) / self.p)
    }

    pub fn kappa(&self) -> f64 {
        let m = (self.dim() - 1) as f64;
        let s = self.profile.max_slope();
        1.0 / (m * s).max(2.0 * s).max(1.0)
    }

    /// Peak value `c·κ·r^{α−(n+1)/p}`.
    pub fn amplitude(&self) -> f64 {
        self.scale * self.kappa() * self.size_budget()
    }

    /// Half side of the supporting square.
    pub fn half_side(&self) -> f64 {
        self.r / ((self.dim() - 1) as f64).sqrt()
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.r * self.r
    }

    fn time_u(&self, s: f64) -> f64 {
        2.0 * (s - self.t0) / (self.r * self.r) - 1.0
    }

    fn space(&self, y: &[f64]) -> f64 {
        let l = self.half_side();
        y.iter()
            .zip(&self.center_tan)
            .map(|(v, c)| self.profile.value((v - c) / l))
            .product()
    }

    pub fn value(&self, y: &[f64], s: f64) -> f64 {
        self.amplitude() * self.space(y) * self.profile.value(self.time_u(s))
    }

    pub fn grad_tan(&self, y: &[f64], s: f64) -> Vec<f64> {
        let l = self.half_side();
        let us: Vec<f64> = y.iter().zip(&self.center_tan).map(|(v, c)| (v - c) / l).collect();
        let ct = self.amplitude() * self.profile.value(self.time_u(s));
        (0..us.len())
            .map(|k| {
                let mut g = self.profile.slope(us[k]) / l;
                for (i, &u) in us.iter().enumerate() {
                    if i != k {
                        g *= self.profile.value(u);
                    }
                }
                ct * g
            })
            .collect()
    }

    pub fn dt(&self, y: &[f64], s: f64) -> f64 {
        let du = 2.0 / (self.r * self.r);
        self.amplitude() * self.space(y) * self.profile.slope(self.time_u(s)) * du
    }

    /// Whether `(y′, s)` lies in the closed parabolic cylinder of the atom.
    pub fn in_cylinder(&self, y: &[f64], s: f64) -> bool {
        let d2: f64 = y.iter().zip(&self.center_tan).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.r * self.r * (1.0 + 1e-12) && s >= self.t0 && s <= self.t_end()
    }

    /// The same atom dilated parabolically: `r → λr`, `y₀′ → λy₀′`, `t₀ → λ²t₀`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Atom {
            r: self.r * lambda,
            center_tan: self.center_tan.iter().map(|c| c * lambda).collect(),
            t0: self.t0 * lambda * lambda,
            ..self.clone()
        }
    }
}

/// Sup-norm ratios of an atom against its three budgets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    /// `(sup|a|, sup|D_x′a|·r, sup|D_t a|·r²)`, each divided by `r^{α−(n+1)/p}`.
    pub sup_ratios: [f64; 3],
}

impl CertifyReport {
    pub fn passes(&self) -> bool {
        self.sup_ratios.iter().all(|v| *v <= 1.0)
    }
}

/// Dense-sample certification of the three size bounds.
///
/// The atom is separable, so the space and time factors are maximized
/// separately on fine grids (the time factor enters the spatial bounds at
/// its peak `C = 1`).
pub fn atom_certify(atom: &Atom) -> CertifyReport {
    let m = atom.dim() - 1;
    let pts = if m <= 2 { 201 } else { 41 };
    let l = atom.half_side();
    let budget = atom.size_budget();
    let grid: Vec<f64> = (0..pts).map(|i| -1.0 + 2.0 * i as f64 / (pts - 1) as f64).collect();
    let (mut vmax, mut gmax) = (0.0f64, 0.0f64);
    let mut idx = vec![0usize; m];
    loop {
        let y: Vec<f64> = idx
            .iter()
            .zip(&atom.center_tan)
            .map(|(&i, c)| c + l * grid[i])
            .collect();
        let s_peak = atom.t0 + 0.5 * atom.r * atom.r;
        vmax = vmax.max(atom.value(&y, s_peak).abs());
        let g = atom.grad_tan(&y, s_peak);
        gmax = gmax.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
        let mut k = 0;
        while k < m {
            idx[k] += 1;
            if idx[k] < pts {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == m {
            break;
        }
    }
    let mut tmax = 0.0f64;
    for i in 0..=4000 {
        let s = atom.t0 + atom.r * atom.r * i as f64 / 4000.0;
        tmax = tmax.max(atom.dt(&atom.center_tan, s).abs());
    }
    CertifyReport {
        sup_ratios: [
            vmax / budget,
            gmax * atom.r / budget,
            tmax * atom.r * atom.r / budget,
        ],
    }
}

/// Tangential boundary data `g = Σ_k c_k a_k e_{j_k}` with zero normal part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomExpansion {
    pub atoms: Vec<Atom>,
    pub coeffs: Vec<f64>,
    /// Tangential direction (1-based) carried by each atom.
    pub direction: Vec<usize>,
}

impl AtomExpansion {
    pub fn single(atom: Atom, direction: usize) -> Self {
        AtomExpansion {
            atoms: vec![atom],
            coeffs: vec![1.0],
            direction: vec![direction],
        }
    }

    pub fn push(&mut self, atom: Atom, coeff: f64, direction: usize) {
        self.atoms.push(atom);
        self.coeffs.push(coeff);
        self.direction.push(direction);
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.len() != self.coeffs.len() || self.atoms.len() != self.direction.len() {
            return Err(Error::Contract("atom, coefficient and direction lists differ in length".into()));
        }
        if let Some(a) = self.atoms.first() {
            let n = a.dim();
            for (a, &j) in self.atoms.iter().zip(&self.direction) {
                if a.dim() != n {
                    return Err(Error::Contract("atoms of different dimensions".into()));
                }
                if j == 0 || j >= n {
                    return Err(Error::param("direction", format!("must lie in 1..={}", n - 1)));
                }
            }
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", "must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.atoms.first().map(Atom::dim)
    }

    /// `(Σ|c_k|^p)^{1/p}`.
    pub fn coeff_norm(&self, p: f64) -> f64 {
        self.coeffs.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    /// Pointwise value of the full data vector `(g′, g_n)`.
    pub fn value(&self, y: &[f64], s: f64) -> Vec<f64> {
        let n = y.len() + 1;
        let mut g = vec![0.0; n];
        for ((a, c), &j) in self.atoms.iter().zip(&self.coeffs).zip(&self.direction) {
            g[j - 1] += c * a.value(y, s);
        }
        g
    }

    /// Largest `|g|` over the atom peaks (exact for a single atom).
    pub fn peak(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| (a.amplitude() * c).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_coefficients() {
        let c = Profile::Poly3.coefficients();
        assert_eq!(c, vec![1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]);
        let u: f64 = 0.37;
        let v: f64 = c.iter().rev().fold(0.0, |a, k| a * u + k);
        assert!((v - Profile::Poly3.value(u)).abs() < 1e-15);
        assert!((Profile::Poly3.max_slope() - 1.7173).abs() < 1e-4);
        let c4 = Profile::Poly4.coefficients();
        let v4: f64 = c4.iter().rev().fold(0.0, |a, k| a * u + k);
        assert!((v4 - Profile::Poly4.value(u)).abs() < 1e-15);
    }

    #[test]
    fn certification_examples() {
        let a = make_atom(2.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).unwrap();
        let peak = a.value(&[0.0, 0.0], 2.0);
        assert!(peak <= 2f64.powf(-1.5));
        assert!(atom_certify(&a).passes());
        let zero = a.clone().scaled(0.0);
        assert_eq!(atom_certify(&zero).sup_ratios, [0.0, 0.0, 0.0]);
        let big = a.clone().scaled(2.0 / a.kappa());
        let rep = atom_certify(&big);
        assert!((rep.sup_ratios[0] - 2.0).abs() < 1e-12);
        assert!(!rep.passes());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            make_atom(1.0, vec![0.0, 0.0], 0.0, 0.5, 1.0, Profile::Poly3),
            Err(Error::Param { field: "p", .. })
        ));
        assert!(make_atom(0.0, vec![0.0, 0.0], 0.0, 0.5, 2.0, Profile::Poly3).is_err());
        assert!(make_atom(1.0, vec![0.0, 0.0], 0.0, 1.0, 2.0, Profile::Poly3).is_err());
    }

    #[test]
    fn support_lies_in_cylinder() {
        let a = make_atom(0.5, vec![0.3, -0.2], 1.0, 0.25, 4.0, Profile::Poly4).unwrap();
        let l = a.half_side();
        for &(dx, dy, s) in &[(l * 0.99, l * 0.99, 1.1), (0.0, 0.0, 1.0 + 0.2499), (-l * 0.5, l * 0.7, 1.05)] {
            let y = [0.3 + dx, -0.2 + dy];
            assert!(a.value(&y, s) != 0.0);
            assert!(a.in_cylinder(&y, s));
        }
    }
}
