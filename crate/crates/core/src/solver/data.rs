//! Separable representations of tangential boundary data.
//!
//! A component carries data along one tangential direction as
//! `Σ_I c_I(s) Π_k φ_{k,I_k}(y_k)`: one term for an atom, a tensor of hat
//! functions with cubic-in-time coefficients for sampled fields.

use super::conv::{Basis1d, HatAxis};
use crate::boundary::{Atom, AtomExpansion, BoundaryField};
use crate::numerics::Real;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) enum TimeCoef {
    /// `amp · P((s − c)/half)` on `[lo, hi]`, zero elsewhere (single term).
    Bump { amp: f64, lo: f64, hi: f64, poly: Vec<f64> },
    /// Cubic Hermite interpolation of per-node coefficient tensors at `s = kτ`.
    Grid { tau: f64, values: Vec<Vec<f64>> },
}

impl TimeCoef {
    /// Sorted breakpoints in `s`; the data vanish outside the first and last.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            TimeCoef::Bump { lo, hi, .. } => vec![*lo, *hi],
            TimeCoef::Grid { tau, values } => (0..values.len()).map(|k| k as f64 * tau).collect(),
        }
    }

    /// Upper bound for `Σ_I |c_I(s)|` over all `s`.
    pub fn sup_abs(&self) -> f64 {
        match self {
            TimeCoef::Bump { amp, poly, .. } => {
                let m = (0..=200)
                    .map(|k| {
                        let u = -1.0 + k as f64 / 100.0;
                        poly.iter().rev().fold(0.0, |a, c| a * u + c).abs()
                    })
                    .fold(0.0, f64::max);
                amp.abs() * m
            }
            TimeCoef::Grid { values, .. } => values
                .iter()
                .map(|v| v.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// Coefficients and their `s`-derivatives at `s`.
    pub fn eval<S: Real>(&self, s: S, val: &mut Vec<S>, der: &mut Vec<S>) {
        val.clear();
        der.clear();
        let sr = s.re();
        match self {
            TimeCoef::Bump { amp, lo, hi, poly } => {
                if sr <= *lo || sr >= *hi {
                    val.push(S::cst(0.0));
                    der.push(S::cst(0.0));
                    return;
                }
                let half = 0.5 * (hi - lo);
                let u = (s - 0.5 * (lo + hi)) / half;
                let mut p = S::cst(0.0);
                let mut dp = S::cst(0.0);
                for &c in poly.iter().rev() {
                    dp = dp * u + p;
                    p = p * u + c;
                }
                val.push(p * *amp);
                der.push(dp * (*amp / half));
            }
            TimeCoef::Grid { tau, values } => {
                let terms = values[0].len();
                let last = values.len() - 1;
                let zero = S::cst(0.0);
                val.resize(terms, zero);
                der.resize(terms, zero);
                if last == 0 || sr < 0.0 || sr > last as f64 * tau {
                    return;
                }
                let k = ((sr / tau).floor() as usize).min(last - 1);
                let x = (s - k as f64 * tau) / *tau;
                let x2 = x * x;
                let x3 = x2 * x;
                let h00 = x3 * 2.0 - x2 * 3.0 + 1.0;
                let h10 = x3 - x2 * 2.0 + x;
                let h01 = x2 * 3.0 - x3 * 2.0;
                let h11 = x3 - x2;
                let d00 = (x2 * 6.0 - x * 6.0) / *tau;
                let d10 = (x2 * 3.0 - x * 4.0 + 1.0) / *tau;
                let d01 = (x * 6.0 - x2 * 6.0) / *tau;
                let d11 = (x2 * 3.0 - x * 2.0) / *tau;
                let slope = |i: usize, t: usize| -> f64 {
                    if i == 0 {
                        values[1][t] - values[0][t]
                    } else if i == last {
                        values[last][t] - values[last - 1][t]
                    } else {
                        0.5 * (values[i + 1][t] - values[i - 1][t])
                    }
                };
                for t in 0..terms {
                    let (y0, y1) = (values[k][t], values[k + 1][t]);
                    let (m0, m1) = (slope(k, t), slope(k + 1, t));
                    if y0 == 0.0 && y1 == 0.0 && m0 == 0.0 && m1 == 0.0 {
                        continue;
                    }
                    val[t] = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
                    der[t] = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
                }
            }
        }
    }
}

/// The basis functions along one tangential axis.
#[derive(Clone, Debug)]
pub(crate) enum Axis {
    General(Vec<Basis1d>),
    Hats(HatAxis),
}

impl Axis {
    pub fn len(&self) -> usize {
        match self {
            Axis::General(b) => b.len(),
            Axis::Hats(h) => h.count,
        }
    }

    /// Largest `|y|` on the support.
    pub fn reach(&self) -> f64 {
        match self {
            Axis::General(b) => b.iter().map(|b| b.lo.abs().max(b.hi.abs())).fold(0.0, f64::max),
            Axis::Hats(h) => (h.first - h.h).abs().max((h.first + h.count as f64 * h.h).abs()),
        }
    }

    pub fn values(&self, y: f64) -> Vec<f64> {
        match self {
            Axis::General(b) => b.iter().map(|b| b.eval(y)).collect(),
            Axis::Hats(h) => (0..h.count).map(|i| h.eval(i, y)).collect(),
        }
    }

    /// Convolution tables `[level][I·np + X]` for `level ≤ top`.
    pub fn table<S: Real>(&self, pts: &[S], q: f64, top: usize) -> Vec<Vec<S>> {
        if std::mem::size_of::<S>() != std::mem::size_of::<f64>() && pts.iter().all(|x| x.is_real()) {
            // no seeded direction on this axis: plain floats are much cheaper
            let re: Vec<f64> = pts.iter().map(|x| x.re()).collect();
            return self
                .table(&re, q, top)
                .into_iter()
                .map(|v| v.into_iter().map(S::cst).collect())
                .collect();
        }
        let np = pts.len();
        match self {
            Axis::General(basis) => (0..=top)
                .map(|lev| {
                    let mut t = Vec::with_capacity(basis.len() * np);
                    for b in basis {
                        for &x in pts {
                            t.push(b.conv(x, q, lev));
                        }
                    }
                    t
                })
                .collect(),
            Axis::Hats(ax) => {
                let nb = ax.count;
                let mut per: Vec<Vec<S>> = vec![Vec::with_capacity(nb * np); top + 1];
                for &x in pts {
                    ax.conv_all(x, q, top, &mut per);
                }
                // point-major to basis-major
                per.into_iter()
                    .map(|v| {
                        let mut t = vec![S::cst(0.0); nb * np];
                        for (xi, chunk) in v.chunks(nb).enumerate() {
                            for (i, val) in chunk.iter().enumerate() {
                                t[i * np + xi] = *val;
                            }
                        }
                        t
                    })
                    .collect()
            }
        }
    }
}

/// Data carried along tangential direction `dir` (1-based).
#[derive(Clone, Debug)]
pub(crate) struct DataComponent {
    pub dir: usize,
    pub axes: Vec<Axis>,
    pub time: TimeCoef,
}

impl DataComponent {
    pub fn from_atom(atom: &Atom, coeff: f64, dir: usize) -> Self {
        let poly = atom.profile.coefficients();
        let l = atom.half_side();
        let axes = atom
            .center_tan
            .iter()
            .map(|&c| Axis::General(vec![Basis1d::bump(c, l, poly.clone())]))
            .collect();
        DataComponent {
            dir,
            axes,
            time: TimeCoef::Bump {
                amp: coeff * atom.amplitude(),
                lo: atom.t0,
                hi: atom.t_end(),
                poly,
            },
        }
    }

    /// Largest distance from the origin of the data support along each axis.
    pub fn reach(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::reach).collect()
    }
}

/// Tangential boundary data `(g′, 0)` prepared for evaluation.
#[derive(Clone, Debug)]
pub struct TangentialSource {
    pub(crate) dim: usize,
    pub(crate) comps: Vec<DataComponent>,
}

impl TangentialSource {
    pub fn from_atoms(e: &AtomExpansion) -> Result<Self> {
        e.validate()?;
        let dim = e
            .dim()
            .ok_or_else(|| Error::Contract("empty atom expansion has no dimension; use TangentialSource::zero".into()))?;
        let comps = e
            .atoms
            .iter()
            .zip(&e.coeffs)
            .zip(&e.direction)
            .filter(|((_, c), _)| **c != 0.0)
            .map(|((a, &c), &j)| DataComponent::from_atom(a, c, j))
            .collect();
        Ok(TangentialSource { dim, comps })
    }

    /// Zero data in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        TangentialSource { dim, comps: Vec::new() }
    }

    /// Sampled data interpreted as tensor hats in space and cubic Hermite in time.
    /// The normal component must vanish identically.
    pub fn from_field(g: &BoundaryField) -> Result<Self> {
        let n = g.dim;
        if g.max_abs_component(n - 1) != 0.0 {
            return Err(Error::Contract(
                "tangential evaluation needs g_n = 0; use full_solve for general data".into(),
            ));
        }
        let axis = Axis::Hats(HatAxis {
            first: g.coord(0),
            h: g.spacing_tan,
            count: g.nodes(),
        });
        let mut comps = Vec::new();
        for j in 1..n {
            if g.max_abs_component(j - 1) == 0.0 {
                continue;
            }
            let values = (0..=g.steps()).map(|k| g.slice(k, j - 1)).collect();
            comps.push(DataComponent {
                dir: j,
                axes: vec![axis.clone(); n - 1],
                time: TimeCoef::Grid {
                    tau: g.spacing_time,
                    values,
                },
            });
        }
        Ok(TangentialSource { dim: n, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// The represented data `(g′, 0)` at `(x′, t)`.
    pub fn boundary_value(&self, x_tan: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let (mut c, mut cd) = (Vec::new(), Vec::new());
        for comp in &self.comps {
            comp.time.eval(t, &mut c, &mut cd);
            let vals: Vec<Vec<f64>> = comp
                .axes
                .iter()
                .zip(x_tan)
                .map(|(a, &x)| a.values(x))
                .collect();
            let nb: Vec<usize> = vals.iter().map(Vec::len).collect();
            let mut acc = 0.0;
            for (flat, &ci) in c.iter().enumerate() {
                if ci == 0.0 {
                    continue;
                }
                let mut rem = flat;
                let mut prod = ci;
                for a in (0..nb.len()).rev() {
                    prod *= vals[a][rem % nb[a]];
                    rem /= nb[a];
                }
                acc += prod;
            }
            out[comp.dir - 1] += acc;
        }
        out
    }
}
