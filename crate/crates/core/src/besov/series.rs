//! Temporal seminorms of fields sampled at (possibly uneven) times.

use crate::{Error, Result};

/// A vector time series on nodes `t_i` with quadrature weights `w_i`; the
/// domain is the interval the weights cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub comps: usize,
    /// Component-major.
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, comps: usize, values: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 2 || weights.len() != n || values.len() != n * comps || comps == 0 {
            return Err(Error::Contract(format!(
                "series needs at least two nodes and matching weights/values ({n} nodes, {} weights, {} values)",
                weights.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) || weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::Contract("series nodes must increase and weights be positive".into()));
        }
        Ok(Series {
            nodes,
            weights,
            comps,
            values,
        })
    }

    /// Trapezoid weights for the nodes.
    pub fn trapezoid(nodes: &[f64]) -> Vec<f64> {
        let n = nodes.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
                let r = if i + 1 < n { nodes[i + 1] - nodes[i] } else { 0.0 };
                0.5 * (l + r)
            })
            .collect()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.nodes.len();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn lp_pow(&self, p: f64) -> f64 {
        (0..self.comps)
            .map(|c| {
                self.component(c)
                    .iter()
                    .zip(&self.weights)
                    .map(|(v, w)| w * v.abs().powf(p))
                    .sum::<f64>()
            })
            .sum()
    }

    /// `∫∫ |f(t) − f(s)|^p / |t − s|^{1+βp}` over the interval, `0 < β < 1`.
    /// Each node's own cell uses the slope surrogate.
    pub fn seminorm_pow(&self, beta: f64, p: f64) -> Result<f64> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::UnsupportedOrder(format!("temporal smoothness {beta} outside (0, 1)")));
        }
        let s = beta * p;
        let (t, w) = (&self.nodes, &self.weights);
        let n = t.len();
        let mut total = 0.0;
        for c in 0..self.comps {
            let f = self.component(c);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let d = (t[i] - t[j]).abs();
                        total += w[i] * w[j] * (f[i] - f[j]).abs().powf(p) * d.powf(-1.0 - s);
                    }
                }
                // slope over the cell |t − t_i| < w_i / 2
                let slope = if i == 0 {
                    (f[1] - f[0]) / (t[1] - t[0])
                } else if i + 1 == n {
                    (f[n - 1] - f[n - 2]) / (t[n - 1] - t[n - 2])
                } else {
                    let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                    (h0 * h0 * (f[i + 1] - f[i]) + h1 * h1 * (f[i] - f[i - 1])) / (h0 * h1 * (h0 + h1))
                };
                let rho = 0.5 * w[i];
                total += w[i] * 2.0 * slope.abs().powf(p) * rho.powf(p - s) / (p - s);
            }
        }
        Ok(total)
    }

    /// `‖f‖^p_{B^β_p(I)}`.
    pub fn besov_pow(&self, beta: f64, p: f64) -> Result<f64> {
        Ok(self.lp_pow(p) + self.seminorm_pow(beta, p)?)
    }
}
