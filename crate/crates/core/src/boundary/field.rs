//! Sampled boundary data on a periodic tangential box times a time grid.

use std::fmt::Write as _;

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HSBF";
const FORMAT_VERSION: u32 = 1;

/// Vector boundary data `g = (g′, g_n)` on the grid
/// `{−L + i h}^{n−1} × {k τ : 0 ≤ k ≤ T/τ}`.
///
/// The tangential grid is periodic on `[−L, L)^{n−1}`. Samples are stored
/// row-major with time slowest, then the tangential axes in order, then the
/// `n` components.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    pub dim: usize,
    pub box_half_width: f64,
    pub spacing_tan: f64,
    pub spacing_time: f64,
    pub horizon: f64,
    nodes: usize,
    steps: usize,
    samples: Vec<f64>,
}

fn grid_count(span: f64, step: f64, what: &'static str) -> Result<usize> {
    if !(step > 0.0 && span > 0.0 && step.is_finite() && span.is_finite()) {
        return Err(Error::param(what, "spacings and extents must be positive"));
    }
    let k = span / step;
    let r = k.round();
    if (k - r).abs() > 1e-9 * k.max(1.0) || r < 1.0 {
        return Err(Error::param(what, format!("extent {span} is not a multiple of spacing {step}")));
    }
    Ok(r as usize)
}

impl BoundaryField {
    /// An all-zero field.
    pub fn zeros(dim: usize, half_width: f64, h: f64, tau: f64, horizon: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::param("dim", "must be at least 3"));
        }
        let nodes = grid_count(2.0 * half_width, h, "grid.h")?;
        let steps = grid_count(horizon, tau, "grid.tau")?;
        let len = (steps + 1) * nodes.pow(dim as u32 - 1) * dim;
        Ok(BoundaryField {
            dim,
            box_half_width: half_width,
            spacing_tan: h,
            spacing_time: tau,
            horizon,
            nodes,
            steps,
            samples: vec![0.0; len],
        })
    }

    /// Sample `f(y′, s)` (an `n`-vector) at every grid node.
    pub fn from_fn<F>(dim: usize, half_width: f64, h: f64, tau: f64, horizon: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> Vec<f64>,
    {
        let mut g = Self::zeros(dim, half_width, h, tau, horizon)?;
        let per = g.points_per_slice();
        let mut y = vec![0.0; dim - 1];
        for k in 0..=g.steps {
            let s = g.time(k);
            for idx in 0..per {
                g.coords_into(idx, &mut y);
                let v = f(&y, s);
                if v.len() != dim {
                    return Err(Error::Contract(format!("sampler returned {} components, expected {dim}", v.len())));
                }
                let base = (k * per + idx) * dim;
                g.samples[base..base + dim].copy_from_slice(&v);
            }
        }
        Ok(g)
    }

    /// Nodes per tangential axis.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Number of time steps (`T/τ`); there are `steps + 1` time nodes.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn points_per_slice(&self) -> usize {
        self.nodes.pow(self.dim as u32 - 1)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.box_half_width + i as f64 * self.spacing_tan
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.spacing_time
    }

    /// Tangential coordinates of flat slice index `idx` (last axis fastest).
    pub fn coords_into(&self, mut idx: usize, y: &mut [f64]) {
        for a in (0..self.dim - 1).rev() {
            y[a] = self.coord(idx % self.nodes);
            idx /= self.nodes;
        }
    }

    pub fn get(&self, k: usize, idx: usize, comp: usize) -> f64 {
        self.samples[(k * self.points_per_slice() + idx) * self.dim + comp]
    }

    pub fn set(&mut self, k: usize, idx: usize, comp: usize, v: f64) {
        let per = self.points_per_slice();
        self.samples[(k * per + idx) * self.dim + comp] = v;
    }

    /// One component (0-based) at time node `k`, as a flat tangential grid.
    pub fn slice(&self, k: usize, comp: usize) -> Vec<f64> {
        (0..self.points_per_slice()).map(|i| self.get(k, i, comp)).collect()
    }

    pub fn set_slice(&mut self, k: usize, comp: usize, vals: &[f64]) {
        for (i, v) in vals.iter().enumerate() {
            self.set(k, i, comp, *v);
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_component(&self, comp: usize) -> f64 {
        self.samples
            .iter()
            .skip(comp)
            .step_by(self.dim)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same grid, all zeros.
    pub fn zeros_like(&self) -> Self {
        BoundaryField {
            samples: vec![0.0; self.samples.len()],
            ..self.clone()
        }
    }

    pub fn same_grid(&self, other: &BoundaryField) -> bool {
        self.dim == other.dim
            && self.nodes == other.nodes
            && self.steps == other.steps
            && self.box_half_width == other.box_half_width
            && self.spacing_tan == other.spacing_tan
            && self.spacing_time == other.spacing_time
    }

    /// Checks that the data vanish on the outermost grid cell of the box.
    pub fn check_edge_zero(&self) -> Result<()> {
        let m = self.dim - 1;
        let mut y = vec![0usize; m];
        for k in 0..=self.steps {
            for idx in 0..self.points_per_slice() {
                let mut rem = idx;
                for a in (0..m).rev() {
                    y[a] = rem % self.nodes;
                    rem /= self.nodes;
                }
                let edge = y.iter().any(|&i| i <= 1 || i + 1 >= self.nodes);
                if edge && (0..self.dim).any(|c| self.get(k, idx, c) != 0.0) {
                    return Err(Error::Contract(
                        "boundary data must vanish within one cell of the box edge".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The compatibility condition `g(·, 0) = 0`.
    pub fn check_initial_zero(&self) -> Result<()> {
        if (0..self.points_per_slice()).any(|i| (0..self.dim).any(|c| self.get(0, i, c) != 0.0)) {
            return Err(Error::Contract("compatibility requires g(x′, 0) = 0".into()));
        }
        Ok(())
    }

    /// Binary encoding: magic `HSBF`, then little-endian
    /// `u32 version, u32 n, u32 components, f64 L, f64 h, f64 τ, f64 T,
    /// u32 nodes, u32 time nodes`, then the samples as `f64` in storage order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(56 + 8 * self.samples.len());
        out.extend_from_slice(MAGIC);
        for v in [FORMAT_VERSION, self.dim as u32, self.dim as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.box_half_width, self.spacing_tan, self.spacing_time, self.horizon] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.nodes as u32, (self.steps + 1) as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes
                .get(pos..pos + n)
                .ok_or_else(|| Error::Format("truncated boundary field".into()))?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut u32s = [0u32; 3];
        for v in &mut u32s {
            *v = u32::from_le_bytes(take(4)?.try_into().unwrap());
        }
        let [version, dim, comps] = u32s;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        if comps != dim {
            return Err(Error::Format("component count must equal n".into()));
        }
        let mut f = [0f64; 4];
        for v in &mut f {
            *v = f64::from_le_bytes(take(8)?.try_into().unwrap());
        }
        let nodes = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let tnodes = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut g = Self::zeros(dim as usize, f[0], f[1], f[2], f[3])?;
        if g.nodes != nodes || g.steps + 1 != tnodes {
            return Err(Error::Format("grid counts disagree with spacings".into()));
        }
        for v in g.samples.iter_mut() {
            *v = f64::from_le_bytes(take(8)?.try_into().unwrap());
        }
        if pos != bytes.len() {
            return Err(Error::Format("trailing bytes after samples".into()));
        }
        Ok(g)
    }

    /// CSV with columns `t, x1..x(n−1), g1..gn`.
    pub fn to_csv(&self) -> String {
        let m = self.dim - 1;
        let mut s = String::from("t");
        for a in 1..=m {
            let _ = write!(s, ",x{a}");
        }
        for c in 1..=self.dim {
            let _ = write!(s, ",g{c}");
        }
        s.push('\n');
        let mut y = vec![0.0; m];
        for k in 0..=self.steps {
            for idx in 0..self.points_per_slice() {
                self.coords_into(idx, &mut y);
                let _ = write!(s, "{}", crate::fmt_num(self.time(k)));
                for v in &y {
                    let _ = write!(s, ",{}", crate::fmt_num(*v));
                }
                for c in 0..self.dim {
                    let _ = write!(s, ",{}", crate::fmt_num(self.get(k, idx, c)));
                }
                s.push('\n');
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = BoundaryField::from_fn(3, 1.0, 0.25, 0.5, 1.0, |y, s| vec![y[0] * s, y[1], -s]).unwrap();
        assert_eq!(g.nodes(), 8);
        let b = g.to_bytes();
        assert_eq!(&b[..4], b"HSBF");
        assert_eq!(BoundaryField::from_bytes(&b).unwrap(), g);
        assert!(BoundaryField::from_bytes(&b[..b.len() - 1]).is_err());
    }

    #[test]
    fn layout_and_csv() {
        let g = BoundaryField::from_fn(3, 1.0, 0.5, 1.0, 1.0, |y, s| vec![y[0], y[1], s]).unwrap();
        // idx = i0 * nodes + i1
        assert_eq!(g.get(0, 1, 0), -1.0);
        assert_eq!(g.get(0, 1, 1), -0.5);
        assert_eq!(g.get(1, 4, 2), 1.0);
        let csv = g.to_csv();
        assert!(csv.starts_with("t,x1,x2,g1,g2,g3\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 16);
    }

    #[test]
    fn grid_validation() {
        assert!(BoundaryField::zeros(3, 1.0, 0.3, 0.1, 1.0).is_err());
        assert!(BoundaryField::zeros(2, 1.0, 0.5, 0.1, 1.0).is_err());
        let g = BoundaryField::from_fn(3, 1.0, 0.25, 0.5, 1.0, |_, _| vec![1.0, 0.0, 0.0]).unwrap();
        assert!(g.check_edge_zero().is_err());
        assert!(g.check_initial_zero().is_err());
    }
}
