//! Special functions and geometric constants.

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Surface area of the unit sphere `S^{d-1} ⊂ ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in `ℝ^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// `∫_{S^{d-1}} |ω_1|^p dω`.
pub fn sphere_abs_moment(d: usize, p: f64) -> f64 {
    2.0 * PI.powf((d as f64 - 1.0) / 2.0) * gamma((p + 1.0) / 2.0) / gamma((d as f64 + p) / 2.0)
}

/// Constant `c_n` with `E(x) = -c_n |x|^{2-n}` solving `ΔE = δ`.
pub fn laplace_constant(n: usize) -> f64 {
    1.0 / ((n as f64 - 2.0) * sphere_area(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((laplace_constant(3) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn abs_moment() {
        // d = 2, p = 2: ∫ cos² = π
        assert!((sphere_abs_moment(2, 2.0) - PI).abs() < 1e-13);
        // d = 3, p = 2: 4π/3
        assert!((sphere_abs_moment(3, 2.0) - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}
