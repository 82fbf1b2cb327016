//! Layer-potential evaluation of the non-stationary Stokes system in the
//! half-space `ℝⁿ₊ × (0, T)` with prescribed boundary velocity, and numerical
//! tooling around it: Besov-type norms, atom synthesis, and checks of the
//! pointwise and weighted-integral estimates satisfied by atom responses.

pub mod besov;
pub mod boundary;
mod error;
pub mod kernels;
pub mod numerics;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

/// Crate version; every module shares it.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Module names echoed in report headers.
pub const MODULES: [&str; 5] = ["kernels", "boundary", "besov", "solver", "verify"];

/// Decimal text for reports: plain notation for magnitudes in `[1e−4, 1e6)`,
/// exponent notation otherwise. Shortest round-trip digits, so the output is
/// deterministic.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
