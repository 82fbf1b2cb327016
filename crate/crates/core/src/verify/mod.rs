//! Reproduction, at desk scale, of the quantitative estimates: pointwise
//! bound ratios for atom responses, weighted space-time integrals, norm
//! ratios, and kernel-level scaling and decay.

mod bounds;
mod integrals;
mod kernels;
mod registry;

pub use bounds::*;
pub use integrals::*;
pub use kernels::*;
pub use registry::*;
