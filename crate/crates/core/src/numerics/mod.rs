pub mod quad;
pub mod scalar;
pub mod special;

pub use quad::{gauss_legendre, integrate, GaussLegendre, QuadValue, Tolerance};
pub use scalar::{Jet, Real};
