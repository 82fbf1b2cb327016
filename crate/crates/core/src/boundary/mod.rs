//! Boundary data: atoms, sampled fields, the Riesz split and the gradient lift.

mod atom;
mod field;
mod spectral;

pub use atom::{atom_certify, make_atom, Atom, AtomExpansion, CertifyReport, Profile};
pub use field::BoundaryField;
pub use spectral::{
    gradient_lift, riesz_transform, split_boundary_data, tangential_trace_check, GradientLift, LiftValue,
};
