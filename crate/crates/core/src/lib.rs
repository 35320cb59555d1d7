//! Numerical laboratory for shortening Hamiltonian circle actions in the
//! Hofer metric on ellipsoid models of ℂⁿ.

pub mod calculus;
pub mod disjoin;
pub mod error;
pub mod flows;
pub mod index;
pub mod phase;
pub mod quadrature;
pub mod sampling;
pub mod scenario;
pub mod shorten;

pub use error::{Error, Result};
pub use phase::{
    apply_chain, invert_chain, momentum, EllipsoidModel, PhasePoint, Primitive,
    SymplecticMapChain, WeightVector,
};
