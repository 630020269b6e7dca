//! Exact arithmetic in `Z/p^rZ` and `(Z/p^rZ)^n`.

mod form;
mod modulus;
mod point_set;
pub mod vector;

pub use form::DiagonalForm;
pub use modulus::{is_prime, Modulus, DEFAULT_CAP};
pub(crate) use modulus::pow_mod_u128;
pub use point_set::{PointSet, PointSetRecord};
pub use vector::RingVec;
