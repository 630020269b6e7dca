//! Exact counting, Fourier analysis and extension estimates for distance
//! problems over the finite rings `Z/p^rZ`.
//!
//! Every fast path in the crate has a brute-force counterpart so results can
//! be cross-checked at small scale.

pub mod distance;
pub mod error;
pub mod hensel;
pub mod limits;
pub mod ring;
pub mod rotations;
pub mod spectral;
pub mod varieties;
pub mod verify;

pub use error::{LabError, Result};
pub use ring::{DiagonalForm, Modulus, PointSet, RingVec};
