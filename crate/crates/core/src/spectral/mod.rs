//! Discrete Fourier analysis on `(Z/p^rZ)^n`.
//!
//! Convention: `f^(m) = q^{-n} sum_x f(x) e_q(-m.x)` with `e_q(t) = exp(2 pi i t / q)`;
//! the inverse carries no normalisation.

pub mod cayley;
pub mod kernel;
pub mod ntt;
pub mod sphere;
pub mod sums;
pub mod transform;

pub use cayley::{cayley_spectrum, CayleySpectrum};
pub use kernel::{default_kernel, kernel_by_name, DftKernel, Twiddles, KERNEL_NAMES};
pub use ntt::{difference_histogram, difference_histogram_pairs, NttPlan};
pub use sphere::{
    default_kappa, fourier_bound_profile, fourier_bound_profile_with, sphere_fourier, sphere_fourier_all_radii, BoundProfile,
    FourierPath, SphereFourier, StratumReport,
};
pub use transform::{convolve, fourier, indicator, inverse, SpectrumTable, Transformer};
pub use sums::{
    complete_sum, complete_sum_bound, complete_sum_constants, complete_sum_constants_with,
    complete_sum_exhaustive, complete_sum_reduced, moment_regime, pair_depth, radius_sum, second_moment_one_var,
    weil_sum, CompleteSumConstants, MomentRegime, RadiusSumReport, SecondMomentReport, WeilReport,
};
