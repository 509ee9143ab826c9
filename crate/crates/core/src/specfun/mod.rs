//! Special functions: gamma, Bessel functions of the first kind and their zeros.

mod bessel;
mod gamma;
mod zeros;

pub use bessel::{bessel_j, bessel_j_d, bessel_j_dd, BesselOrder};
pub(crate) use gamma::ln_gamma_unchecked;
pub use gamma::{gamma, log_gamma, recip_gamma};
pub use zeros::{asymptotic_zero, bessel_zeros, BesselZeroTable, ZERO_TOL};
