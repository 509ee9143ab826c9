//! Explicit solutions of the nonlocal initial-boundary problem
//!
//! ```text
//! ∂^α u − Σ λ_i ∂^{α_i} u − (u_xx + u_x/x − ν²u/x²) = f(t, x),   0 < x < 1, 0 < t < T
//! u(t, 1) = 0,   x u_x → 0 as x → 0,   u(0, x) + M u(T, x) = 0
//! ```
//!
//! built from Fourier–Bessel modes `J_ν(γ_k x)` whose time amplitudes are
//! convolutions with multinomial Mittag-Leffler kernels. Independent
//! finite-difference oracles for the Caputo and Bessel operators check the
//! result.

pub mod error;
pub mod fourier_bessel;
pub mod fractional;
pub mod mittag_leffler;
pub mod numeric;
pub mod quadrature;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
