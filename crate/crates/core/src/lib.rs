//! Numerical laboratory for the nonlinear Schrödinger equation on the half-line,
//! `i u_t + u_xx + k|u|^p u = 0`, with the nonlinear Neumann/Robin boundary condition
//! `u_x(0,t) + λ|u(0,t)|^r u(0,t) = 0` or an inhomogeneous Neumann condition.
//!
//! The solution is built as a fixed point of the representation
//! `u = W_ℝ u₀* − i∫W_ℝ f(u*) + W_b [h − g − p]_e`, where the boundary operator `W_b`
//! is assembled from Laplace-transform spectra of the extended boundary data.

pub mod boundary;
pub mod error;
pub mod estimate_lab;
pub mod fd_oracle;
pub mod quadrature;
pub mod line;
pub mod nls;
pub mod sobolev;

pub use error::{Error, Result};
