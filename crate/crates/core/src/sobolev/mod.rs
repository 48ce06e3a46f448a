//! Grids, transforms with a fixed convention, fractional Sobolev norms and the
//! extension machinery for initial and boundary data.

mod extension;
mod grid;
mod spectral;

pub use extension::{
    antiderivative, continue_boundary_data, extend_boundary_data, extend_boundary_data_with_tol, extend_half_line, extend_initial_data,
    extend_initial_data_with, interval_extension, sobolev_norm_half_line, sobolev_norm_interval,
    sobolev_norm_interval_unchecked, ExtendedBoundaryData, ReflectionRule, COMPATIBILITY_TOL,
};
pub use grid::{FourierConvention, Grid1D, GridFunction, SobolevIndex, SpectralFunction, TimeTrace, C64};
pub use spectral::{fourier_transform, inverse_fourier_transform, sobolev_norm_line, SpectralGrid, TAIL_TOLERANCE};
