//! Fixed-point solver for the half-line problem in open-loop (given Neumann data) and
//! closed-loop (nonlinear Robin) form.

mod problem;
mod solver;

pub use problem::{
    boundary_feedback, check_boundary_power, check_compatibility, check_interior_power, derivative_at_origin,
    nonlinearity, power_map, BoundaryMode, NlsProblem, SolverOptions,
};
pub use solver::{
    apply_psi, continue_solution, field_rows, field_xts_norm, hs_history, lipschitz_probe, perturbation_bump,
    picard_on, picard_solve, picard_solve_from, segment_steps, select_t0, xts_norm, ContinuationResult,
    ContinuationStatus, Diagnostics, InitialIterate, Segment, SolutionField,
};
