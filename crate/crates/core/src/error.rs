use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("under-resolved spectrum: tail fraction {tail:.3e} exceeds {limit:.1e}")]
    Resolution { tail: f64, limit: f64 },

    #[error("compatibility residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    Compatibility { residual: f64, tol: f64 },

    #[error("boundary extension has nonzero mean {mean:.3e}")]
    InvalidExtension { mean: f64 },

    #[error("data does not decay at the truncation edge (|u| = {value:.3e})")]
    Truncation { value: f64 },

    #[error("time {t} lies outside the slab horizon {horizon}")]
    Domain { t: f64, horizon: f64 },

    #[error("quadrature did not converge (error estimate {estimate:.3e})")]
    Quadrature { estimate: f64 },

    #[error("Picard iteration stopped contracting after {iterations} iterations")]
    NoContraction { iterations: usize, ratios: Vec<f64> },

    #[error("selected lifespan {t0:.3e} is below the minimum {min:.3e}")]
    Lifespan { t0: f64, min: f64 },

    #[error("inner fixed-point iteration failed to converge at step {step}")]
    Step { step: usize },

    #[error("discrete mass drifted by {drift:.3e} (relative)")]
    Stability { drift: f64 },
}
