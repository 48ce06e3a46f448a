//! Problem description, structural assumptions and the pointwise nonlinear maps.

use crate::error::{Error, Result};
use crate::sobolev::{GridFunction, SobolevIndex, TimeTrace, C64};

/// How the Neumann datum at `x = 0` is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryMode {
    /// `u_x(0,t) = h(t)` for given data on `[0, T]`.
    OpenLoop(TimeTrace),
    /// `u_x(0,t) = -λ|u(0,t)|^r u(0,t)`.
    ClosedLoop,
}

/// Numerical controls shared by the fixed-point solver and the continuation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub dt: f64,
    /// Tolerance on the compatibility residual when `s > 3/2`.
    pub ctol: f64,
    /// Same check for segments restarted from a computed slice, whose Neumann trace
    /// carries the discretization error of the previous segment.
    pub restart_ctol: f64,
    /// Turn violated structural assumptions into errors.
    pub strict: bool,
    pub picard_tol: f64,
    pub max_iter: usize,
    /// First lifespan tried by the selection loop; defaults to the whole horizon.
    pub t0_initial: Option<f64>,
    /// Defaults to `T / 2^14`.
    pub t0_min: Option<f64>,
    /// Defaults to `1e6 × ‖u0‖_{H^s}`.
    pub blowup_cap: Option<f64>,
    /// Spectral tail fraction tolerated inside the fixed-point map.
    pub resolution_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            ctol: 1e-3,
            restart_ctol: 1e-2,
            strict: false,
            picard_tol: 1e-10,
            max_iter: 50,
            t0_initial: None,
            t0_min: None,
            blowup_cap: None,
            resolution_tol: 1e-3,
        }
    }
}

/// `i u_t + u_xx + k|u|^p u = 0` on `x > 0` with Neumann data from `mode`.
#[derive(Debug, Clone, PartialEq)]
pub struct NlsProblem {
    pub s: SobolevIndex,
    pub p: f64,
    pub r: f64,
    pub k: f64,
    pub lambda: f64,
    /// Horizon `T`.
    pub horizon: f64,
    /// Initial data on a half-line grid `[0, L]`.
    pub u0: GridFunction,
    pub mode: BoundaryMode,
    pub options: SolverOptions,
}

fn is_integer(v: f64) -> bool {
    v.fract() == 0.0
}

fn is_odd_integer(v: f64) -> bool {
    is_integer(v) && (v as i64) % 2 != 0
}

/// Assumption on the interior power `p` for regularity `s`, or the reason it fails.
pub fn check_interior_power(s: f64, p: f64) -> std::result::Result<(), String> {
    if s == 1.0 || (is_integer(p) && !is_odd_integer(p)) {
        return Ok(());
    }
    let ok = match (is_integer(s), is_odd_integer(p)) {
        (true, true) => p >= s,
        (true, false) => p.floor() >= s - 1.0,
        (false, true) => p > s,
        (false, false) => p.floor() >= s.floor(),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("interior power p = {p} is not admissible for s = {s}"))
    }
}

/// Assumption on the boundary power `r` for regularity `s`, or the reason it fails.
pub fn check_boundary_power(s: f64, r: f64) -> std::result::Result<(), String> {
    let order = (2.0 * s - 1.0) / 4.0;
    if is_integer(r) && !is_odd_integer(r) {
        return Ok(());
    }
    let ok = if is_odd_integer(r) { r > order } else { r.floor() >= order.floor() };
    if ok {
        Ok(())
    } else {
        Err(format!("boundary power r = {r} is not admissible for s = {s}"))
    }
}

impl NlsProblem {
    /// Closed-loop problem with default options.
    pub fn closed_loop(s: f64, p: f64, r: f64, k: f64, lambda: f64, horizon: f64, u0: GridFunction) -> Result<Self> {
        Ok(Self {
            s: SobolevIndex::regularity(s)?,
            p,
            r,
            k,
            lambda,
            horizon,
            u0,
            mode: BoundaryMode::ClosedLoop,
            options: SolverOptions::default(),
        })
    }

    /// Open-loop problem with default options; `p`, `r` and `λ` are inert for the boundary.
    pub fn open_loop(s: f64, p: f64, k: f64, horizon: f64, u0: GridFunction, h: TimeTrace) -> Result<Self> {
        Ok(Self {
            s: SobolevIndex::regularity(s)?,
            p,
            r: 2.0,
            k,
            lambda: 0.0,
            horizon,
            u0,
            mode: BoundaryMode::OpenLoop(h),
            options: SolverOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    pub fn is_linear(&self) -> bool {
        self.k == 0.0 && (self.lambda == 0.0 || matches!(self.mode, BoundaryMode::OpenLoop(_)))
    }

    pub fn t0_min(&self) -> f64 {
        self.options.t0_min.unwrap_or(self.horizon / 16384.0)
    }

    /// Checks parameters and returns warnings for violated structural assumptions
    /// (errors instead in strict mode).
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |what: &str| Error::InvalidInput(what.to_string());
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(bad("p must be positive"));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(bad("r must be positive"));
        }
        if !self.k.is_finite() || !self.lambda.is_finite() {
            return Err(bad("k and lambda must be finite"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(bad("horizon must be positive"));
        }
        if !(self.options.dt > 0.0) || self.options.dt > self.horizon {
            return Err(bad("dt must lie in (0, T]"));
        }
        if self.u0.grid().x_min() != 0.0 {
            return Err(bad("initial data must live on [0, L]"));
        }
        if let BoundaryMode::OpenLoop(h) = &self.mode {
            if h.t_min() > 0.0 || h.t_max() < self.horizon * (1.0 - 1e-12) {
                return Err(bad("boundary data must cover [0, T]"));
            }
        }
        let s = self.s.value();
        let mut warnings = Vec::new();
        if self.k != 0.0 {
            if let Err(w) = check_interior_power(s, self.p) {
                warnings.push(w);
            }
        }
        if matches!(self.mode, BoundaryMode::ClosedLoop) && self.lambda != 0.0 {
            if let Err(w) = check_boundary_power(s, self.r) {
                warnings.push(w);
            }
        }
        if self.options.strict && !warnings.is_empty() {
            return Err(Error::InvalidInput(warnings.join("; ")));
        }
        let residual = check_compatibility(self);
        if residual > self.options.ctol {
            return Err(Error::Compatibility { residual, tol: self.options.ctol });
        }
        Ok(warnings)
    }
}

/// `k|u|^p u` pointwise; `|u|^p = exp(p log|u|)` with `0 ↦ 0`.
pub fn power_map(v: C64, p: f64, k: f64) -> C64 {
    let a = v.norm();
    if a == 0.0 {
        return C64::new(0.0, 0.0);
    }
    v * (k * (p * a.ln()).exp())
}

/// `f(u) = k|u|^p u`.
pub fn nonlinearity(u: &GridFunction, p: f64, k: f64) -> GridFunction {
    let values = u.values().iter().map(|&v| power_map(v, p, k)).collect();
    GridFunction::from_parts(*u.grid(), values)
}

/// `h(v) = -λ|v|^r v` applied to a boundary trace.
pub fn boundary_feedback(trace: &TimeTrace, r: f64, lambda: f64) -> TimeTrace {
    trace.map(|v| power_map(v, r, -lambda))
}

/// One-sided fourth-order `u'(0)`.
pub fn derivative_at_origin(v: &[C64], dx: f64) -> C64 {
    (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) / (12.0 * dx)
}

/// `|u0'(0) + λ|u0(0)|^r u0(0)|` (closed loop) or `|u0'(0) - h(0)|` (open loop) when
/// `s > 3/2`; zero otherwise.
pub fn check_compatibility(problem: &NlsProblem) -> f64 {
    if !problem.s.above_three_halves() {
        return 0.0;
    }
    let v = problem.u0.values();
    let du = derivative_at_origin(v, problem.u0.grid().dx());
    let target = match &problem.mode {
        BoundaryMode::ClosedLoop => power_map(v[0], problem.r, -problem.lambda),
        BoundaryMode::OpenLoop(h) => h.values()[0],
    };
    (du - target).norm()
}
