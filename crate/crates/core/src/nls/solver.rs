//! Solution map, Picard iteration, lifespan selection and continuation.

use std::sync::Arc;

use super::problem::{boundary_feedback, derivative_at_origin, power_map, BoundaryMode, NlsProblem};
use crate::boundary::BoundaryPropagator;
use crate::error::{Error, Result};
use crate::line::{LinePropagator, TimeSlab};
use crate::sobolev::{
    continue_boundary_data, extend_half_line, sobolev_norm_interval_unchecked, Grid1D, GridFunction,
    ReflectionRule, SobolevIndex, SpectralGrid, TimeTrace, C64,
};

/// Minimum number of time steps per segment.
const MIN_STEPS: usize = 8;

/// Run statistics of one fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `X_{T0}^s` norm of the free evolution of the segment's initial data.
    pub a: f64,
    /// Radius of the contraction ball, `2A`.
    pub r: f64,
    pub t0: f64,
    pub contraction_ratios: Vec<f64>,
    /// `‖Ψ(u_n) - u_n‖_X` per iteration.
    pub residuals: Vec<f64>,
    pub hs_norm_history: Vec<f64>,
    pub xts_norm: f64,
    pub iterations: usize,
}

/// Converged field on one segment `[t_start, t_start + T0]` of the half-line.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub slab: TimeSlab,
    /// `u(0, ·)`.
    pub boundary_trace: TimeTrace,
    pub diagnostics: Diagnostics,
}

impl SolutionField {
    pub fn t_start(&self) -> f64 {
        self.slab.t_min()
    }

    pub fn t_end(&self) -> f64 {
        self.slab.horizon()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuationStatus {
    Completed,
    BlowupDetected,
    /// A numerical failure ended the run after at least one segment.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub status: ContinuationStatus,
    pub t_reached: f64,
    pub fields: Vec<SolutionField>,
    pub final_norm: f64,
    pub warnings: Vec<String>,
    /// Error that stopped a stalled run.
    pub failure: Option<String>,
}

/// Initial Picard iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialIterate {
    FreeEvolution,
    /// Only compatible with the boundary condition when `s < 3/2` or `u0 = 0`.
    Zero,
    /// `u(t) = u(t_start)` for every slice.
    Frozen,
}

fn restrict(ext: &[C64], origin: usize, n: usize) -> Vec<C64> {
    (0..n).map(|i| if i < n - 1 { ext[origin + i] } else { ext[0] }).collect()
}

/// Time grid of a segment of length `t0` for a problem step `dt`.
pub fn segment_steps(t0: f64, dt: f64) -> (usize, f64) {
    let steps = ((t0 / dt).round() as usize).max(MIN_STEPS);
    (steps, t0 / steps as f64)
}

/// Support bound of extended segment data.
fn segment_support(t0: f64, dt: f64) -> f64 {
    2.0 * (t0 + (0.5f64).min(t0 / 4.0)) + 4.0 * dt
}

/// Solution map `Ψ` on one segment, with the data-independent pieces precomputed.
pub struct Segment<'a> {
    problem: &'a NlsProblem,
    t_start: f64,
    dt: f64,
    steps: usize,
    half: Grid1D,
    rule: ReflectionRule,
    line: LinePropagator,
    bprop: Arc<BoundaryPropagator>,
    free: TimeSlab,
    g: Vec<C64>,
    h_open: Option<Vec<C64>>,
}

impl<'a> Segment<'a> {
    pub fn new(problem: &'a NlsProblem, u_start: &GridFunction, t_start: f64, t0: f64) -> Result<Self> {
        let (steps, dt) = segment_steps(t0, problem.options.dt);
        let half = *u_start.grid();
        let bprop = Arc::new(BoundaryPropagator::new(half, dt, steps, segment_support(t0, dt))?);
        Self::with_propagator(problem, u_start, t_start, t0, bprop)
    }

    pub(crate) fn with_propagator(
        problem: &'a NlsProblem,
        u_start: &GridFunction,
        t_start: f64,
        t0: f64,
        bprop: Arc<BoundaryPropagator>,
    ) -> Result<Self> {
        let (steps, dt) = segment_steps(t0, problem.options.dt);
        let half = *u_start.grid();
        let rule = ReflectionRule::for_regularity(problem.s);
        let line = LinePropagator::new(half.symmetric_extension()?)?.with_tail_tolerance(problem.options.resolution_tol);
        let o = line.origin();
        let n = half.n();
        let coeffs = line.free_coeffs(&extend_half_line(u_start.values(), rule), dt, steps)?;
        let free_vals = coeffs.iter().map(|c| restrict(&line.values(c), o, n)).collect();
        let g = if problem.s.above_three_halves() {
            coeffs.iter().map(|c| line.dx_at_origin(c)).collect()
        } else {
            vec![C64::new(0.0, 0.0); steps + 1]
        };
        let free = TimeSlab::from_values(half, t_start, dt, free_vals);
        let h_open = match &problem.mode {
            BoundaryMode::OpenLoop(h) => Some((0..=steps).map(|m| h.value_at(t_start + m as f64 * dt)).collect()),
            BoundaryMode::ClosedLoop => None,
        };
        Ok(Self { problem, t_start, dt, steps, half, rule, line, bprop, free, g, h_open })
    }

    pub fn free_evolution(&self) -> &TimeSlab {
        &self.free
    }

    pub fn zero_slab(&self) -> TimeSlab {
        TimeSlab::from_values(self.half, self.t_start, self.dt, vec![vec![C64::new(0.0, 0.0); self.half.n()]; self.steps + 1])
    }

    pub fn frozen_slab(&self) -> TimeSlab {
        let v = self.free.slice(0).values().to_vec();
        TimeSlab::from_values(self.half, self.t_start, self.dt, vec![v; self.steps + 1])
    }

    /// `Ψ(u) = W_ℝ u0* + i ∫ W_ℝ f(u*) + W_b[h - g - p]_e`, restricted to `x ≥ 0`, where
    /// `p` is the Neumann trace of the Duhamel term.
    pub fn apply(&self, cand: &TimeSlab) -> Result<TimeSlab> {
        let pb = self.problem;
        let n = self.half.n();
        let o = self.line.origin();
        let zero = C64::new(0.0, 0.0);
        // i u_t + u_xx + f = 0 gives u = W u0 + i ∫ W(t-τ) f dτ
        let plus_i = C64::new(0.0, 1.0);
        let (duh, p_trace) = if pb.k != 0.0 {
            let forcing: Vec<Vec<C64>> = cand
                .slices()
                .iter()
                .map(|s| extend_half_line(s.values(), self.rule).into_iter().map(|v| power_map(v, pb.p, pb.k)).collect())
                .collect();
            let d = self.line.duhamel_coeffs(&forcing, self.dt)?;
            let vals: Vec<Vec<C64>> = d
                .iter()
                .map(|c| restrict(&self.line.values(c), o, n).into_iter().map(|v| v * plus_i).collect())
                .collect();
            let p: Vec<C64> = if pb.s.above_three_halves() {
                d.iter().map(|c| self.line.dx_at_origin(c) * plus_i).collect()
            } else {
                vec![zero; self.steps + 1]
            };
            (Some(vals), p)
        } else {
            (None, vec![zero; self.steps + 1])
        };
        let h: Vec<C64> = match &self.h_open {
            Some(h) => h.clone(),
            None => cand.slices().iter().map(|s| power_map(s.values()[0], pb.r, -pb.lambda)).collect(),
        };
        let b: Vec<C64> = (0..=self.steps).map(|m| h[m] - self.g[m] - p_trace[m]).collect();
        let out = if b.iter().all(|v| *v == zero) {
            self.free.clone()
        } else {
            let b_trace = TimeTrace::new(0.0, self.dt, b)?;
            let ctol = if self.t_start > 0.0 { pb.options.restart_ctol } else { pb.options.ctol };
            let b_e = continue_boundary_data(&b_trace, pb.s, ctol)?;
            let wb = self.bprop.propagate(&b_e)?;
            let vals = (0..=self.steps)
                .map(|m| {
                    let f = self.free.slice(m).values();
                    let w = wb.slice(m).values();
                    (0..n).map(|i| f[i] + w[i]).collect()
                })
                .collect();
            TimeSlab::from_values(self.half, self.t_start, self.dt, vals)
        };
        Ok(match duh {
            Some(d) => {
                let vals = out
                    .slices()
                    .iter()
                    .zip(d)
                    .map(|(s, dv)| s.values().iter().zip(dv).map(|(a, b)| a + b).collect())
                    .collect();
                TimeSlab::from_values(self.half, self.t_start, self.dt, vals)
            }
            None => out,
        })
    }
}

/// `H^s(ℝ₊)` norms of each slice, through the reflection extension.
pub fn hs_history(slab: &TimeSlab, s: SobolevIndex) -> Result<Vec<f64>> {
    let rule = ReflectionRule::for_regularity(s);
    let spec = SpectralGrid::new(slab.grid().symmetric_extension()?);
    Ok(slab
        .slices()
        .iter()
        .map(|u| spec.sobolev_norm_unchecked(&extend_half_line(u.values(), rule), s.value()))
        .collect())
}

/// `sup_t ‖u(t)‖_{H^s(ℝ₊)} + sup_x ‖u(x,·)‖_{H^{(2s+1)/4}(0,T)}` over the samples.
pub fn xts_norm(slab: &TimeSlab, s: SobolevIndex) -> Result<f64> {
    let space = hs_history(slab, s)?.into_iter().fold(0.0, f64::max);
    let order = s.time_trace_order();
    let mut time = 0.0f64;
    for i in 0..slab.grid().n() {
        time = time.max(sobolev_norm_interval_unchecked(&slab.trace_at(i), order)?);
    }
    Ok(space + time)
}

/// Norm of a converged field.
pub fn field_xts_norm(field: &SolutionField, s: SobolevIndex) -> Result<f64> {
    xts_norm(&field.slab, s)
}

/// Fixed-point iteration `u_{n+1} = Ψ(u_n)` on a prepared segment.
pub fn picard_on(segment: &Segment<'_>, init: InitialIterate) -> Result<SolutionField> {
    let pb = segment.problem;
    let s = pb.s;
    let a = xts_norm(segment.free_evolution(), s)?;
    let mut u = match init {
        InitialIterate::FreeEvolution => segment.free_evolution().clone(),
        InitialIterate::Zero => segment.zero_slab(),
        InitialIterate::Frozen => segment.frozen_slab(),
    };
    let mut ratios = Vec::new();
    let mut residuals = Vec::new();
    let mut bad = 0;
    for it in 1..=pb.options.max_iter {
        let next = segment.apply(&u)?;
        if !next.is_finite() {
            return Err(Error::NoContraction { iterations: it, ratios });
        }
        let diff = xts_norm(&next.sub(&u), s)?;
        let norm = xts_norm(&next, s)?;
        if let Some(&prev) = residuals.last() {
            let ratio = if prev > 0.0 { diff / prev } else { 0.0 };
            ratios.push(ratio);
            bad = if ratio >= 1.0 { bad + 1 } else { 0 };
            if bad >= 3 {
                return Err(Error::NoContraction { iterations: it, ratios });
            }
        }
        residuals.push(diff);
        u = next;
        if diff <= pb.options.picard_tol * norm || norm == 0.0 {
            let hs = hs_history(&u, s)?;
            let boundary_trace = u.trace_at(0);
            return Ok(SolutionField {
                boundary_trace,
                diagnostics: Diagnostics {
                    a,
                    r: 2.0 * a,
                    t0: u.horizon() - u.t_min(),
                    contraction_ratios: ratios,
                    residuals,
                    hs_norm_history: hs,
                    xts_norm: norm,
                    iterations: it,
                },
                slab: u,
            });
        }
    }
    Err(Error::NoContraction { iterations: pb.options.max_iter, ratios })
}

/// Applies `Ψ` once to a candidate slab on `[0, T0]` starting from `u0`.
pub fn apply_psi(candidate: &TimeSlab, problem: &NlsProblem, t0: f64) -> Result<TimeSlab> {
    let seg = Segment::new(problem, &problem.u0, 0.0, t0)?;
    if candidate.steps() != seg.steps || *candidate.grid() != seg.half {
        return Err(Error::InvalidInput("candidate slab does not match the segment grid".into()));
    }
    seg.apply(candidate)
}

/// Solves on `[0, T0]` from `u0`, starting from the free evolution.
pub fn picard_solve(problem: &NlsProblem, t0: f64) -> Result<SolutionField> {
    picard_solve_from(problem, t0, InitialIterate::FreeEvolution)
}

pub fn picard_solve_from(problem: &NlsProblem, t0: f64, init: InitialIterate) -> Result<SolutionField> {
    problem.validate()?;
    if !(t0 > 0.0) || t0 > problem.horizon * (1.0 + 1e-12) {
        return Err(Error::InvalidInput("T0 must lie in (0, T]".into()));
    }
    picard_on(&Segment::new(problem, &problem.u0, 0.0, t0)?, init)
}

/// Reuses boundary propagators across segments of equal length.
#[derive(Default)]
struct PropagatorCache {
    entry: Option<(usize, u64, Arc<BoundaryPropagator>)>,
}

impl PropagatorCache {
    fn get(&mut self, grid: Grid1D, t0: f64, dt: f64) -> Result<Arc<BoundaryPropagator>> {
        let (steps, seg_dt) = segment_steps(t0, dt);
        if let Some((s, d, p)) = &self.entry {
            if *s == steps && *d == seg_dt.to_bits() {
                return Ok(p.clone());
            }
        }
        let p = Arc::new(BoundaryPropagator::new(grid, seg_dt, steps, segment_support(t0, seg_dt))?);
        self.entry = Some((steps, seg_dt.to_bits(), p.clone()));
        Ok(p)
    }
}

fn select_with_cache(
    problem: &NlsProblem,
    u_start: &GridFunction,
    t_start: f64,
    t_remaining: f64,
    cache: &mut PropagatorCache,
) -> Result<SolutionField> {
    let t_min = problem.t0_min();
    let mut t0 = problem.options.t0_initial.unwrap_or(problem.horizon).min(t_remaining);
    loop {
        if t0 < t_min * (1.0 - 1e-12) {
            return Err(Error::Lifespan { t0, min: t_min });
        }
        let bprop = cache.get(*u_start.grid(), t0, problem.options.dt)?;
        let seg = Segment::with_propagator(problem, u_start, t_start, t0, bprop)?;
        match picard_on(&seg, InitialIterate::FreeEvolution) {
            Ok(field) => return Ok(field),
            Err(Error::NoContraction { .. }) => t0 /= 2.0,
            Err(e) => return Err(e),
        }
    }
}

/// Largest dyadic `T0 ≤ min(T0_initial, t_remaining)` on which the iteration contracts,
/// together with the converged field.
pub fn select_t0(problem: &NlsProblem, u_start: &GridFunction, t_start: f64, t_remaining: f64) -> Result<SolutionField> {
    select_with_cache(problem, u_start, t_start, t_remaining, &mut PropagatorCache::default())
}

/// Solves segment by segment up to the horizon, restarting from each endpoint; stops with
/// `BlowupDetected` once the `H^s` norm passes the cap or the lifespan falls below `t0_min`.
pub fn continue_solution(problem: &NlsProblem) -> Result<ContinuationResult> {
    let warnings = problem.validate()?;
    let s = problem.s;
    let initial = hs_history(
        &TimeSlab::new(0.0, 1.0, vec![problem.u0.clone()])?,
        s,
    )?[0];
    let cap = problem.options.blowup_cap.unwrap_or(1e6 * initial.max(f64::MIN_POSITIVE));
    let mut cache = PropagatorCache::default();
    let mut fields: Vec<SolutionField> = Vec::new();
    let mut t = 0.0;
    let mut u = problem.u0.clone();
    let mut final_norm = initial;
    let tiny = 1e-9 * problem.horizon;
    let finish = |status, t_reached, fields, final_norm, failure| ContinuationResult {
        status,
        t_reached,
        fields,
        final_norm,
        warnings: warnings.clone(),
        failure,
    };
    while problem.horizon - t > tiny {
        match select_with_cache(problem, &u, t, problem.horizon - t, &mut cache) {
            Ok(field) => {
                let hist = &field.diagnostics.hs_norm_history;
                if let Some(m) = hist.iter().position(|&v| v > cap) {
                    let t_hit = field.slab.times()[m];
                    final_norm = hist[m];
                    fields.push(field);
                    return Ok(finish(ContinuationStatus::BlowupDetected, t_hit, fields, final_norm, None));
                }
                final_norm = *hist.last().unwrap_or(&final_norm);
                t = field.t_end();
                u = field.slab.slice(field.slab.steps()).clone();
                fields.push(field);
            }
            Err(Error::Lifespan { .. }) => {
                return Ok(finish(ContinuationStatus::BlowupDetected, t, fields, final_norm, None));
            }
            Err(e) if !fields.is_empty() => {
                return Ok(finish(ContinuationStatus::Stalled, t, fields, final_norm, Some(e.to_string())));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(finish(ContinuationStatus::Completed, problem.horizon, fields, final_norm, None))
}

/// Fixed perturbation direction `x² e^{-x²}`; vanishes with its derivative at 0, so
/// compatibility is preserved.
pub fn perturbation_bump(grid: Grid1D) -> GridFunction {
    GridFunction::from_fn(grid, |x| C64::new(x * x * (-x * x).exp(), 0.0))
}

/// `‖u - v‖_{X_{T0}^s} / ‖u0 - v0‖_{H^s}` for `v0 = u0 + δ·bump`, on the lifespan selected
/// for the unperturbed problem.
pub fn lipschitz_probe(problem: &NlsProblem, deltas: &[f64]) -> Result<Vec<f64>> {
    problem.validate()?;
    let base = select_t0(problem, &problem.u0, 0.0, problem.horizon)?;
    let t0 = base.diagnostics.t0;
    let bump = perturbation_bump(*problem.u0.grid());
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if delta == 0.0 {
            out.push(0.0);
            continue;
        }
        let dv = bump.scale(C64::new(delta, 0.0));
        let mut pert = problem.clone();
        pert.u0 = problem.u0.add(&dv);
        let other = picard_on(&Segment::new(&pert, &pert.u0, 0.0, t0)?, InitialIterate::FreeEvolution)?;
        let num = xts_norm(&other.slab.sub(&base.slab), problem.s)?;
        let den = hs_history(&TimeSlab::new(0.0, 1.0, vec![dv])?, problem.s)?[0];
        out.push(num / den);
    }
    Ok(out)
}

/// Per-time diagnostics of a field: `(t, ‖u‖_{H^s}, ‖u‖²_{L²}, boundary residual)`.
pub fn field_rows(problem: &NlsProblem, field: &SolutionField) -> Vec<(f64, f64, f64, f64)> {
    let dx = field.slab.grid().dx();
    let h_open = match &problem.mode {
        BoundaryMode::OpenLoop(h) => Some(h),
        BoundaryMode::ClosedLoop => None,
    };
    let fb = boundary_feedback(&field.boundary_trace, problem.r, problem.lambda);
    field
        .slab
        .slices()
        .iter()
        .enumerate()
        .map(|(m, u)| {
            let t = field.slab.times()[m];
            let ux = derivative_at_origin(u.values(), dx);
            let target = match h_open {
                Some(h) => h.value_at(t),
                None => fb.values()[m],
            };
            let mass = u.l2_norm().powi(2);
            (t, field.diagnostics.hs_norm_history[m], mass, (ux - target).norm())
        })
        .collect()
}
