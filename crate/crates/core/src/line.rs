//! Free Schrödinger group on the extended line, the Duhamel integral and the
//! Neumann traces of both at the origin.

use crate::error::{Error, Result};
use crate::sobolev::{Grid1D, GridFunction, SpectralGrid, TimeTrace, C64, TAIL_TOLERANCE};

/// Space-time field sampled at uniform times `t_m = t_min + m dt`, every slice on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlab {
    times: Vec<f64>,
    slices: Vec<GridFunction>,
}

impl TimeSlab {
    pub fn new(t_min: f64, dt: f64, slices: Vec<GridFunction>) -> Result<Self> {
        if !(dt > 0.0) || slices.is_empty() {
            return Err(Error::InvalidInput("slab needs dt > 0 and at least one slice".into()));
        }
        let grid = *slices[0].grid();
        if slices.iter().any(|s| *s.grid() != grid) {
            return Err(Error::InvalidInput("slab slices live on different grids".into()));
        }
        let times = (0..slices.len()).map(|m| t_min + m as f64 * dt).collect();
        Ok(Self { times, slices })
    }

    pub fn zeros(grid: Grid1D, t_min: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(t_min, dt, vec![GridFunction::zeros(grid); steps + 1])
    }

    pub(crate) fn from_values(grid: Grid1D, t_min: f64, dt: f64, values: Vec<Vec<C64>>) -> Self {
        let times = (0..values.len()).map(|m| t_min + m as f64 * dt).collect();
        let slices = values.into_iter().map(|v| GridFunction::from_parts(grid, v)).collect();
        Self { times, slices }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[GridFunction] {
        &self.slices
    }

    pub fn slice(&self, m: usize) -> &GridFunction {
        &self.slices[m]
    }

    pub fn grid(&self) -> &Grid1D {
        self.slices[0].grid()
    }

    pub fn t_min(&self) -> f64 {
        self.times[0]
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            f64::NAN
        }
    }

    /// Number of time steps (slices minus one).
    pub fn steps(&self) -> usize {
        self.slices.len() - 1
    }

    /// Samples `u(x_i, ·)` at grid index `i`.
    pub fn trace_at(&self, i: usize) -> TimeTrace {
        let values = self.slices.iter().map(|s| s.values()[i]).collect();
        TimeTrace::from_parts(self.t_min(), self.dt(), values)
    }

    pub fn map_slices(&self, f: impl Fn(&GridFunction) -> GridFunction) -> Self {
        Self { times: self.times.clone(), slices: self.slices.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.add(b)).collect();
        Self { times: self.times.clone(), slices }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.sub(b)).collect();
        Self { times: self.times.clone(), slices }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_slices(|s| s.scale(c))
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().map(GridFunction::max_abs).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.slices.iter().all(GridFunction::is_finite)
    }
}

/// Spectral propagator bound to one periodic extended grid.
#[derive(Debug, Clone)]
pub struct LinePropagator {
    spectral: SpectralGrid,
    origin: usize,
    tail_tol: f64,
}

impl LinePropagator {
    pub fn new(grid: Grid1D) -> Result<Self> {
        let origin = grid
            .index_of(0.0)
            .ok_or_else(|| Error::InvalidInput("extended grid must contain x = 0".into()))?;
        Ok(Self { spectral: SpectralGrid::new(grid), origin, tail_tol: TAIL_TOLERANCE })
    }

    /// Overrides the tail fraction above which spectra count as under-resolved.
    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn grid(&self) -> &Grid1D {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &SpectralGrid {
        &self.spectral
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    fn check_resolved(&self, coeffs: &[C64]) -> Result<()> {
        let (total, tail) = self.spectral.sobolev_sq(coeffs, 0.0);
        if total > 0.0 && tail > self.tail_tol * total {
            return Err(Error::Resolution { tail: tail / total, limit: self.tail_tol });
        }
        Ok(())
    }

    fn phase(&self, coeffs: &mut [C64], t: f64) {
        for (c, &b) in coeffs.iter_mut().zip(self.spectral.betas()) {
            *c *= C64::from_polar(1.0, -b * b * t);
        }
    }

    /// DFT coefficients of `W(t_m) phi` for `t_m = m dt`, `m = 0..=steps`.
    pub fn free_coeffs(&self, phi: &[C64], dt: f64, steps: usize) -> Result<Vec<Vec<C64>>> {
        let c0 = self.spectral.forward(phi);
        self.check_resolved(&c0)?;
        Ok((0..=steps)
            .map(|m| {
                let mut c = c0.clone();
                self.phase(&mut c, m as f64 * dt);
                c
            })
            .collect())
    }

    /// DFT coefficients of `∫_0^{t_m} W(t_m - τ) f(τ) dτ` by composite Simpson in `τ`.
    pub fn duhamel_coeffs(&self, f: &[Vec<C64>], dt: f64) -> Result<Vec<Vec<C64>>> {
        let n = self.grid().n();
        let betas = self.spectral.betas();
        let mut g = Vec::with_capacity(f.len());
        let (mut total, mut tail) = (0.0, 0.0);
        for (j, fj) in f.iter().enumerate() {
            let mut c = self.spectral.forward(fj);
            let (a, b) = self.spectral.sobolev_sq(&c, 0.0);
            total += a;
            tail += b;
            let tau = j as f64 * dt;
            for (ck, &bk) in c.iter_mut().zip(betas) {
                *ck *= C64::from_polar(1.0, bk * bk * tau);
            }
            g.push(c);
        }
        if total > 0.0 && tail > self.tail_tol * total {
            return Err(Error::Resolution { tail: tail / total, limit: self.tail_tol });
        }
        let zero = C64::new(0.0, 0.0);
        let mut even = vec![zero; n];
        let mut odd = vec![zero; n];
        let mut out: Vec<Vec<C64>> = Vec::with_capacity(g.len());
        for m in 0..g.len() {
            let acc = if m % 2 == 0 { &mut even } else { &mut odd };
            for (a, v) in acc.iter_mut().zip(&g[m]) {
                *a += v;
            }
            let s: Vec<C64> = match m {
                0 => vec![zero; n],
                1 => (0..n).map(|k| (g[0][k] + g[1][k]) * (0.5 * dt)).collect(),
                _ if m % 2 == 0 => (0..n)
                    .map(|k| {
                        let e_inner = even[k] - g[0][k] - g[m][k];
                        (g[0][k] + g[m][k] + odd[k] * 4.0 + e_inner * 2.0) * (dt / 3.0)
                    })
                    .collect(),
                _ => (0..n)
                    .map(|k| {
                        out[m - 3][k]
                            + (g[m - 3][k] + (g[m - 2][k] + g[m - 1][k]) * 3.0 + g[m][k]) * (3.0 * dt / 8.0)
                    })
                    .collect(),
            };
            out.push(s);
        }
        for (m, c) in out.iter_mut().enumerate() {
            self.phase(c, m as f64 * dt);
        }
        Ok(out)
    }

    pub fn values(&self, coeffs: &[C64]) -> Vec<C64> {
        self.spectral.inverse(coeffs)
    }

    /// `∂ₓ` at `x = 0` from DFT coefficients (spectral interpolation).
    pub fn dx_at_origin(&self, coeffs: &[C64]) -> C64 {
        self.spectral.derivative_at(coeffs, self.origin)
    }
}

/// `W_ℝ(t) phi`: multiplies the spectrum by `e^{-iβ²t}`.
pub fn free_propagate(phi: &GridFunction, t: f64) -> Result<GridFunction> {
    let prop = LinePropagator::new(*phi.grid())?;
    let c = prop.free_coeffs(phi.values(), t, 1)?.pop().unwrap_or_default();
    Ok(GridFunction::from_parts(*phi.grid(), prop.values(&c)))
}

/// Free evolution of `phi` sampled at `t_m = m dt`.
pub fn free_evolution(phi: &GridFunction, dt: f64, steps: usize) -> Result<TimeSlab> {
    let prop = LinePropagator::new(*phi.grid())?;
    let coeffs = prop.free_coeffs(phi.values(), dt, steps)?;
    let values = coeffs.iter().map(|c| prop.values(c)).collect();
    Ok(TimeSlab::from_values(*phi.grid(), 0.0, dt, values))
}

fn slab_values(f: &TimeSlab) -> Vec<Vec<C64>> {
    f.slices().iter().map(|s| s.values().to_vec()).collect()
}

/// `∫_0^t W_ℝ(t-τ) f(τ) dτ` with `τ` measured from the slab start. Off-grid `t` adds a
/// trapezoid panel on linearly interpolated forcing.
pub fn duhamel(f_slab: &TimeSlab, t: f64) -> Result<GridFunction> {
    let span = f_slab.horizon() - f_slab.t_min();
    if t < 0.0 || t > span * (1.0 + 1e-12) {
        return Err(Error::Domain { t, horizon: span });
    }
    let dt = f_slab.dt();
    let grid = *f_slab.grid();
    let prop = LinePropagator::new(grid)?;
    let k = ((t / dt) * (1.0 + 1e-12)).floor() as usize;
    let k = k.min(f_slab.steps());
    let vals = slab_values(f_slab);
    let coeffs = prop.duhamel_coeffs(&vals[..=k], dt)?;
    let mut c = coeffs[k].clone();
    let rest = t - k as f64 * dt;
    prop.phase(&mut c, rest);
    if rest > 1e-14 * dt && k < f_slab.steps() {
        // trapezoid on the interaction-picture forcing e^{iβ²τ} f̂(τ), interpolated linearly
        let w = rest / dt;
        let fk = prop.spectral().forward(&vals[k]);
        let fk1 = prop.spectral().forward(&vals[k + 1]);
        let (tk, tk1) = (k as f64 * dt, (k + 1) as f64 * dt);
        for (i, &b) in prop.spectral().betas().iter().enumerate() {
            let b2 = b * b;
            let gk = fk[i] * C64::from_polar(1.0, b2 * tk);
            let gk1 = fk1[i] * C64::from_polar(1.0, b2 * tk1);
            let gt = gk * (1.0 - w) + gk1 * w;
            c[i] += (gk + gt) * C64::from_polar(0.5 * rest, -b2 * t);
        }
    }
    Ok(GridFunction::from_parts(grid, prop.values(&c)))
}

/// Duhamel integral at every slab time.
pub fn duhamel_slab(f_slab: &TimeSlab) -> Result<TimeSlab> {
    let grid = *f_slab.grid();
    let prop = LinePropagator::new(grid)?;
    let coeffs = prop.duhamel_coeffs(&slab_values(f_slab), f_slab.dt())?;
    let values = coeffs.iter().map(|c| prop.values(c)).collect();
    Ok(TimeSlab::from_values(grid, f_slab.t_min(), f_slab.dt(), values))
}

/// `g(t) = ∂ₓ W_ℝ(t) u0*|_{x=0}` at `t_m = m dt`.
pub fn neumann_trace_free(u0_star: &GridFunction, dt: f64, steps: usize) -> Result<TimeTrace> {
    let prop = LinePropagator::new(*u0_star.grid())?;
    let coeffs = prop.free_coeffs(u0_star.values(), dt, steps)?;
    let values = coeffs.iter().map(|c| prop.dx_at_origin(c)).collect();
    TimeTrace::new(0.0, dt, values)
}

/// `p(t) = -i ∂ₓ ∫_0^t W_ℝ(t-τ) f(τ) dτ |_{x=0}` on the slab's times.
pub fn neumann_trace_duhamel(f_slab: &TimeSlab) -> Result<TimeTrace> {
    let prop = LinePropagator::new(*f_slab.grid())?;
    let coeffs = prop.duhamel_coeffs(&slab_values(f_slab), f_slab.dt())?;
    let values = coeffs.iter().map(|c| prop.dx_at_origin(c) * C64::new(0.0, -1.0)).collect();
    TimeTrace::new(f_slab.t_min(), f_slab.dt(), values)
}
