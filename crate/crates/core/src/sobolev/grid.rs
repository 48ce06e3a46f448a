use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Uniform sampling of an interval `[x_min, x_max]` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("grid needs at least 8 points, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidInput(format!("degenerate grid interval [{x_min}, {x_max}]")));
        }
        let dx = (x_max - x_min) / (n - 1) as f64;
        Ok(Self { x_min, x_max, n, dx })
    }

    /// `[0, length]` sampled with `n` points.
    pub fn half_line(length: f64, n: usize) -> Result<Self> {
        Self::new(0.0, length, n)
    }

    /// Periodic grid on `[-L, L)` sharing the spacing of a half-line grid on `[0, L]`.
    /// Index `n_half - 1` is the origin.
    pub fn symmetric_extension(&self) -> Result<Self> {
        let n = 2 * (self.n - 1);
        Self::new(-self.x_max, self.x_max - self.dx, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Period used by spectral operations: the samples are one period of length `n * dx`.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the sample nearest to `x`, if it lies on the grid to rounding.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = (x - self.x_min) / self.dx;
        let i = r.round();
        if (r - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.n {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Complex samples of a function of `x` on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("grid function has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.n()] }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    /// Skips the finiteness check; for internal arithmetic on already validated data.
    pub(crate) fn from_parts(grid: Grid1D, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::from_parts(self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::from_parts(self.grid, values)
    }

    /// Trapezoid-rule L² norm over the sampled interval.
    pub fn l2_norm(&self) -> f64 {
        let n = self.values.len();
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * v.norm_sqr();
        }
        (acc * self.grid.dx()).sqrt()
    }

    /// Rectangle-rule L² norm treating the samples as one period.
    pub fn periodic_l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Complex samples of a function of `t` on a uniform time grid starting at `t_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    t_min: f64,
    dt: f64,
    values: Vec<C64>,
}

impl TimeTrace {
    pub fn new(t_min: f64, dt: f64, values: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidInput("time trace needs at least two samples".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("time trace has non-finite entries".into()));
        }
        Ok(Self { t_min, dt, values })
    }

    /// Samples `f` at `t_min + j dt` for `j = 0..=steps`.
    pub fn from_fn(t_min: f64, dt: f64, steps: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = (0..=steps).map(|j| f(t_min + j as f64 * dt)).collect();
        Self::new(t_min, dt, values)
    }

    pub(crate) fn from_parts(t_min: f64, dt: f64, values: Vec<C64>) -> Self {
        Self { t_min, dt, values }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_min + (self.values.len() - 1) as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.dt
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(self.t_min, self.dt, self.values.iter().map(|v| v * c).collect())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_parts(self.t_min, self.dt, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Trapezoid integral over the sampled interval.
    pub fn integral(&self) -> C64 {
        let n = self.values.len();
        let mut acc = C64::new(0.0, 0.0);
        for (j, v) in self.values.iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            acc += v * w;
        }
        acc * self.dt
    }

    pub fn l1_norm(&self) -> f64 {
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 || j == n - 1 { 0.5 * v.norm() } else { v.norm() })
            .sum::<f64>()
            * self.dt
    }

    pub fn l2_norm(&self) -> f64 {
        let n = self.values.len();
        let acc: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 || j == n - 1 { 0.5 * v.norm_sqr() } else { v.norm_sqr() })
            .sum();
        (acc * self.dt).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Value at time `t`, zero outside the sampled interval, linear in between samples.
    pub fn value_at(&self, t: f64) -> C64 {
        let r = (t - self.t_min) / self.dt;
        let last = (self.values.len() - 1) as f64;
        if r < -1e-9 || r > last + 1e-9 {
            return C64::new(0.0, 0.0);
        }
        let r = r.clamp(0.0, last);
        let j = r.floor() as usize;
        if j + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let w = r - j as f64;
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }
}

/// Normalization of a Fourier transform pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierConvention {
    /// `ĝ(β) = (2π)^{-1/2} ∫ g(x) e^{-iβx} dx`, inverse with `e^{+iβx}` and the same factor.
    UnitaryAngular,
}

/// Complex spectrum samples with the quadrature weights needed to integrate over `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub freqs: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<C64>,
    pub convention: FourierConvention,
}

impl SpectralFunction {
    pub fn new(freqs: Vec<f64>, weights: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if freqs.len() != values.len() || freqs.len() != weights.len() {
            return Err(Error::InvalidInput("spectral arrays differ in length".into()));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("frequencies must be strictly increasing".into()));
        }
        Ok(Self { freqs, weights, values, convention: FourierConvention::UnitaryAngular })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Sobolev regularity index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    /// Any real order, for use as a generic norm index.
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite Sobolev index {s}")));
        }
        Ok(Self(s))
    }

    /// An index admissible as solution regularity: `s ∈ (1/2, 7/2)`, `s ≠ 3/2`.
    pub fn regularity(s: f64) -> Result<Self> {
        if !(s > 0.5 && s < 3.5) || (s - 1.5).abs() < 1e-12 {
            return Err(Error::InvalidInput(format!(
                "solution regularity must lie in (1/2, 7/2) minus {{3/2}}, got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Whether the Neumann trace and the zeroth compatibility condition are meaningful.
    pub fn above_three_halves(&self) -> bool {
        self.0 > 1.5
    }

    /// Boundary-data order `(2s-1)/4`.
    pub fn boundary_order(&self) -> f64 {
        (2.0 * self.0 - 1.0) / 4.0
    }

    /// Time-trace order `(2s+1)/4`.
    pub fn time_trace_order(&self) -> f64 {
        (2.0 * self.0 + 1.0) / 4.0
    }

    /// Antiderivative order `(2s+3)/4`.
    pub fn antiderivative_order(&self) -> f64 {
        (2.0 * self.0 + 3.0) / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid1D::new(0.0, 1.0, 7).is_err());
        assert!(Grid1D::new(1.0, 1.0, 16).is_err());
        assert!(TimeTrace::new(0.0, 0.0, vec![C64::new(0.0, 0.0); 4]).is_err());
        assert!(TimeTrace::new(0.0, -1.0, vec![C64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn symmetric_extension_puts_origin_on_grid() {
        let g = Grid1D::half_line(20.0, 512).unwrap();
        let e = g.symmetric_extension().unwrap();
        assert_eq!(e.n(), 1022);
        assert!((e.dx() - g.dx()).abs() < 1e-14);
        assert_eq!(e.index_of(0.0), Some(511));
        assert!((e.period() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn regularity_index_excludes_three_halves() {
        assert!(SobolevIndex::regularity(1.5).is_err());
        assert!(SobolevIndex::regularity(0.5).is_err());
        assert!(SobolevIndex::regularity(3.5).is_err());
        let s = SobolevIndex::regularity(2.0).unwrap();
        assert!(s.above_three_halves());
        assert!((s.boundary_order() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = Grid1D::half_line(1.0, 8).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 8];
        v[3] = C64::new(f64::NAN, 0.0);
        assert!(GridFunction::new(g, v).is_err());
    }
}
