//! FFT-backed transforms and Fourier-multiplier Sobolev norms on periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::grid::{Grid1D, GridFunction, SobolevIndex, SpectralFunction, C64};
use crate::error::{Error, Result};

/// Tail-mass tolerance above which a spectrum counts as under-resolved.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Fraction of the Nyquist band beyond which spectral energy counts as tail.
const TAIL_BAND: f64 = 2.0 / 3.0;

/// Planned forward/inverse FFTs and the angular wavenumbers of a grid, in FFT order.
#[derive(Clone)]
pub struct SpectralGrid {
    grid: Grid1D,
    betas: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid").field("grid", &self.grid).finish()
    }
}

impl SpectralGrid {
    pub fn new(grid: Grid1D) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dbeta = 2.0 * PI / grid.period();
        let betas = (0..n)
            .map(|k| {
                let kk = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
                kk * dbeta
            })
            .collect();
        Self { grid, betas, forward, inverse }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Wavenumbers in FFT order; for even `n` the Nyquist entry is `-π/dx`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    fn is_nyquist(&self, k: usize) -> bool {
        self.grid.n() % 2 == 0 && k == self.grid.n() / 2
    }

    /// Raw DFT coefficients `G_k = Σ_j g_j e^{-2πijk/n}`.
    pub fn forward(&self, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`forward`](Self::forward), including the `1/n` factor.
    pub fn inverse(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.grid.n() as f64;
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    /// Applies the Fourier multiplier `m(β)` to grid samples.
    pub fn apply_multiplier(&self, values: &[C64], m: impl Fn(f64) -> C64) -> Vec<C64> {
        let mut coeffs = self.forward(values);
        for (c, &b) in coeffs.iter_mut().zip(&self.betas) {
            *c *= m(b);
        }
        self.inverse(&coeffs)
    }

    /// First derivative at grid index `j`, from DFT coefficients (Nyquist mode dropped).
    pub fn derivative_at(&self, coeffs: &[C64], j: usize) -> C64 {
        let n = self.grid.n();
        let mut acc = C64::new(0.0, 0.0);
        for (k, (&c, &b)) in coeffs.iter().zip(&self.betas).enumerate() {
            if self.is_nyquist(k) {
                continue;
            }
            let phase = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
            acc += c * C64::new(0.0, b) * C64::from_polar(1.0, phase);
        }
        acc / n as f64
    }

    /// Squared H^s norm and the squared tail part, from DFT coefficients.
    pub fn sobolev_sq(&self, coeffs: &[C64], s: f64) -> (f64, f64) {
        let n = self.grid.n() as f64;
        let cutoff = TAIL_BAND * PI / self.grid.dx();
        let mut total = 0.0;
        let mut tail = 0.0;
        for (c, &b) in coeffs.iter().zip(&self.betas) {
            let e = (1.0 + b * b).powf(s) * c.norm_sqr();
            total += e;
            if b.abs() > cutoff {
                tail += e;
            }
        }
        let scale = self.grid.dx() / n;
        (total * scale, tail * scale)
    }

    /// H^s norm of periodic samples, failing on under-resolved spectra.
    pub fn sobolev_norm(&self, values: &[C64], s: f64) -> Result<f64> {
        let coeffs = self.forward(values);
        let (total, tail) = self.sobolev_sq(&coeffs, s);
        if total > 0.0 && tail > TAIL_TOLERANCE * total {
            return Err(Error::Resolution { tail: tail / total, limit: TAIL_TOLERANCE });
        }
        Ok(total.sqrt())
    }

    /// H^s norm without the resolution check.
    pub fn sobolev_norm_unchecked(&self, values: &[C64], s: f64) -> f64 {
        let coeffs = self.forward(values);
        self.sobolev_sq(&coeffs, s).0.sqrt()
    }
}

/// Unitary angular-frequency transform of periodic grid samples.
pub fn fourier_transform(g: &GridFunction) -> Result<SpectralFunction> {
    if !g.is_finite() {
        return Err(Error::InvalidInput("non-finite samples".into()));
    }
    let sg = SpectralGrid::new(*g.grid());
    let coeffs = sg.forward(g.values());
    let dx = g.grid().dx();
    let x0 = g.grid().x_min();
    let dbeta = 2.0 * PI / g.grid().period();
    let mut pairs: Vec<(f64, C64)> = sg
        .betas()
        .iter()
        .zip(&coeffs)
        .map(|(&b, &c)| (b, c * C64::from_polar(dx / (2.0 * PI).sqrt(), -b * x0)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (freqs, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let weights = vec![dbeta; freqs.len()];
    SpectralFunction::new(freqs, weights, values)
}

/// Inverse of [`fourier_transform`]. Spectra on the grid's own wavenumber lattice are
/// inverted by FFT; any other spectrum is integrated directly with its weights.
pub fn inverse_fourier_transform(spec: &SpectralFunction, grid: &Grid1D) -> Result<GridFunction> {
    let sg = SpectralGrid::new(*grid);
    let dx = grid.dx();
    let x0 = grid.x_min();
    if spec.len() == grid.n() {
        let mut sorted: Vec<(usize, f64)> = sg.betas().iter().copied().enumerate().collect();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let on_lattice = sorted
            .iter()
            .zip(&spec.freqs)
            .all(|(&(_, b), &f)| (b - f).abs() <= 1e-9 * (1.0 + b.abs()));
        if on_lattice {
            let mut coeffs = vec![C64::new(0.0, 0.0); grid.n()];
            for (&(k, b), v) in sorted.iter().zip(&spec.values) {
                coeffs[k] = v * C64::from_polar((2.0 * PI).sqrt() / dx, b * x0);
            }
            return GridFunction::new(*grid, sg.inverse(&coeffs));
        }
    }
    let norm = 1.0 / (2.0 * PI).sqrt();
    let values = grid
        .points()
        .iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for ((&b, &w), v) in spec.freqs.iter().zip(&spec.weights).zip(&spec.values) {
                acc += v * C64::from_polar(w, b * x);
            }
            acc * norm
        })
        .collect();
    GridFunction::new(*grid, values)
}

/// `(∫(1+β²)^s |ĝ(β)|² dβ)^{1/2}` for periodic samples on the line.
pub fn sobolev_norm_line(g: &GridFunction, s: SobolevIndex) -> Result<f64> {
    SpectralGrid::new(*g.grid()).sobolev_norm(g.values(), s.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid1D) -> GridFunction {
        GridFunction::from_fn(grid, |x| C64::new((-x * x).exp(), 0.0))
    }

    #[test]
    fn zero_function_has_zero_spectrum() {
        let grid = Grid1D::new(-10.0, 10.0, 64).unwrap();
        let spec = fourier_transform(&GridFunction::zeros(grid)).unwrap();
        assert!(spec.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let grid = Grid1D::new(0.0, 63.0 * 0.1, 64).unwrap();
        let b0 = 2.0 * PI * 5.0 / grid.period();
        let g = GridFunction::from_fn(grid, |x| C64::from_polar(1.0, b0 * x));
        let spec = fourier_transform(&g).unwrap();
        let (imax, _) = spec
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((spec.freqs[imax] - b0).abs() < 1e-12);
        let rest: f64 = spec.values.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, v)| v.norm()).sum();
        assert!(rest < 1e-10);
    }

    #[test]
    fn gaussian_spectrum_matches_closed_form() {
        let grid = Grid1D::new(-20.0, 20.0, 1024).unwrap();
        let spec = fourier_transform(&gaussian(grid)).unwrap();
        // unitary transform of e^{-x²} is e^{-β²/4}/√2
        for (&b, v) in spec.freqs.iter().zip(&spec.values) {
            let exact = (-b * b / 4.0).exp() / 2f64.sqrt();
            assert!((v - C64::new(exact, 0.0)).norm() < 1e-8, "β = {b}");
        }
    }

    #[test]
    fn round_trip_recovers_samples() {
        let grid = Grid1D::new(-5.0, 7.0, 100).unwrap();
        let g = GridFunction::from_fn(grid, |x| C64::new((x * 0.7).sin(), (x * 1.3).cos() * 0.2));
        let back = inverse_fourier_transform(&fourier_transform(&g).unwrap(), &grid).unwrap();
        let err = g.sub(&back).max_abs() / g.max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn gaussian_l2_norm_is_fourth_root_of_half_pi() {
        let grid = Grid1D::new(-20.0, 20.0, 1024).unwrap();
        let n = sobolev_norm_line(&gaussian(grid), SobolevIndex::new(0.0).unwrap()).unwrap();
        assert!((n - (PI / 2.0).powf(0.25)).abs() < 1e-10);
        assert!((n - 1.11951).abs() < 1e-5);
    }

    #[test]
    fn h1_norm_matches_brute_force_quadrature() {
        let grid = Grid1D::new(-20.0, 20.0, 1024).unwrap();
        let n = sobolev_norm_line(&gaussian(grid), SobolevIndex::new(1.0).unwrap()).unwrap();
        // midpoint rule of (1+β²) e^{-β²/2}/2 over [-40, 40]
        let m = 400_000;
        let h = 80.0 / m as f64;
        let q: f64 = (0..m)
            .map(|i| {
                let b = -40.0 + (i as f64 + 0.5) * h;
                (1.0 + b * b) * (-b * b / 2.0).exp() / 2.0
            })
            .sum::<f64>()
            * h;
        assert!((n - q.sqrt()).abs() < 1e-8, "{n} vs {}", q.sqrt());
    }

    #[test]
    fn under_resolved_spectrum_is_reported() {
        let grid = Grid1D::new(-1.0, 1.0, 32).unwrap();
        let g = GridFunction::from_fn(grid, |x| C64::new(if x.abs() < 0.3 { 1.0 } else { 0.0 }, 0.0));
        assert!(matches!(
            sobolev_norm_line(&g, SobolevIndex::new(1.0).unwrap()),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn derivative_at_origin_is_spectral() {
        let half = Grid1D::half_line(20.0, 257).unwrap();
        let grid = half.symmetric_extension().unwrap();
        let sg = SpectralGrid::new(grid);
        let g = GridFunction::from_fn(grid, |x| C64::new((-(x - 0.5) * (x - 0.5)).exp(), 0.0));
        let d = sg.derivative_at(&sg.forward(g.values()), grid.index_of(0.0).unwrap());
        let exact = 2.0 * 0.5 * (-0.25f64).exp();
        assert!((d.re - exact).abs() < 1e-10 && d.im.abs() < 1e-12);
    }
}
