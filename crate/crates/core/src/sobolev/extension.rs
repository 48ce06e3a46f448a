//! Extensions of half-line and interval data to the whole line.

use super::grid::{Grid1D, GridFunction, SobolevIndex, TimeTrace, C64};
use super::spectral::SpectralGrid;
use crate::error::{Error, Result};
use crate::quadrature::{filon_cubic, smooth_step};

/// Default tolerance on `|h(0)|` when the boundary data must vanish at `t = 0`.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Reflection rule `E u(-x) = Σ_j c_j u(j x)` across a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionRule {
    /// `E u(-x) = u(x)`; bounded on `H^s` for `s < 3/2`.
    Even,
    /// Four-term rule matching derivatives of order 0..=3; bounded on `H^s` for `s < 7/2`.
    Hestenes,
}

impl ReflectionRule {
    pub fn coefficients(&self) -> &'static [f64] {
        match self {
            ReflectionRule::Even => &[1.0],
            // Σ_j c_j (-j)^m = 1 for m = 0..=3
            ReflectionRule::Hestenes => &[10.0, -20.0, 15.0, -4.0],
        }
    }

    /// Rule used for half-line data of regularity `s`.
    pub fn for_regularity(s: SobolevIndex) -> Self {
        if s.above_three_halves() {
            ReflectionRule::Hestenes
        } else {
            ReflectionRule::Even
        }
    }
}

/// Reflected value at distance `i` steps beyond the boundary sample `at(0)`, where
/// `at(k)` returns the sample `k` steps into the domain (zero when out of range).
fn reflect(rule: ReflectionRule, i: usize, at: impl Fn(usize) -> C64) -> C64 {
    rule.coefficients()
        .iter()
        .enumerate()
        .map(|(j, &c)| at((j + 1) * i) * c)
        .sum()
}

/// Extends half-line samples on `[0, L]` to the periodic grid on `[-L, L)` without
/// checking decay at `x = L`.
pub fn extend_half_line(u0: &[C64], rule: ReflectionRule) -> Vec<C64> {
    let n = u0.len();
    let origin = n - 1;
    let mut out = vec![C64::new(0.0, 0.0); 2 * (n - 1)];
    out[origin..].copy_from_slice(&u0[..n - 1]);
    let at = |k: usize| if k < n { u0[k] } else { C64::new(0.0, 0.0) };
    for i in 1..=origin {
        out[origin - i] = reflect(rule, i, at);
    }
    out
}

fn check_decay(u0: &GridFunction) -> Result<()> {
    let v = u0.values();
    let scale = u0.max_abs().max(1.0);
    let edge = v.iter().rev().take(4).map(|z| z.norm()).fold(0.0, f64::max);
    if edge > 1e-8 * scale {
        return Err(Error::Truncation { value: edge });
    }
    Ok(())
}

/// Extension of half-line data `u0` on `[0, L]` to `[-L, L)`: even reflection for
/// `s < 3/2`, the four-term Hestenes reflection above.
pub fn extend_initial_data(u0: &GridFunction, s: SobolevIndex) -> Result<GridFunction> {
    extend_initial_data_with(u0, ReflectionRule::for_regularity(s))
}

pub fn extend_initial_data_with(u0: &GridFunction, rule: ReflectionRule) -> Result<GridFunction> {
    if u0.grid().x_min() != 0.0 {
        return Err(Error::InvalidInput("initial data must live on [0, L]".into()));
    }
    check_decay(u0)?;
    let grid = u0.grid().symmetric_extension()?;
    GridFunction::new(grid, extend_half_line(u0.values(), rule))
}

/// `H^s(ℝ₊)` norm computed as the line norm of the reflection extension.
pub fn sobolev_norm_half_line(u: &GridFunction, s: SobolevIndex) -> Result<f64> {
    let ext = extend_initial_data(u, s)?;
    SpectralGrid::new(*ext.grid()).sobolev_norm(ext.values(), s.value())
}

/// Boundary data extended to `t ≥ 0` in the form `h_e(t) = piece(t) - piece(t - shift)`,
/// with `piece` supported on `[0, shift]`. The subtracted translate makes the mean zero.
/// One-sided extensions (see [`continue_boundary_data`]) drop the translate: `h_e = piece`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedBoundaryData {
    piece: TimeTrace,
    shift_steps: usize,
    mirrored: bool,
}

impl ExtendedBoundaryData {
    pub fn piece(&self) -> &TimeTrace {
        &self.piece
    }

    pub fn dt(&self) -> f64 {
        self.piece.dt()
    }

    pub fn shift(&self) -> f64 {
        self.shift_steps as f64 * self.piece.dt()
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    /// End of the support, `2 × shift ≤ 2T + 1` (or `shift` when one-sided).
    pub fn support_end(&self) -> f64 {
        if self.mirrored {
            2.0 * self.shift()
        } else {
            self.shift()
        }
    }

    /// Right-continuous samples of `h_e` on `[0, support_end]`.
    pub fn trace(&self) -> TimeTrace {
        if !self.mirrored {
            let mut values = self.piece.values().to_vec();
            values.push(C64::new(0.0, 0.0));
            return TimeTrace::from_parts(0.0, self.piece.dt(), values);
        }
        let s = self.shift_steps;
        let p = self.piece.values();
        let zero = C64::new(0.0, 0.0);
        let values = (0..=2 * s)
            .map(|j| {
                if j < s {
                    p[j]
                } else if j < 2 * s {
                    -p[j - s]
                } else {
                    zero
                }
            })
            .collect();
        TimeTrace::from_parts(0.0, self.piece.dt(), values)
    }

    /// `∫ h_e`, exactly zero up to rounding when mirrored.
    pub fn integral(&self) -> C64 {
        if self.mirrored {
            self.piece.integral() - self.piece.integral()
        } else {
            self.piece.integral()
        }
    }

    pub fn l1_norm(&self) -> f64 {
        if self.mirrored {
            2.0 * self.piece.l1_norm()
        } else {
            self.piece.l1_norm()
        }
    }

    /// `∫ h_e(τ) e^{iωτ} dτ` for the piecewise-cubic interpolant of the piece.
    pub fn laplace_imaginary(&self, omega: f64) -> C64 {
        let piece = filon_cubic(self.piece.values(), 0.0, self.piece.dt(), omega);
        if self.mirrored {
            (C64::new(1.0, 0.0) - C64::from_polar(1.0, omega * self.shift())) * piece
        } else {
            piece
        }
    }

    /// `𝓗(t) = ∫_{-∞}^t h_e`, supported in `[0, 2 shift]` when mirrored.
    pub fn antiderivative(&self) -> TimeTrace {
        if !self.mirrored {
            let cum = cumulative_trapezoid(self.piece.values(), self.piece.dt());
            return TimeTrace::from_parts(0.0, self.piece.dt(), cum);
        }
        let s = self.shift_steps;
        let cum = cumulative_trapezoid(self.piece.values(), self.piece.dt());
        let at = |j: isize| -> C64 {
            if j < 0 {
                C64::new(0.0, 0.0)
            } else {
                cum[(j as usize).min(cum.len() - 1)]
            }
        };
        let values = (0..=2 * s as isize).map(|j| at(j) - at(j - s as isize)).collect();
        TimeTrace::from_parts(0.0, self.piece.dt(), values)
    }
}

fn cumulative_trapezoid(v: &[C64], dt: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = C64::new(0.0, 0.0);
    out.push(acc);
    for w in v.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * dt);
        out.push(acc);
    }
    out
}

/// Zero-mean, compactly supported extension of boundary data `h` given on `[t_min, t_min+T]`
/// (time is re-based to start at 0).
///
/// For `s < 3/2` the piece is the zero extension of `h`. For `s > 3/2` it is `η·h_C`,
/// where `h_C` continues `h` past `T` by Hestenes reflection and `η` is a C⁴ cutoff that
/// falls from 1 at `T` to 0 at `T + d`, `d = min(1/2, T/4)` rounded to the time grid.
pub fn extend_boundary_data(h: &TimeTrace, s: SobolevIndex) -> Result<ExtendedBoundaryData> {
    extend_boundary_data_with_tol(h, s, COMPATIBILITY_TOL)
}

pub fn extend_boundary_data_with_tol(h: &TimeTrace, s: SobolevIndex, ctol: f64) -> Result<ExtendedBoundaryData> {
    let m = h.len() - 1;
    let dt = h.dt();
    let v = h.values();
    if !s.above_three_halves() {
        let piece = TimeTrace::from_parts(0.0, dt, v.to_vec());
        return Ok(ExtendedBoundaryData { piece, shift_steps: m, mirrored: true });
    }
    let scale = h.max_abs().max(1.0);
    if v[0].norm() > ctol * scale {
        return Err(Error::Compatibility { residual: v[0].norm(), tol: ctol });
    }
    if m < 4 {
        return Err(Error::InvalidInput("boundary data needs at least 5 samples".into()));
    }
    let piece = continued_piece(h);
    Ok(ExtendedBoundaryData { shift_steps: piece.len() - 1, piece, mirrored: true })
}

/// `η·h_C`: Hestenes continuation past `T` times a C⁴ cutoff over `d = min(1/2, T/4)`.
fn continued_piece(h: &TimeTrace) -> TimeTrace {
    let m = h.len() - 1;
    let dt = h.dt();
    let v = h.values();
    let t_len = m as f64 * dt;
    let d_steps = ((t_len / 4.0).min(0.5) / dt).round().clamp(1.0, (m / 4).max(1) as f64) as usize;
    let mut piece = Vec::with_capacity(m + d_steps + 1);
    piece.extend_from_slice(v);
    let at = |k: usize| if k <= m { v[m - k] } else { C64::new(0.0, 0.0) };
    for i in 1..=d_steps {
        let eta = 1.0 - smooth_step(i as f64 / d_steps as f64);
        piece.push(reflect(ReflectionRule::Hestenes, i, at) * eta);
    }
    TimeTrace::from_parts(0.0, dt, piece)
}

/// One-sided extension `h_e = η·h_C` for every `s`, continuous across `T`.
///
/// The solution on `[0, T]` does not depend on how `h` is continued, but a jump of `h_e`
/// at `T` (as in the zero-mean `s < 3/2` construction) pollutes the computed field at
/// `t = T` through the truncated frequency integrals. Time stepping restarts from that
/// slice, so the solver uses this form. The compatibility check of
/// [`extend_boundary_data`] still applies when `s > 3/2`.
pub fn continue_boundary_data(h: &TimeTrace, s: SobolevIndex, ctol: f64) -> Result<ExtendedBoundaryData> {
    let v = h.values();
    if s.above_three_halves() && v[0].norm() > ctol * h.max_abs().max(1.0) {
        return Err(Error::Compatibility { residual: v[0].norm(), tol: ctol });
    }
    if h.len() < 5 {
        return Err(Error::InvalidInput("boundary data needs at least 5 samples".into()));
    }
    let piece = continued_piece(h);
    Ok(ExtendedBoundaryData { shift_steps: piece.len() - 1, piece, mirrored: false })
}

/// Running integral of a sampled zero-mean trace.
pub fn antiderivative(h_e: &TimeTrace) -> Result<TimeTrace> {
    let mean = h_e.integral().norm();
    let l1 = h_e.l1_norm();
    if mean > 1e-8 * l1.max(f64::MIN_POSITIVE) && mean > 0.0 {
        return Err(Error::InvalidExtension { mean });
    }
    let cum = cumulative_trapezoid(h_e.values(), h_e.dt());
    Ok(TimeTrace::from_parts(h_e.t_min(), h_e.dt(), cum))
}

/// Compactly supported extension used for interval norms: Hestenes reflection past both
/// ends over `T/16` with a C⁴ cutoff, so each side reads only the outer quarter of the data, followed by zero padding. Returns the samples and
/// the index of `t_min`.
pub fn interval_extension(h: &TimeTrace) -> Result<(Vec<C64>, usize)> {
    let m = h.len() - 1;
    if m < 4 {
        return Err(Error::InvalidInput("interval data needs at least 5 samples".into()));
    }
    let v = h.values();
    let d = (m / 16).max(1);
    let pad = d + 2;
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![zero; m + 1 + 2 * (d + pad)];
    let start = d + pad;
    out[start..=start + m].copy_from_slice(v);
    let left = |k: usize| if k <= m { v[k] } else { zero };
    let right = |k: usize| if k <= m { v[m - k] } else { zero };
    for i in 1..=d {
        let eta = 1.0 - smooth_step(i as f64 / (d + 1) as f64);
        out[start - i] = reflect(ReflectionRule::Hestenes, i, left) * eta;
        out[start + m + i] = reflect(ReflectionRule::Hestenes, i, right) * eta;
    }
    Ok((out, start))
}

/// `H^σ(0,T)` norm of a trace, computed as the line norm of [`interval_extension`]:
/// an upper bound for the infimum over all extensions.
pub fn sobolev_norm_interval(h: &TimeTrace, sigma: f64) -> Result<f64> {
    let (ext, _) = interval_extension(h)?;
    let grid = Grid1D::new(0.0, (ext.len() - 1) as f64 * h.dt(), ext.len())?;
    SpectralGrid::new(grid).sobolev_norm(&ext, sigma)
}

/// [`sobolev_norm_interval`] without the resolution check.
pub fn sobolev_norm_interval_unchecked(h: &TimeTrace, sigma: f64) -> Result<f64> {
    let (ext, _) = interval_extension(h)?;
    let grid = Grid1D::new(0.0, (ext.len() - 1) as f64 * h.dt(), ext.len())?;
    Ok(SpectralGrid::new(grid).sobolev_norm_unchecked(&ext, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn zero_boundary_data_extends_to_zero() {
        let h = TimeTrace::from_fn(0.0, 0.01, 100, |_| c(0.0)).unwrap();
        for s in [1.0, 2.5] {
            let e = extend_boundary_data(&h, SobolevIndex::new(s).unwrap()).unwrap();
            assert!(e.trace().max_abs() == 0.0);
            assert!(e.antiderivative().max_abs() == 0.0);
        }
    }

    #[test]
    fn low_regularity_extension_subtracts_translate() {
        let h = TimeTrace::from_fn(0.0, 0.01, 100, |_| c(1.0)).unwrap();
        let e = extend_boundary_data(&h, SobolevIndex::new(1.0).unwrap()).unwrap();
        let tr = e.trace();
        assert!((tr.t_max() - 2.0).abs() < 1e-12);
        for j in 0..tr.len() {
            let t = tr.t(j);
            let expect = if t < 1.0 - 1e-9 { 1.0 } else if t < 2.0 - 1e-9 { -1.0 } else { 0.0 };
            assert_eq!(tr.values()[j], c(expect), "t = {t}");
        }
        assert!(e.integral().norm() <= 1e-10 * e.l1_norm());
    }

    #[test]
    fn high_regularity_extension_restricts_and_stays_in_support() {
        let tmax = 1.0;
        let h = TimeTrace::from_fn(0.0, 1e-3, 1000, |t| c((3.0 * t).sin() * t)).unwrap();
        let e = extend_boundary_data(&h, SobolevIndex::new(2.5).unwrap()).unwrap();
        let tr = e.trace();
        for j in 0..=1000 {
            assert_eq!(tr.values()[j], h.values()[j]);
        }
        assert!(e.support_end() <= 2.0 * tmax + 1.0 + 1e-12);
        assert!(e.integral().norm() <= 1e-10 * e.l1_norm());
        // continuous through the cutoff: no jump larger than a few steps of slope
        let jumps = tr.values().windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
        assert!(jumps < 0.05, "{jumps}");
    }

    #[test]
    fn incompatible_data_rejected_above_three_halves() {
        let h = TimeTrace::from_fn(0.0, 0.01, 100, |_| c(1.0)).unwrap();
        assert!(matches!(
            extend_boundary_data(&h, SobolevIndex::new(2.0).unwrap()),
            Err(Error::Compatibility { .. })
        ));
    }

    #[test]
    fn antiderivative_of_sine_bump() {
        let dt = 1e-3;
        let h_e = TimeTrace::from_fn(0.0, dt, 2000, |t| c(if t <= 1.0 { (2.0 * PI * t).sin() } else { 0.0 })).unwrap();
        let big_h = antiderivative(&h_e).unwrap();
        for j in 0..big_h.len() {
            let t = big_h.t(j);
            let exact = if t <= 1.0 { (1.0 - (2.0 * PI * t).cos()) / (2.0 * PI) } else { 0.0 };
            assert!((big_h.values()[j].re - exact).abs() < 1e-5);
        }
        // derivative recovers h_e to O(dt²)
        let v = big_h.values();
        let err = (1..v.len() - 1)
            .map(|j| ((v[j + 1] - v[j - 1]) / (2.0 * dt) - h_e.values()[j]).norm())
            .fold(0.0, f64::max);
        assert!(err < 2.0 * dt, "{err}");
    }

    #[test]
    fn antiderivative_rejects_nonzero_mean() {
        let h = TimeTrace::from_fn(0.0, 0.01, 100, |_| c(1.0)).unwrap();
        assert!(matches!(antiderivative(&h), Err(Error::InvalidExtension { .. })));
    }

    #[test]
    fn even_reflection_reproduces_even_function() {
        let grid = Grid1D::half_line(10.0, 201).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| c((-x * x).exp() * (2.0 * x).cos()));
        let ext = extend_initial_data_with(&u0, ReflectionRule::Even).unwrap();
        for (i, &x) in ext.grid().points().iter().enumerate() {
            let exact = (-x * x).exp() * (2.0 * x).cos();
            assert!((ext.values()[i].re - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn hestenes_extension_is_c3_across_origin() {
        let grid = Grid1D::half_line(10.0, 10001).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| c((-(x - 0.3) * (x - 0.3)).exp()));
        let ext = extend_initial_data_with(&u0, ReflectionRule::Hestenes).unwrap();
        let dx = grid.dx();
        let o = ext.grid().index_of(0.0).unwrap();
        let v: Vec<f64> = ext.values().iter().map(|z| z.re).collect();
        // one-sided differences of orders 0..=3 from either side of the origin
        let fwd = |k: usize, sgn: isize| -> f64 {
            let at = |m: isize| v[(o as isize + sgn * m) as usize];
            let d = match k {
                0 => at(0),
                1 => (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * dx),
                2 => (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (dx * dx),
                _ => (-5.0 * at(0) + 18.0 * at(1) - 24.0 * at(2) + 14.0 * at(3) - 3.0 * at(4)) / (2.0 * dx.powi(3)),
            };
            d * (sgn as f64).powi(k as i32)
        };
        for k in 0..=3 {
            let jump = (fwd(k, 1) - fwd(k, -1)).abs();
            assert!(jump < [1e-12, 1e-5, 1e-2, 2e-1][k], "order {k}: {jump}");
        }
    }

    #[test]
    fn zero_initial_data_extends_to_zero() {
        let grid = Grid1D::half_line(10.0, 101).unwrap();
        let ext = extend_initial_data(&GridFunction::zeros(grid), SobolevIndex::new(2.0).unwrap()).unwrap();
        assert!(ext.max_abs() == 0.0);
    }

    #[test]
    fn slow_decay_is_a_truncation_error() {
        let grid = Grid1D::half_line(3.0, 101).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| c((-x).exp()));
        assert!(matches!(
            extend_initial_data(&u0, SobolevIndex::new(1.0).unwrap()),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn interval_norm_of_interior_bump_is_its_l2_norm() {
        let dt = 1e-3;
        let bump = |t: f64| if t > 0.25 && t < 0.75 { ((t - 0.25) * (0.75 - t)).powi(4) * 4096.0 } else { 0.0 };
        let h = TimeTrace::from_fn(0.0, dt, 1000, |t| c(bump(t))).unwrap();
        let n0 = sobolev_norm_interval(&h, 0.0).unwrap();
        // ∫ (4096 ((t-a)(b-t))^4)^2 over the bump, by fine midpoint rule
        let m = 200_000;
        let hh = 0.5 / m as f64;
        let exact: f64 = (0..m).map(|i| bump(0.25 + (i as f64 + 0.5) * hh).powi(2)).sum::<f64>() * hh;
        assert!((n0 - exact.sqrt()).abs() < 1e-6, "{n0} vs {}", exact.sqrt());
        assert_eq!(sobolev_norm_interval(&TimeTrace::from_fn(0.0, dt, 100, |_| c(0.0)).unwrap(), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn interval_norm_is_monotone_in_order() {
        let h = TimeTrace::from_fn(0.0, 2e-3, 500, |t| c(1.0 + t * t - 0.3 * t.powi(3))).unwrap();
        let mut prev = 0.0;
        for sigma in [0.0, 0.25, 0.5, 0.75, 1.25] {
            let n = sobolev_norm_interval(&h, sigma).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }
}
