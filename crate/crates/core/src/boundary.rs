//! Boundary evolution operator `W_b = W_{b,1} + W_{b,2}` built from the Laplace-transform
//! spectra of extended boundary data, and the kernel form of `W_{b,2}`.
//!
//! With `H(ω) = ∫ h_e(τ) e^{iωτ} dτ`,
//!
//! ```text
//! W_{b,1}(t)h_e(x) = (1/iπ) ∫_0^∞ e^{-iβ²t + iβx} H(β²) dβ
//! W_{b,2}(t)h_e(x) = -(1/π) ∫_0^∞ e^{ iβ²t - βx} H(-β²) dβ
//! ```
//!
//! The `β` integrals use composite Gauss–Legendre panels sized to the local phase rate.

use std::f64::consts::{FRAC_PI_4, PI};

use matrixmultiply::{zgemm, CGemmOption};

use crate::error::{Error, Result};
use crate::line::TimeSlab;
use crate::quadrature::{adaptive_gk15, gauss_legendre};
use crate::sobolev::{
    extend_boundary_data_with_tol, ExtendedBoundaryData, Grid1D, GridFunction, SobolevIndex, SpectralFunction,
    TimeTrace, C64,
};

/// Gauss–Legendre points per `β` panel.
const PANEL_POINTS: usize = 24;
/// Total phase allowed across one panel.
const PANEL_PHASE: f64 = 5.0 * PI;
/// Spectrum magnitude (relative to its maximum) below which the `β` tail is dropped.
const SPECTRUM_TAIL: f64 = 1e-8;

/// Quadrature nodes and weights on `[0, β_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMesh {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub beta_max: f64,
}

impl BetaMesh {
    /// Panels for integrands `e^{iβx ± iβ²τ}` with `x ≤ x_max` and `|τ| ≤ tau_max`,
    /// geometrically graded over three decades near `β = 0`.
    pub fn new(x_max: f64, tau_max: f64, beta_max: f64) -> Result<Self> {
        if !(beta_max > 0.0) || !(x_max >= 0.0) || !(tau_max >= 0.0) {
            return Err(Error::InvalidInput("β mesh needs β_max > 0 and non-negative ranges".into()));
        }
        let c = tau_max.max(1e-12);
        let width = |b: f64| {
            let lin = x_max + 2.0 * c * b;
            (-lin + (lin * lin + 8.0 * c * PANEL_PHASE).sqrt()) / (4.0 * c)
        };
        let first = width(0.0).min(beta_max);
        let mut edges = vec![0.0, first * 1e-3, first * 1e-2, first * 1e-1, first];
        let mut b = first;
        while b < beta_max * (1.0 - 1e-12) {
            b = (b + width(b)).min(beta_max);
            edges.push(b);
        }
        let (x, w) = gauss_legendre(PANEL_POINTS);
        let mut nodes = Vec::with_capacity(edges.len() * PANEL_POINTS);
        let mut weights = Vec::with_capacity(edges.len() * PANEL_POINTS);
        for e in edges.windows(2) {
            let (mid, half) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Ok(Self { nodes, weights, beta_max })
    }

    /// Mesh sized for fields on `grid` at times up to `t_max` from data supported in `[0, support]`
    /// and sampled with step `dt`: `β_max = min(π/dx, √(4π/dt))`.
    pub fn for_field(grid: &Grid1D, t_max: f64, support: f64, dt: f64) -> Result<Self> {
        let beta_max = (PI / grid.dx()).min((4.0 * PI / dt).sqrt());
        Self::new(grid.x_max(), support.max(t_max), beta_max)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `H(±β²)` at the mesh nodes, zeroed past the spectral tail.
fn laplace_pair(h_e: &ExtendedBoundaryData, mesh: &BetaMesh) -> (Vec<C64>, Vec<C64>) {
    let mut plus: Vec<C64> = mesh.nodes.iter().map(|&b| h_e.laplace_imaginary(b * b)).collect();
    let mut minus: Vec<C64> = mesh.nodes.iter().map(|&b| h_e.laplace_imaginary(-b * b)).collect();
    let max = plus.iter().chain(&minus).map(|z| z.norm()).fold(0.0, f64::max);
    let last = plus
        .iter()
        .zip(&minus)
        .rposition(|(a, b)| a.norm().max(b.norm()) > SPECTRUM_TAIL * max)
        .map_or(0, |i| i + 1);
    let cut = last.div_ceil(PANEL_POINTS) * PANEL_POINTS;
    for i in cut..plus.len() {
        plus[i] = C64::new(0.0, 0.0);
        minus[i] = C64::new(0.0, 0.0);
    }
    (plus, minus)
}

/// Spectra `φ̂_{h_e}` and `ψ̂_{h_e}` on the mesh nodes (`β ≥ 0`).
///
/// `φ̂` is stored in the unitary convention, `√(2π)(1/iπ)H(β²)`, so that inverting it gives
/// `φ_{h_e}`; `ψ̂ = -(1/π)H(-β²)` is the raw weight of `e^{iβ²t - βx}`.
pub fn boundary_spectra(h_e: &ExtendedBoundaryData, mesh: &BetaMesh) -> Result<(SpectralFunction, SpectralFunction)> {
    let (plus, minus) = laplace_pair(h_e, mesh);
    let root = (2.0 * PI).sqrt();
    let phi = plus.iter().map(|&v| v * C64::new(0.0, -root / PI)).collect();
    let psi = minus.iter().map(|&v| v * (-1.0 / PI)).collect();
    Ok((
        SpectralFunction::new(mesh.nodes.clone(), mesh.weights.clone(), phi)?,
        SpectralFunction::new(mesh.nodes.clone(), mesh.weights.clone(), psi)?,
    ))
}

/// `W_{b,1}(t) h_e = ∫ e^{-iβ²t + iβx} φ̂(β) dβ / √(2π)` on `grid`.
pub fn eval_wb1(phi_hat: &SpectralFunction, grid: &Grid1D, t: f64) -> Result<GridFunction> {
    let root = (2.0 * PI).sqrt();
    let values = grid
        .points()
        .iter()
        .map(|&x| {
            phi_hat
                .freqs
                .iter()
                .zip(&phi_hat.weights)
                .zip(&phi_hat.values)
                .map(|((&b, &w), &v)| v * C64::from_polar(w / root, b * x - b * b * t))
                .sum()
        })
        .collect();
    finite(GridFunction::from_parts(*grid, values))
}

/// `W_{b,2}(t) h_e = ∫ e^{iβ²t - β|x|} ψ̂(β) dβ` on `grid`.
pub fn eval_wb2(psi_hat: &SpectralFunction, grid: &Grid1D, t: f64) -> Result<GridFunction> {
    let values = grid
        .points()
        .iter()
        .map(|&x| {
            psi_hat
                .freqs
                .iter()
                .zip(&psi_hat.weights)
                .zip(&psi_hat.values)
                .map(|((&b, &w), &v)| v * C64::from_polar(w * (-b * x.abs()).exp(), b * b * t))
                .sum()
        })
        .collect();
    finite(GridFunction::from_parts(*grid, values))
}

fn finite(g: GridFunction) -> Result<GridFunction> {
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::Quadrature { estimate: f64::NAN })
    }
}

/// `K_t(x,y) = ∫_0^∞ exp(iβ²t - β|x| - iyβ) dβ`, by rotating the contour onto the ray
/// `β = r e^{±iπ/4}` where the Gaussian factor decays.
pub fn kernel_kt(x: f64, y: f64, t: f64) -> Result<C64> {
    let z = C64::new(x.abs(), y);
    if t == 0.0 {
        if x == 0.0 {
            return Err(Error::InvalidInput("K_t needs t ≠ 0 or x ≠ 0".into()));
        }
        return Ok(C64::new(1.0, 0.0) / z);
    }
    let rot = C64::from_polar(1.0, FRAC_PI_4 * t.signum());
    let a = (rot * z).re;
    let tt = t.abs();
    let r_max = (-a + (a * a + 160.0 * tt).sqrt()) / (2.0 * tt);
    let f = |r: f64| (C64::new(-r * r * tt, 0.0) - rot * z * r).exp();
    let pieces = 16;
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for k in 0..pieces {
        let (lo, hi) = (r_max * k as f64 / pieces as f64, r_max * (k + 1) as f64 / pieces as f64);
        let (v, e) = adaptive_gk15(&f, lo, hi, 1e-13, 40);
        total += v;
        err += e;
    }
    let value = rot * total;
    if !(err <= 1e-9 * value.norm().max(1.0)) {
        return Err(Error::Quadrature { estimate: err });
    }
    Ok(value)
}

/// Which pieces of `W_b` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPart {
    Both,
    First,
    Second,
}

/// Cached evaluator of `W_b` fields on a fixed half-line grid and time grid.
#[derive(Debug, Clone)]
pub struct BoundaryPropagator {
    grid: Grid1D,
    dt: f64,
    steps: usize,
    support: f64,
    mesh: BetaMesh,
    /// Row-major `n × 2Q` matrix `[w e^{iβx} | w e^{-βx}]`.
    basis: Vec<C64>,
}

impl BoundaryPropagator {
    /// `support` bounds the support of the extended data that will be propagated.
    pub fn new(grid: Grid1D, dt: f64, steps: usize, support: f64) -> Result<Self> {
        if grid.x_min() != 0.0 {
            return Err(Error::InvalidInput("boundary fields live on a half-line grid".into()));
        }
        let mesh = BetaMesh::for_field(&grid, steps as f64 * dt, support, dt)?;
        let q = mesh.len();
        let mut basis = Vec::with_capacity(grid.n() * 2 * q);
        for x in grid.points() {
            basis.extend(mesh.nodes.iter().zip(&mesh.weights).map(|(&b, &w)| C64::from_polar(w, b * x)));
            basis.extend(mesh.nodes.iter().zip(&mesh.weights).map(|(&b, &w)| C64::new(w * (-b * x).exp(), 0.0)));
        }
        Ok(Self { grid, dt, steps, support, mesh, basis })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn mesh(&self) -> &BetaMesh {
        &self.mesh
    }

    /// Field `W_b(t_m) h_e` at `t_m = m dt`, `m = 0..=steps`.
    pub fn propagate(&self, h_e: &ExtendedBoundaryData) -> Result<TimeSlab> {
        self.propagate_part(h_e, BoundaryPart::Both)
    }

    pub fn propagate_part(&self, h_e: &ExtendedBoundaryData, part: BoundaryPart) -> Result<TimeSlab> {
        if h_e.support_end() > self.support * (1.0 + 1e-12) {
            return Err(Error::InvalidInput("extended data outlives the β mesh".into()));
        }
        let q = self.mesh.len();
        let nt = self.steps + 1;
        let (mut plus, mut minus) = laplace_pair(h_e, &self.mesh);
        match part {
            BoundaryPart::Both => {}
            BoundaryPart::First => minus.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0)),
            BoundaryPart::Second => plus.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0)),
        }
        // row-major 2Q × nt coefficient matrix
        let mut coef = vec![C64::new(0.0, 0.0); 2 * q * nt];
        for (j, &b) in self.mesh.nodes.iter().enumerate() {
            let a = plus[j] * C64::new(0.0, -1.0 / PI);
            let c = minus[j] * (-1.0 / PI);
            let step = C64::from_polar(1.0, -b * b * self.dt);
            let mut ph = C64::new(1.0, 0.0);
            for m in 0..nt {
                let ph_m = if m % 64 == 0 { C64::from_polar(1.0, -b * b * self.dt * m as f64) } else { ph };
                coef[j * nt + m] = a * ph_m;
                coef[(q + j) * nt + m] = c * ph_m.conj();
                ph = ph_m * step;
            }
        }
        let n = self.grid.n();
        let mut out = vec![C64::new(0.0, 0.0); n * nt];
        // SAFETY: Complex<f64> is repr(C) with layout [re, im]; all buffers have the sizes
        // implied by the dimensions and strides below.
        unsafe {
            zgemm(
                CGemmOption::Standard,
                CGemmOption::Standard,
                n,
                2 * q,
                nt,
                [1.0, 0.0],
                self.basis.as_ptr() as *const [f64; 2],
                (2 * q) as isize,
                1,
                coef.as_ptr() as *const [f64; 2],
                nt as isize,
                1,
                [0.0, 0.0],
                out.as_mut_ptr() as *mut [f64; 2],
                1,
                n as isize,
            );
        }
        if out.iter().any(|z| !z.is_finite()) {
            return Err(Error::Quadrature { estimate: f64::NAN });
        }
        let values = out.chunks(n).map(<[C64]>::to_vec).collect();
        Ok(TimeSlab::from_values(self.grid, 0.0, self.dt, values))
    }
}

/// Full space-time field of `W_b(t) h_e` on `grid` at `t_m = m dt`, where `h_e` is the
/// extension of `h` appropriate to regularity `s`.
pub fn boundary_propagate(h: &TimeTrace, s: SobolevIndex, grid: Grid1D, dt: f64, steps: usize) -> Result<TimeSlab> {
    boundary_propagate_with_tol(h, s, grid, dt, steps, crate::sobolev::COMPATIBILITY_TOL)
}

pub fn boundary_propagate_with_tol(
    h: &TimeTrace,
    s: SobolevIndex,
    grid: Grid1D,
    dt: f64,
    steps: usize,
    ctol: f64,
) -> Result<TimeSlab> {
    let h_e = extend_boundary_data_with_tol(h, s, ctol)?;
    BoundaryPropagator::new(grid, dt, steps, h_e.support_end())?.propagate(&h_e)
}
