//! Crank–Nicolson finite differences on `[0, L]` with a ghost-point Robin/Neumann condition
//! at `x = 0` and a homogeneous Neumann condition at `x = L`.

use crate::error::{Error, Result};
use crate::line::TimeSlab;
use crate::nls::{BoundaryMode, NlsProblem};
use crate::sobolev::{Grid1D, GridFunction, C64};

/// Inner fixed-point tolerance per step.
const INNER_TOL: f64 = 1e-12;
const INNER_MAX: usize = 200;
/// Relative mass drift treated as instability.
const MASS_DRIFT_LIMIT: f64 = 1e-2;
/// Edge amplitude above which the truncation at `x = L` is flagged.
const EDGE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CnRun {
    pub slab: TimeSlab,
    /// Trapezoid-rule `‖u(t)‖²_{L²(0,L)}` per step.
    pub mass: Vec<f64>,
    /// `max_t |u(L, t)|`.
    pub edge_max: f64,
    pub truncation_warning: bool,
}

/// Solves `A x = d` for tridiagonal `A` (sub `a`, diagonal `b`, super `c`).
fn thomas(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Vec<C64> {
    let n = b.len();
    let mut cp = vec![C64::new(0.0, 0.0); n];
    let mut dp = vec![C64::new(0.0, 0.0); n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = if i < n - 1 { c[i] / m } else { C64::new(0.0, 0.0) };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

fn resample(u0: &GridFunction, grid: Grid1D) -> Vec<C64> {
    let src = u0.grid();
    if (src.dx() - grid.dx()).abs() <= 1e-12 * grid.dx() && src.n() == grid.n() {
        return u0.values().to_vec();
    }
    let v = u0.values();
    grid.points()
        .iter()
        .map(|&x| {
            let r = (x - src.x_min()) / src.dx();
            let i = r.floor() as isize;
            if i < 0 || i as usize >= src.n() - 1 {
                if i as usize == src.n() - 1 { v[src.n() - 1] } else { C64::new(0.0, 0.0) }
            } else {
                let w = r - i as f64;
                v[i as usize] * (1.0 - w) + v[i as usize + 1] * w
            }
        })
        .collect()
}

fn mass(u: &[C64], dx: f64) -> f64 {
    let n = u.len();
    let inner: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    (inner - 0.5 * (u[0].norm_sqr() + u[n - 1].norm_sqr())) * dx
}

/// Full run with mass history and truncation monitoring.
pub fn crank_nicolson_run(problem: &NlsProblem, dx: f64, dt: f64) -> Result<CnRun> {
    if !(dt > 0.0) || !(dx > 0.0) || dt > dx {
        return Err(Error::InvalidInput("need 0 < dt ≤ dx".into()));
    }
    let length = problem.u0.grid().x_max();
    let n = (length / dx).round() as usize + 1;
    let grid = Grid1D::half_line(length, n)?;
    let dx = grid.dx();
    let steps = (problem.horizon / dt).round().max(1.0) as usize;
    let dt = problem.horizon / steps as f64;
    let (k, p, r, lambda) = (problem.k, problem.p, problem.r, problem.lambda);
    let closed = matches!(problem.mode, BoundaryMode::ClosedLoop);
    let h = match &problem.mode {
        BoundaryMode::OpenLoop(h) => Some(h),
        BoundaryMode::ClosedLoop => None,
    };
    let idx2 = 1.0 / (dx * dx);
    let half = C64::new(0.0, 0.5 * dt);
    // linear Laplacian rows: sub, diag, super
    let mut lsub = vec![C64::new(idx2, 0.0); n];
    let ldiag = vec![C64::new(-2.0 * idx2, 0.0); n];
    let mut lsup = vec![C64::new(idx2, 0.0); n];
    lsup[0] = C64::new(2.0 * idx2, 0.0);
    lsub[n - 1] = C64::new(2.0 * idx2, 0.0);
    lsub[0] = C64::new(0.0, 0.0);
    lsup[n - 1] = C64::new(0.0, 0.0);

    let mut u = resample(&problem.u0, grid);
    let mut slices = vec![u.clone()];
    let m0 = mass(&u, dx);
    let mut masses = vec![m0];
    let mut edge_max = u[n - 1].norm();
    let pw = |z: C64, e: f64| if z.norm() == 0.0 { 0.0 } else { z.norm().powf(e) };
    for step in 1..=steps {
        let forcing = match h {
            Some(h) => {
                let tm = (step as f64 - 0.5) * dt;
                let hv = (h.value_at(tm - 0.5 * dt) + h.value_at(tm + 0.5 * dt)) * 0.5;
                Some(hv * (-2.0 / dx))
            }
            None => None,
        };
        let mut guess = u.clone();
        let mut converged = false;
        for _ in 0..INNER_MAX {
            let coef: Vec<f64> = (0..n)
                .map(|j| {
                    let mut c = if k != 0.0 { k * 0.5 * (pw(u[j], p) + pw(guess[j], p)) } else { 0.0 };
                    if j == 0 && closed && lambda != 0.0 {
                        c += 2.0 * lambda / dx * 0.5 * (pw(u[0], r) + pw(guess[0], r));
                    }
                    c
                })
                .collect();
            let (mut a, mut b, mut cc, mut d) = (vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]);
            for j in 0..n {
                let diag = ldiag[j] + coef[j];
                a[j] = -half * lsub[j];
                b[j] = C64::new(1.0, 0.0) - half * diag;
                cc[j] = -half * lsup[j];
                let mut rhs = u[j] + half * diag * u[j];
                if j > 0 {
                    rhs += half * lsub[j] * u[j - 1];
                }
                if j < n - 1 {
                    rhs += half * lsup[j] * u[j + 1];
                }
                d[j] = rhs;
            }
            if let Some(f) = forcing {
                d[0] += C64::new(0.0, dt) * f;
            }
            let next = thomas(&a, &b, &cc, &d);
            let scale = next.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let diff = next.iter().zip(&guess).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            guess = next;
            if !guess.iter().all(|z| z.is_finite()) {
                break;
            }
            if diff <= INNER_TOL * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Step { step });
        }
        u = guess;
        let m = mass(&u, dx);
        if h.is_none() && m0 > 0.0 && ((m - m0) / m0).abs() > MASS_DRIFT_LIMIT {
            return Err(Error::Stability { drift: ((m - m0) / m0).abs() });
        }
        masses.push(m);
        edge_max = edge_max.max(u[n - 1].norm());
        slices.push(u.clone());
    }
    let slab = TimeSlab::from_values(grid, 0.0, dt, slices);
    Ok(CnRun { slab, mass: masses, edge_max, truncation_warning: edge_max > EDGE_LIMIT })
}

/// Crank–Nicolson field on `[0, T]` with spacing `dx` (initial data resampled linearly when
/// the grids differ).
pub fn crank_nicolson_solve(problem: &NlsProblem, dx: f64, dt: f64) -> Result<TimeSlab> {
    Ok(crank_nicolson_run(problem, dx, dt)?.slab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sobolev::TimeTrace;

    fn gaussian_problem(n: usize, horizon: f64) -> NlsProblem {
        let grid = Grid1D::half_line(20.0, n).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| C64::new((-x * x).exp(), 0.0));
        NlsProblem::closed_loop(1.0, 2.0, 2.0, 0.0, 0.0, horizon, u0).unwrap()
    }

    #[test]
    fn thomas_solves_tridiagonal_system() {
        let one = C64::new(1.0, 0.0);
        let a = vec![C64::new(0.0, 0.0), one, one];
        let b = vec![C64::new(4.0, 1.0); 3];
        let c = vec![one, one, C64::new(0.0, 0.0)];
        let x = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.5)];
        let d: Vec<C64> = (0..3)
            .map(|i| b[i] * x[i] + if i > 0 { a[i] * x[i - 1] } else { C64::new(0.0, 0.0) } + if i < 2 { c[i] * x[i + 1] } else { C64::new(0.0, 0.0) })
            .collect();
        let got = thomas(&a, &b, &c, &d);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid1D::half_line(10.0, 101).unwrap();
        let h = TimeTrace::from_fn(0.0, 0.01, 10, |_| C64::new(0.0, 0.0)).unwrap();
        let pb = NlsProblem::open_loop(1.0, 2.0, 1.0, 0.1, GridFunction::zeros(grid), h).unwrap();
        let slab = crank_nicolson_solve(&pb, 0.1, 0.01).unwrap();
        assert_eq!(slab.max_abs(), 0.0);
    }

    #[test]
    fn free_gaussian_converges_at_second_order() {
        let t = 0.1;
        let err = |n: usize, dt: f64| {
            let pb = gaussian_problem(n, t);
            let dx = 20.0 / (n - 1) as f64;
            let slab = crank_nicolson_solve(&pb, dx, dt).unwrap();
            let d = C64::new(1.0, 4.0 * t);
            let last = slab.slice(slab.steps());
            last.grid()
                .points()
                .iter()
                .zip(last.values())
                .map(|(&x, v)| (v - (-x * x / d).exp() / d.sqrt()).norm())
                .fold(0.0, f64::max)
        };
        let e1 = err(201, 0.01);
        let e2 = err(401, 0.005);
        let e3 = err(801, 0.0025);
        let (o1, o2) = ((e1 / e2).log2(), (e2 / e3).log2());
        assert!(o1 >= 1.9 && o2 >= 1.9, "{e1} {e2} {e3}");
    }

    #[test]
    fn closed_loop_conserves_mass() {
        let grid = Grid1D::half_line(20.0, 401).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| C64::new((-x * x).exp(), 0.0));
        let pb = NlsProblem::closed_loop(1.0, 2.0, 2.0, 1.0, 1.0, 0.2, u0).unwrap();
        let run = crank_nicolson_run(&pb, 0.05, 0.002).unwrap();
        let m0 = run.mass[0];
        let drift = run.mass.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max);
        assert!(drift < 1e-6 * 0.2, "{drift}");
        assert!(!run.truncation_warning);
    }
}
