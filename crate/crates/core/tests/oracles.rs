//! Closed-form oracles and frozen reference values for the public API.

use halfline_nls::boundary::{boundary_propagate, kernel_kt};
use halfline_nls::fd_oracle::crank_nicolson_run;
use halfline_nls::line::{free_evolution, neumann_trace_free};
use halfline_nls::nls::*;
use halfline_nls::quadrature::filon_cubic;
use halfline_nls::sobolev::*;

fn gaussian_on(grid: Grid1D) -> GridFunction {
    GridFunction::from_fn(grid, |x| C64::new((-x * x).exp(), 0.0))
}

fn closed_form(x: f64, t: f64) -> C64 {
    let z = C64::new(1.0, 4.0 * t);
    (-x * x / z).exp() / z.sqrt()
}

#[test]
fn gaussian_free_evolution_matches_closed_form_at_every_step() {
    let grid = Grid1D::half_line(20.0, 513).unwrap().symmetric_extension().unwrap();
    let slab = free_evolution(&gaussian_on(grid), 0.05, 6).unwrap();
    for (m, u) in slab.slices().iter().enumerate() {
        let t = slab.times()[m];
        let err = grid
            .points()
            .iter()
            .zip(u.values())
            .map(|(&x, &v)| (v - closed_form(x, t)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "t = {t}: {err:e}");
    }
}

// closed form: ‖e^{-x²}‖²_{H¹(ℝ)} = ‖g‖² + ‖g'‖² = √(π/2) + √(π/2) = √(2π)
#[test]
fn h1_norm_of_gaussian_is_frozen() {
    let grid = Grid1D::half_line(20.0, 513).unwrap().symmetric_extension().unwrap();
    let s = SobolevIndex::new(1.0).unwrap();
    let norm = sobolev_norm_line(&gaussian_on(grid), s).unwrap();
    let expected = (2.0 * std::f64::consts::PI).powf(0.25);
    assert!((norm - expected).abs() < 1e-10, "{norm} vs {expected}");
}

// the half-line norm of an even function equals the line norm of its reflection
#[test]
fn half_line_norm_of_even_data_is_the_line_norm() {
    let half = Grid1D::half_line(20.0, 513).unwrap();
    let s = SobolevIndex::new(1.0).unwrap();
    let norm = sobolev_norm_half_line(&gaussian_on(half), s).unwrap();
    assert!((norm - (2.0 * std::f64::consts::PI).powf(0.25)).abs() < 1e-10);
}

// even data has u_x(0, t) = 0 for all t
#[test]
fn free_neumann_trace_of_even_data_vanishes() {
    let half = Grid1D::half_line(20.0, 513).unwrap();
    let ext = extend_initial_data_with(&gaussian_on(half), ReflectionRule::Even).unwrap();
    let g = neumann_trace_free(&ext, 0.01, 20).unwrap();
    assert!(g.max_abs() < 1e-10, "{:e}", g.max_abs());
}

// ∂ₜK = i∫β²e^{iβ²t-βx-iyβ}dβ = i∂ₓ²K, so K solves i K_t + K_xx = 0 in (x, t)
#[test]
fn kernel_solves_the_schrodinger_equation() {
    let h = 1e-3;
    for (x, y, t) in [(1.0, 0.5, 0.3), (0.4, -1.0, 0.1), (2.0, 0.0, 1.0)] {
        let k = |x: f64, t: f64| kernel_kt(x, y, t).unwrap();
        let kt = (k(x, t + h) - k(x, t - h)) / (2.0 * h);
        let kxx = (k(x + h, t) - 2.0 * k(x, t) + k(x - h, t)) / (h * h);
        let res = (C64::new(0.0, 1.0) * kt + kxx).norm();
        assert!(res < 1e-5 * kxx.norm().max(1.0), "({x}, {y}, {t}): {res:e}");
    }
}

#[test]
fn homogeneous_neumann_solve_is_the_even_free_evolution() {
    let half = Grid1D::half_line(20.0, 257).unwrap();
    let mut pb = NlsProblem::closed_loop(1.0, 2.0, 2.0, 0.0, 0.0, 0.2, gaussian_on(half)).unwrap();
    pb.options.dt = 0.01;
    let run = continue_solution(&pb).unwrap();
    assert_eq!(run.status, ContinuationStatus::Completed);
    let last = run.fields.last().unwrap();
    let u = last.slab.slice(last.slab.steps());
    let t = last.t_end();
    let err = half
        .points()
        .iter()
        .zip(u.values())
        .map(|(&x, &v)| (v - closed_form(x, t)).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn crank_nicolson_converges_to_the_closed_form_at_second_order() {
    let error = |n: usize, dt: f64| {
        let half = Grid1D::half_line(20.0, n).unwrap();
        let pb = NlsProblem::closed_loop(1.0, 2.0, 2.0, 0.0, 0.0, 0.1, gaussian_on(half)).unwrap();
        let run = crank_nicolson_run(&pb, half.dx(), dt).unwrap();
        let u = run.slab.slice(run.slab.steps());
        half.points()
            .iter()
            .zip(u.values())
            .map(|(&x, &v)| (v - closed_form(x, 0.1)).norm())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (error(201, 0.004), error(401, 0.002));
    let order = (coarse / fine).log2();
    assert!(order > 1.8, "order {order} ({coarse:e} -> {fine:e})");
}

#[test]
fn boundary_operator_reproduces_its_neumann_data() {
    let dt = 0.005;
    let steps = 200;
    let h = TimeTrace::from_fn(0.0, dt, steps, |t| C64::new(t * t * (1.0 - t).powi(2), 0.0)).unwrap();
    let grid = Grid1D::half_line(8.0, 257).unwrap();
    let u = boundary_propagate(&h, SobolevIndex::new(2.0).unwrap(), grid, dt, steps).unwrap();
    let dx = grid.dx();
    let mut err: f64 = 0.0;
    for m in 0..=steps {
        let v = u.slice(m).values();
        let d = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * dx);
        err = err.max((d - h.values()[m]).norm());
    }
    assert!(err < 1e-5, "{err:e}");
    assert!(u.slice(0).l2_norm() < 1e-6);
}

// closed form: ∫_0^1 τ e^{iωτ} dτ = e^{iω}/(iω) + (e^{iω} - 1)/ω²
#[test]
fn filon_cubic_transform_of_a_ramp() {
    let omega = 37.0;
    let samples: Vec<C64> = (0..=10).map(|k| C64::new(k as f64 / 10.0, 0.0)).collect();
    let got = filon_cubic(&samples, 0.0, 0.1, omega);
    let e = C64::from_polar(1.0, omega);
    let expected = e / C64::new(0.0, omega) + (e - 1.0) / (omega * omega);
    assert!((got - expected).norm() < 1e-13, "{got} vs {expected}");
}

#[test]
fn open_loop_with_zero_data_matches_closed_loop_with_zero_lambda() {
    let half = Grid1D::half_line(20.0, 257).unwrap();
    let u0 = GridFunction::from_fn(half, |x| C64::new(0.5 * (-x * x).exp(), 0.0));
    let zero = TimeTrace::from_fn(0.0, 0.01, 10, |_| C64::new(0.0, 0.0)).unwrap();
    let mut open = NlsProblem::open_loop(1.0, 2.0, 1.0, 0.1, u0.clone(), zero).unwrap();
    open.options.dt = 0.01;
    let mut closed = NlsProblem::closed_loop(1.0, 2.0, 2.0, 1.0, 0.0, 0.1, u0).unwrap();
    closed.options.dt = 0.01;
    let a = picard_solve(&open, 0.1).unwrap();
    let b = picard_solve(&closed, 0.1).unwrap();
    assert!(a.slab.sub(&b.slab).max_abs() < 1e-10);
}
