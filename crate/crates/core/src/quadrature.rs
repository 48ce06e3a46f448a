//! Quadrature kernels shared by the spectral and boundary operators.

use std::f64::consts::PI;

use crate::sobolev::C64;

/// Gauss–Legendre nodes and weights on `[-1, 1]` via Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss–Legendre rule over consecutive panels `[edges[i], edges[i+1]]`
/// with `points[i]` nodes on panel `i`.
pub fn composite_gauss_legendre(edges: &[f64], points: &[usize]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(edges.len(), points.len() + 1);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (win, &m) in edges.windows(2).zip(points) {
        let (a, b) = (win[0], win[1]);
        let (x, w) = gauss_legendre(m);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        nodes.extend(x.iter().map(|xi| mid + half * xi));
        weights.extend(w.iter().map(|wi| half * wi));
    }
    (nodes, weights)
}

/// Weight of an interior hat function under `∫ e^{iθu}` (scaled to unit spacing).
fn hat_weight(theta: f64) -> C64 {
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        C64::new(1.0 - t2 / 12.0 + t2 * t2 / 360.0, 0.0)
    } else {
        C64::new(2.0 * (1.0 - theta.cos()) / (theta * theta), 0.0)
    }
}

/// `∫_0^1 (1-u) e^{iθu} du`, the weight of the first half-hat.
fn half_hat_weight(theta: f64) -> C64 {
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        C64::new(0.5 - t2 / 24.0, theta / 6.0 - theta * t2 / 120.0)
    } else {
        let e = C64::from_polar(1.0, theta);
        C64::new(0.0, 1.0 / theta) + (C64::new(1.0, 0.0) - e) / (theta * theta)
    }
}

/// Filon-type transform `∫ b(τ) e^{iωτ} dτ` of the piecewise-linear interpolant of the
/// uniform samples `values` starting at `t0` with step `dt` (zero outside the samples).
pub fn filon_linear(values: &[C64], t0: f64, dt: f64, omega: f64) -> C64 {
    let m = values.len();
    if m == 0 {
        return C64::new(0.0, 0.0);
    }
    let theta = omega * dt;
    let step = C64::from_polar(1.0, theta);
    let mut phase = C64::from_polar(1.0, omega * t0);
    let mut interior = C64::new(0.0, 0.0);
    let first = values[0] * phase;
    for v in values.iter().take(m - 1).skip(1) {
        phase *= step;
        interior += v * phase;
    }
    let last_phase = C64::from_polar(1.0, omega * (t0 + (m - 1) as f64 * dt));
    let last = values[m - 1] * last_phase;
    if m == 1 {
        return C64::new(0.0, 0.0);
    }
    dt * (half_hat_weight(theta) * first + hat_weight(theta) * interior + half_hat_weight(-theta) * last)
}

/// `M_q(θ) = ∫_0^1 u^q e^{iθu} du` for `q = 0..3`.
fn moments(theta: f64) -> [C64; 4] {
    let mut out = [C64::new(0.0, 0.0); 4];
    if theta.abs() < 1.0 {
        // Σ_n (iθ)^n / (n! (n+q+1))
        let it = C64::new(0.0, theta);
        for (q, m) in out.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0);
            for n in 0..30 {
                *m += term / (n + q + 1) as f64;
                term = term * it / (n + 1) as f64;
            }
        }
    } else {
        let e = C64::from_polar(1.0, theta);
        let it = C64::new(0.0, theta);
        out[0] = (e - 1.0) / it;
        for q in 1..4 {
            out[q] = (e - out[q - 1] * q as f64) / it;
        }
    }
    out
}

/// Monomial coefficients of the Lagrange basis on four nodes.
fn lagrange_monomials(nodes: [f64; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for (k, row) in out.iter_mut().enumerate() {
        let mut poly = [1.0, 0.0, 0.0, 0.0];
        let mut denom = 1.0;
        let mut deg = 0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j == k {
                continue;
            }
            // poly *= (u - xj)
            for d in (0..=deg).rev() {
                poly[d + 1] += poly[d];
                poly[d] *= -xj;
            }
            deg += 1;
            denom *= nodes[k] - xj;
        }
        for d in 0..4 {
            row[d] = poly[d] / denom;
        }
    }
    out
}

/// Filon-type transform `∫ b(τ) e^{iωτ} dτ` of the piecewise-cubic interpolant of uniform
/// samples (four-point stencils, one-sided at the ends); fourth order on smooth data.
/// Falls back to [`filon_linear`] below four samples.
pub fn filon_cubic(values: &[C64], t0: f64, dt: f64, omega: f64) -> C64 {
    let m = values.len();
    if m < 4 {
        return filon_linear(values, t0, dt, omega);
    }
    let theta = omega * dt;
    let mom = moments(theta);
    let weights = |offsets: [f64; 4]| -> [C64; 4] {
        let c = lagrange_monomials(offsets);
        let mut w = [C64::new(0.0, 0.0); 4];
        for k in 0..4 {
            for q in 0..4 {
                w[k] += mom[q] * c[k][q];
            }
        }
        w
    };
    let first = weights([0.0, 1.0, 2.0, 3.0]);
    let inner = weights([-1.0, 0.0, 1.0, 2.0]);
    let last = weights([-2.0, -1.0, 0.0, 1.0]);
    let step = C64::from_polar(1.0, theta);
    let mut phase = C64::from_polar(1.0, omega * t0);
    let mut acc = C64::new(0.0, 0.0);
    let intervals = m - 1;
    for j in 0..intervals {
        let (w, base) = if j == 0 {
            (&first, 0)
        } else if j == intervals - 1 {
            (&last, j - 2)
        } else {
            (&inner, j - 1)
        };
        let local: C64 = (0..4).map(|k| w[k] * values[base + k]).sum();
        acc += phase * local;
        phase *= step;
    }
    acc * dt
}

/// C⁴ polynomial step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, with four vanishing derivatives at both ends.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u.powi(5) * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + 70.0 * u))))
    }
}

/// Composite Simpson weights on `m+1` uniform nodes with unit spacing; odd panel counts
/// close with the 3/8 rule, a single panel uses the trapezoid rule.
pub fn simpson_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    match m {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let simpson_end = if m % 2 == 0 { m } else { m - 3 };
            let mut j = 0;
            while j < simpson_end {
                w[j] += 1.0 / 3.0;
                w[j + 1] += 4.0 / 3.0;
                w[j + 2] += 1.0 / 3.0;
                j += 2;
            }
            if m % 2 == 1 {
                let k = m - 3;
                w[k] += 3.0 / 8.0;
                w[k + 1] += 9.0 / 8.0;
                w[k + 2] += 9.0 / 8.0;
                w[k + 3] += 3.0 / 8.0;
            }
        }
    }
    w
}

/// Adaptive Gauss–Kronrod (7/15) integration of a complex integrand on `[a, b]`.
pub fn adaptive_gk15(f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64, max_depth: usize) -> (C64, f64) {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    fn panel(f: &dyn Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = fc * WK[7];
        let mut g = fc * WG[3];
        for j in 0..7 {
            let f1 = f(c - h * XK[j]);
            let f2 = f(c + h * XK[j]);
            k += (f1 + f2) * WK[j];
            if j % 2 == 1 {
                g += (f1 + f2) * WG[j / 2];
            }
        }
        (k * h, ((k - g) * h).norm())
    }
    fn recurse(f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64, depth: usize) -> (C64, f64) {
        let (v, e) = panel(f, a, b);
        if e <= tol || depth == 0 {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = recurse(f, a, m, 0.5 * tol, depth - 1);
        let (v2, e2) = recurse(f, m, b, 0.5 * tol, depth - 1);
        (v1 + v2, e1 + e2)
    }
    recurse(f, a, b, tol, max_depth)
}
