//! Ratio statistics for the linear, trace, nonlinear and interpolation inequalities over
//! parameterized test families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary::{BoundaryPart, BoundaryPropagator};
use crate::error::Result;
use crate::line::TimeSlab;
use crate::nls::{hs_history, power_map};
use crate::sobolev::{
    extend_boundary_data_with_tol, sobolev_norm_interval_unchecked, Grid1D, GridFunction, SobolevIndex, SpectralGrid,
    TimeTrace, C64,
};

/// Relative change of the maximal ratio under resolution doubling that still counts as bounded.
pub const STABILITY_LIMIT: f64 = 0.10;

/// Fewest time samples per horizon; short horizons would otherwise under-resolve the
/// fractional time-trace norms.
const MIN_STEPS: usize = 128;

/// Shape on the unit interval; a member at horizon `T` is `h(t) = shape(t / T)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `(4τ(1-τ))^a`.
    Bump { a: i32 },
    /// `Σ c_k sin(kπτ)`.
    Random { coeffs: Vec<C64> },
    /// `(τ/w)² e^{2 - τ/w} / 4`, peaked at `τ = 2w`.
    Concentrated { width: f64 },
}

impl Shape {
    pub fn eval(&self, tau: f64) -> C64 {
        match self {
            Shape::Bump { a } => C64::new((4.0 * tau * (1.0 - tau)).max(0.0).powi(*a), 0.0),
            Shape::Random { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * tau).sin())
                .sum(),
            Shape::Concentrated { width } => {
                let u = tau / width;
                C64::new(u * u * (2.0 - u).exp() / 4.0, 0.0)
            }
        }
    }

    /// Samples `shape(t/T)` on `[0, T]` with `steps` intervals.
    pub fn trace(&self, horizon: f64, steps: usize) -> TimeTrace {
        let dt = horizon / steps as f64;
        TimeTrace::from_fn(0.0, dt, steps, |t| self.eval((t / horizon).min(1.0)))
            .expect("shape samples are finite")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub label: String,
    pub shape: Shape,
}

/// Smooth bumps `a ∈ {2,3,4}`, `random` band-limited sine series drawn from `seed`, and
/// two boundary-concentrated bumps.
pub fn standard_family(seed: u64, random: usize) -> Vec<FamilyMember> {
    let mut out: Vec<FamilyMember> =
        [2, 3, 4].iter().map(|&a| FamilyMember { label: format!("bump{a}"), shape: Shape::Bump { a } }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..random {
        let coeffs = (0..6)
            .map(|k| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (1.0 + k as f64))
            .collect();
        out.push(FamilyMember { label: format!("random{i}"), shape: Shape::Random { coeffs } });
    }
    for w in [0.05, 0.1] {
        out.push(FamilyMember { label: format!("edge{w}"), shape: Shape::Concentrated { width: w } });
    }
    out
}

/// Spatial and temporal resolution of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub length: f64,
    pub n: usize,
    pub dt: f64,
}

impl Resolution {
    pub fn doubled(&self) -> Self {
        Self { length: self.length, n: 2 * self.n - 1, dt: self.dt / 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub member: String,
    pub horizon: f64,
    pub ratio: f64,
    pub refined_ratio: f64,
    /// Location of the supremum in `x` where meaningful, else NaN.
    pub arg_x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub name: String,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub refined_max_ratio: f64,
    /// `|refined_max / max - 1|`.
    pub stability: f64,
    /// Log-log slope against `T` (of the max ratio per `T`, or the mean member slope for
    /// interpolation); NaN when only one horizon is swept.
    pub slope: f64,
}

impl RatioReport {
    pub fn bounded(&self) -> bool {
        self.stability <= STABILITY_LIMIT && self.max_ratio.is_finite()
    }

    fn from_rows(name: &str, rows: Vec<RatioRow>, slope: f64) -> Self {
        let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let max_ratio = ratios.last().copied().unwrap_or(f64::NAN);
        let median_ratio = if ratios.is_empty() { f64::NAN } else { ratios[ratios.len() / 2] };
        let refined_max_ratio = rows.iter().map(|r| r.refined_ratio).fold(f64::NEG_INFINITY, f64::max);
        Self {
            name: name.to_string(),
            stability: (refined_max_ratio / max_ratio - 1.0).abs(),
            rows,
            max_ratio,
            median_ratio,
            refined_max_ratio,
            slope,
        }
    }

    /// CSV body with columns `member,T,ratio,refined_ratio,arg_x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("member,T,ratio,refined_ratio,arg_x\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:.12e},{:.12e},{}\n", r.member, r.horizon, r.ratio, r.refined_ratio, r.arg_x));
        }
        out
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn boundary_field(h: &TimeTrace, s: SobolevIndex, res: &Resolution, part: BoundaryPart) -> Result<TimeSlab> {
    let grid = Grid1D::half_line(res.length, res.n)?;
    let h_e = extend_boundary_data_with_tol(h, s, 1e-8)?;
    let prop = BoundaryPropagator::new(grid, h.dt(), h.len() - 1, h_e.support_end())?;
    prop.propagate_part(&h_e, part)
}

/// `(sup_x ‖u(x,·)‖_{H^σ(0,T)}, argmax x)`.
fn sup_time_trace(u: &TimeSlab, sigma: f64) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::NAN);
    for i in 0..u.grid().n() {
        let v = sobolev_norm_interval_unchecked(&u.trace_at(i), sigma)?;
        if v > best.0 {
            best = (v, u.grid().x(i));
        }
    }
    Ok(best)
}

fn steps_for(horizon: f64, dt: f64) -> usize {
    ((horizon / dt).round() as usize).max(MIN_STEPS)
}

fn linear_ratio(member: &FamilyMember, s: SobolevIndex, horizon: f64, res: &Resolution) -> Result<(f64, f64)> {
    let h = member.shape.trace(horizon, steps_for(horizon, res.dt));
    let u = boundary_field(&h, s, res, BoundaryPart::Both)?;
    let space = hs_history(&u, s)?.into_iter().fold(0.0, f64::max);
    let (time, x) = sup_time_trace(&u, s.time_trace_order())?;
    let den = (1.0 + horizon) * sobolev_norm_interval_unchecked(&h, s.boundary_order())?;
    Ok(((space + time) / den, x))
}

fn trace_ratio(member: &FamilyMember, s: SobolevIndex, horizon: f64, res: &Resolution) -> Result<(f64, f64)> {
    let h = member.shape.trace(horizon, steps_for(horizon, res.dt));
    let u = boundary_field(&h, s, res, BoundaryPart::Second)?;
    let (time, x) = sup_time_trace(&u, s.time_trace_order())?;
    let den = (1.0 + horizon) * sobolev_norm_interval_unchecked(&h, s.boundary_order())?;
    Ok((time / den, x))
}

type RatioFn = fn(&FamilyMember, SobolevIndex, f64, &Resolution) -> Result<(f64, f64)>;

fn sweep(
    name: &str,
    f: RatioFn,
    s: SobolevIndex,
    t_list: &[f64],
    family: &[FamilyMember],
    res: &Resolution,
) -> Result<RatioReport> {
    let fine = res.doubled();
    let jobs: Vec<(usize, f64)> = family.iter().enumerate().flat_map(|(i, _)| t_list.iter().map(move |&t| (i, t))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, t)| {
            let m = &family[i];
            let (ratio, arg_x) = f(m, s, t, res)?;
            let (refined_ratio, _) = f(m, s, t, &fine)?;
            Ok(RatioRow { member: m.label.clone(), horizon: t, ratio, refined_ratio, arg_x })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_t: Vec<f64> = t_list
        .iter()
        .map(|&t| rows.iter().filter(|r| r.horizon == t).map(|r| r.ratio).fold(0.0, f64::max))
        .collect();
    Ok(RatioReport::from_rows(name, rows, log_log_slope(t_list, &per_t)))
}

/// `(sup_t ‖W_b h_e‖_{H^s} + sup_x ‖W_b h_e(x,·)‖_{H^{(2s+1)/4}}) / ((1+T)‖h‖_{H^{(2s-1)/4}(0,T)})`.
pub fn verify_linear_bound(s: SobolevIndex, t_list: &[f64], family: &[FamilyMember], res: &Resolution) -> Result<RatioReport> {
    sweep("linear_bound", linear_ratio, s, t_list, family, res)
}

/// `sup_x ‖W_{b,2} h_e(x,·)‖_{H^{(2s+1)/4}(0,T)} / ((1+T)‖h‖_{H^{(2s-1)/4}(0,T)})`.
pub fn verify_time_trace_bound(
    s: SobolevIndex,
    t_list: &[f64],
    family: &[FamilyMember],
    res: &Resolution,
) -> Result<RatioReport> {
    sweep("time_trace_bound", trace_ratio, s, t_list, family, res)
}

/// Random band-limited function on the line: modulated Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    terms: Vec<(C64, f64, f64, f64)>,
}

impl WavePacket {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let terms = (0..4)
            .map(|_| {
                let amp = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                (amp, rng.gen_range(-3.0..3.0), rng.gen_range(0.6..1.5), rng.gen_range(-3.0..3.0))
            })
            .collect();
        Self { terms }
    }

    pub fn sample(&self, grid: Grid1D, scale: f64) -> GridFunction {
        GridFunction::from_fn(grid, |x| {
            self.terms
                .iter()
                .map(|&(a, c, w, xi)| a * C64::from_polar((-(x - c) * (x - c) / (w * w)).exp(), xi * x))
                .sum::<C64>()
                * scale
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityReport {
    /// `‖f(u)‖_{H^s} / ‖u‖_{H^s}^{p+1}`.
    pub single: RatioReport,
    /// `‖f(u) - f(v)‖_{H^s} / ((‖u‖^p + ‖v‖^p)‖u - v‖)`.
    pub difference: RatioReport,
    /// Relative change of the max difference ratio when all amplitudes double.
    pub homogeneity_drift: f64,
}

fn nonlinear_ratios(u: &WavePacket, v: &WavePacket, s: f64, p: f64, grid: Grid1D, scale: f64) -> (f64, f64) {
    let spec = SpectralGrid::new(grid);
    let norm = |g: &[C64]| spec.sobolev_norm_unchecked(g, s);
    let f = |g: &GridFunction| -> Vec<C64> { g.values().iter().map(|&z| power_map(z, p, 1.0)).collect() };
    let (uu, vv) = (u.sample(grid, scale), v.sample(grid, scale));
    let (fu, fv) = (f(&uu), f(&vv));
    let (nu, nv) = (norm(uu.values()), norm(vv.values()));
    let single = norm(&fu) / nu.powf(p + 1.0);
    let dfv: Vec<C64> = fu.iter().zip(&fv).map(|(a, b)| a - b).collect();
    let duv = uu.sub(&vv);
    let difference = norm(&dfv) / ((nu.powf(p) + nv.powf(p)) * norm(duv.values()));
    (single, difference)
}

/// Random pairs of wave packets on `[-L, L)` with `n` points (doubled for the refined pass).
pub fn verify_nonlinearity_bound(s: f64, p: f64, pairs: usize, seed: u64, res: &Resolution) -> Result<NonlinearityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let packets: Vec<(WavePacket, WavePacket)> =
        (0..pairs).map(|_| (WavePacket::random(&mut rng), WavePacket::random(&mut rng))).collect();
    let grid = Grid1D::new(-res.length, res.length, res.n)?;
    let fine = Grid1D::new(-res.length, res.length, 2 * res.n - 1)?;
    let eval = |grid: Grid1D, scale: f64| -> Vec<(f64, f64)> {
        packets.par_iter().map(|(u, v)| nonlinear_ratios(u, v, s, p, grid, scale)).collect()
    };
    let base = eval(grid, 1.0);
    let refined = eval(fine, 1.0);
    let doubled = eval(grid, 2.0);
    let rows = |pick: fn(&(f64, f64)) -> f64| -> Vec<RatioRow> {
        base.iter()
            .zip(&refined)
            .enumerate()
            .map(|(i, (b, r))| RatioRow {
                member: format!("pair{i}"),
                horizon: f64::NAN,
                ratio: pick(b),
                refined_ratio: pick(r),
                arg_x: f64::NAN,
            })
            .collect()
    };
    let single = RatioReport::from_rows("nonlinearity_single", rows(|r| r.0), f64::NAN);
    let difference = RatioReport::from_rows("nonlinearity_difference", rows(|r| r.1), f64::NAN);
    let doubled_max = doubled.iter().map(|r| r.1).fold(0.0, f64::max);
    let homogeneity_drift = (doubled_max / difference.max_ratio - 1.0).abs();
    Ok(NonlinearityReport { single, difference, homogeneity_drift })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationReport {
    pub report: RatioReport,
    /// `ε / (1 + σ + ε)`.
    pub predicted_slope: f64,
    /// Members and horizons `T ≤ 1` where `ratio > T^θ (1 + 1e-9)`.
    pub bound_violations: usize,
}

impl InterpolationReport {
    pub fn slope_error(&self) -> f64 {
        (self.report.slope - self.predicted_slope).abs() / self.predicted_slope
    }
}

/// `‖h_T‖_{H^σ(0,T)} / ‖h_T‖_{H^{σ+ε}(0,T)}` for `h_T(t) = h(t/T)`, sampled with `samples`
/// intervals per horizon (doubled for the refined pass).
pub fn verify_interpolation(
    sigma: f64,
    eps: f64,
    t_list: &[f64],
    family: &[FamilyMember],
    samples: usize,
) -> Result<InterpolationReport> {
    let ratio = |m: &FamilyMember, t: f64, steps: usize| -> Result<f64> {
        let h = m.shape.trace(t, steps);
        Ok(sobolev_norm_interval_unchecked(&h, sigma)? / sobolev_norm_interval_unchecked(&h, sigma + eps)?)
    };
    let jobs: Vec<(usize, f64)> = family.iter().enumerate().flat_map(|(i, _)| t_list.iter().map(move |&t| (i, t))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, t)| {
            let m = &family[i];
            Ok(RatioRow {
                member: m.label.clone(),
                horizon: t,
                ratio: ratio(m, t, samples)?,
                refined_ratio: ratio(m, t, 2 * samples)?,
                arg_x: f64::NAN,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slopes: Vec<f64> = family
        .iter()
        .map(|m| {
            let ys: Vec<f64> = rows.iter().filter(|r| r.member == m.label).map(|r| r.ratio).collect();
            log_log_slope(t_list, &ys)
        })
        .collect();
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let theta = eps / (1.0 + sigma + eps);
    let bound_violations = rows
        .iter()
        .filter(|r| r.horizon <= 1.0 && r.ratio > r.horizon.powf(theta) * (1.0 + 1e-9))
        .count();
    Ok(InterpolationReport {
        report: RatioReport::from_rows("interpolation", rows, slope),
        predicted_slope: theta,
        bound_violations,
    })
}

/// `ε` used in the `T`-power diagnostics: `1/2` when `(2s-1)/4 < 1/2`, else `0.05`.
pub fn epsilon_for(s: SobolevIndex) -> f64 {
    if s.boundary_order() < 0.5 {
        0.5
    } else {
        0.05
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_deterministic() {
        assert_eq!(standard_family(7, 3), standard_family(7, 3));
        assert_ne!(standard_family(7, 3), standard_family(8, 3));
        for m in standard_family(1, 2) {
            assert!(m.shape.eval(0.0).norm() < 1e-12, "{}", m.label);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.5, 1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.7)).collect();
        assert!((log_log_slope(&x, &y) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn epsilon_rule() {
        assert_eq!(epsilon_for(SobolevIndex::new(1.0).unwrap()), 0.5);
        assert_eq!(epsilon_for(SobolevIndex::new(2.0).unwrap()), 0.05);
    }

    #[test]
    fn nonlinearity_ratios_are_homogeneous() {
        let res = Resolution { length: 12.0, n: 256, dt: 0.0 };
        let rep = verify_nonlinearity_bound(1.0, 2.0, 6, 3, &res).unwrap();
        assert!(rep.homogeneity_drift < 1e-10);
        assert!(rep.single.bounded() && rep.difference.bounded());
    }

    #[test]
    fn interpolation_ratio_is_scale_invariant() {
        let fam = standard_family(2, 1);
        let a = verify_interpolation(0.25, 0.5, &[0.5, 1.0], &fam, 256).unwrap();
        let scaled: Vec<FamilyMember> = fam
            .iter()
            .map(|m| FamilyMember {
                label: m.label.clone(),
                shape: match &m.shape {
                    Shape::Random { coeffs } => Shape::Random { coeffs: coeffs.iter().map(|c| c * 3.0).collect() },
                    other => other.clone(),
                },
            })
            .collect();
        let b = verify_interpolation(0.25, 0.5, &[0.5, 1.0], &scaled, 256).unwrap();
        for (x, y) in a.report.rows.iter().zip(&b.report.rows) {
            assert!((x.ratio - y.ratio).abs() < 1e-10 * x.ratio);
        }
    }
}
