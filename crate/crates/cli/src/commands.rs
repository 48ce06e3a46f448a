//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use halfline_nls::estimate_lab::{
    epsilon_for, standard_family, verify_interpolation, verify_linear_bound, verify_nonlinearity_bound,
    verify_time_trace_bound, RatioReport, Resolution,
};
use halfline_nls::fd_oracle::crank_nicolson_run;
use halfline_nls::line::TimeSlab;
use halfline_nls::nls::{continue_solution, field_rows, hs_history, ContinuationResult, ContinuationStatus, NlsProblem};
use halfline_nls::sobolev::SobolevIndex;
use halfline_nls::Error;
use rayon::prelude::*;

use crate::config::Config;
use crate::output::{fmt, write_csv, write_snapshot};

/// Why a run stopped; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Schema(String),
    Numerical { message: String, dump: String },
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Numerical { .. } => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn describe(cfg: &Config) -> String {
    let p = &cfg.problem;
    let n = &cfg.numerics;
    format!(
        "s={} p={} r={} k={} lambda={} T={} mode={:?} L={} n={} dt={}",
        p.s, p.p, p.r, p.k, p.lambda, p.horizon, p.mode, n.length, n.n, n.dt
    )
}

/// Parameter errors are reported as schema errors; everything else is numerical.
fn numerical(cfg: &Config, context: &str, e: Error) -> Failure {
    match e {
        Error::InvalidInput(m) => Failure::Schema(format!("invalid configuration: {m}")),
        other => Failure::Numerical {
            message: format!("{context}: {other}"),
            dump: format!("{context}\nerror: {other:?}\nparameters: {}\n", describe(cfg)),
        },
    }
}

/// Writes the dump next to the other outputs and turns it into the failure.
pub fn dump(out: &Path, f: Failure) -> Failure {
    if let Failure::Numerical { dump, .. } = &f {
        let _ = std::fs::create_dir_all(out);
        let _ = std::fs::write(out.join("failure_dump.txt"), dump);
    }
    f
}

fn manifest(cfg: &Config, out: &Path, command: &str) -> Result<(), Failure> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let body = format!("command = {command}\ncreated_unix = {stamp}\n{}\nseed = {}\n", describe(cfg), cfg.numerics.seed);
    std::fs::write(out.join("manifest.txt"), body)?;
    Ok(())
}

fn prepare(cfg: &Config, command: &str) -> Result<PathBuf, Failure> {
    let out = cfg.output.dir.clone();
    std::fs::create_dir_all(&out)?;
    manifest(cfg, &out, command)?;
    Ok(out)
}

fn sobolev(cfg: &Config) -> Result<SobolevIndex, Failure> {
    SobolevIndex::new(cfg.problem.s).map_err(|e| Failure::Schema(format!("invalid configuration: {e}")))
}

/// Rows of all segments, dropping the repeated first slice of each restart.
fn solution_rows(problem: &NlsProblem, result: &ContinuationResult) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (k, field) in result.fields.iter().enumerate() {
        for (i, (t, hs, mass, res)) in field_rows(problem, field).into_iter().enumerate() {
            if k > 0 && i == 0 {
                continue;
            }
            rows.push(vec![fmt(t), fmt(hs), fmt(mass), fmt(res)]);
        }
    }
    rows
}

const SOLUTION_HEADER: [&str; 4] = ["t", "hs_norm", "mass", "boundary_residual"];

fn write_solution(problem: &NlsProblem, result: &ContinuationResult, out: &Path, stride: usize) -> Result<(), Failure> {
    write_csv(&out.join("solution.csv"), &SOLUTION_HEADER, solution_rows(problem, result))?;
    let seg_rows = result.fields.iter().map(|f| {
        let d = &f.diagnostics;
        vec![
            fmt(f.t_start()),
            fmt(d.t0),
            d.iterations.to_string(),
            fmt(d.a),
            fmt(d.xts_norm),
            fmt(d.contraction_ratios.last().copied().unwrap_or(0.0)),
        ]
    });
    write_csv(&out.join("segments.csv"), &["t_start", "t0", "iterations", "A", "xts_norm", "last_ratio"], seg_rows)?;
    if stride > 0 {
        for (k, f) in result.fields.iter().enumerate() {
            let slab = &f.slab;
            let picked: Vec<_> = slab.slices().iter().step_by(stride).collect();
            write_snapshot(&out.join(format!("field_{k:03}.bin")), &picked, slab.t_min(), slab.dt() * stride as f64)?;
        }
    }
    Ok(())
}

fn status_name(s: ContinuationStatus) -> &'static str {
    match s {
        ContinuationStatus::Completed => "completed",
        ContinuationStatus::BlowupDetected => "blowup_detected",
        ContinuationStatus::Stalled => "stalled",
    }
}

pub fn solve(cfg: &Config) -> Result<String, Failure> {
    let out = prepare(cfg, "solve")?;
    let problem = cfg.problem().map_err(|e| dump(&out, numerical(cfg, "building the problem", e)))?;
    let result = continue_solution(&problem).map_err(|e| dump(&out, numerical(cfg, "continuation", e)))?;
    write_solution(&problem, &result, &out, cfg.output.snapshot_every)?;
    let mut report = format!(
        "status {} t_reached {} final_hs_norm {} segments {}\n",
        status_name(result.status),
        fmt(result.t_reached),
        fmt(result.final_norm),
        result.fields.len()
    );
    for w in &result.warnings {
        writeln!(report, "warning: {w}").ok();
    }
    std::fs::write(out.join("status.txt"), &report)?;
    if result.status == ContinuationStatus::Stalled {
        let mut text = format!("continuation stalled at t = {}\nparameters: {}\n", result.t_reached, describe(cfg));
        if let Some(f) = &result.failure {
            writeln!(text, "cause: {f}").ok();
        }
        for f in &result.fields {
            let d = &f.diagnostics;
            writeln!(text, "segment t_start={} t0={} iterations={} ratios={:?}", f.t_start(), d.t0, d.iterations, d.contraction_ratios)
                .ok();
        }
        let message = format!("continuation stalled at t = {}: {}", result.t_reached, result.failure.clone().unwrap_or_default());
        return Err(dump(&out, Failure::Numerical { message, dump: text }));
    }
    Ok(report)
}

fn summary_row(r: &RatioReport) -> Vec<String> {
    vec![
        r.name.clone(),
        fmt(r.max_ratio),
        fmt(r.median_ratio),
        fmt(r.refined_max_ratio),
        fmt(r.stability),
        fmt(r.slope),
        r.bounded().to_string(),
    ]
}

const SUMMARY_HEADER: [&str; 7] = ["name", "max", "median", "refined_max", "stability", "slope", "bounded"];

fn summary_text(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| format!("{} max {} stability {} slope {} bounded {}\n", r[0], r[1], r[4], r[5], r[6])).collect()
}

fn lab_resolution(cfg: &Config) -> Resolution {
    Resolution { length: cfg.estimates.length, n: cfg.estimates.n, dt: cfg.estimates.dt }
}

pub fn verify_linear(cfg: &Config) -> Result<String, Failure> {
    let out = prepare(cfg, "verify-linear")?;
    let s = sobolev(cfg)?;
    let family = standard_family(cfg.numerics.seed, cfg.estimates.random_members);
    let res = lab_resolution(cfg);
    let t_list = &cfg.estimates.horizons;
    let fail = |e| dump(&out, numerical(cfg, "linear estimate sweep", e));
    let linear = verify_linear_bound(s, t_list, &family, &res).map_err(fail)?;
    let trace = verify_time_trace_bound(s, t_list, &family, &res).map_err(fail)?;
    std::fs::write(out.join("linear_bound.csv"), linear.to_csv())?;
    std::fs::write(out.join("time_trace_bound.csv"), trace.to_csv())?;
    let rows = vec![summary_row(&linear), summary_row(&trace)];
    write_csv(&out.join("summary.csv"), &SUMMARY_HEADER, rows.clone())?;
    Ok(summary_text(&rows))
}

pub fn verify_estimates(cfg: &Config) -> Result<String, Failure> {
    let out = prepare(cfg, "verify-estimates")?;
    let s = sobolev(cfg)?;
    let family = standard_family(cfg.numerics.seed, cfg.estimates.random_members);
    let line = Resolution { length: cfg.numerics.length, n: 2 * cfg.numerics.n, dt: cfg.numerics.dt };
    let fail = |e| dump(&out, numerical(cfg, "estimate sweep", e));
    let nl = verify_nonlinearity_bound(s.value(), cfg.problem.p, cfg.estimates.pairs, cfg.numerics.seed, &line)
        .map_err(fail)?;
    let (sigma, eps) = (s.boundary_order(), epsilon_for(s));
    let interp = verify_interpolation(sigma, eps, &cfg.estimates.interpolation_horizons, &family, 512).map_err(fail)?;
    std::fs::write(out.join("nonlinearity_single.csv"), nl.single.to_csv())?;
    std::fs::write(out.join("nonlinearity_difference.csv"), nl.difference.to_csv())?;
    std::fs::write(out.join("interpolation.csv"), interp.report.to_csv())?;
    let rows = vec![summary_row(&nl.single), summary_row(&nl.difference), summary_row(&interp.report)];
    write_csv(&out.join("summary.csv"), &SUMMARY_HEADER, rows.clone())?;
    let mut text = summary_text(&rows);
    writeln!(text, "homogeneity_drift {}", fmt(nl.homogeneity_drift)).ok();
    writeln!(
        text,
        "interpolation sigma {sigma} eps {eps} slope {} predicted {} relative_error {} bound_violations {}",
        fmt(interp.report.slope),
        fmt(interp.predicted_slope),
        fmt(interp.slope_error()),
        interp.bound_violations
    )
    .ok();
    Ok(text)
}

/// One point of a blow-up scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub r: f64,
    pub lambda: f64,
    pub amplitude: f64,
    pub status: String,
    pub t_max: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Up to the detection time, the `H^s` history never decreases after it last sat below
    /// twice its initial value.
    pub monotone_escape: bool,
}

fn monotone_escape(history: &[f64], initial: f64) -> bool {
    let start = history.iter().rposition(|&v| v <= 2.0 * initial).unwrap_or(0);
    history[start..].windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9))
}

pub fn scan_point(cfg: &Config, r: f64, lambda: f64, amplitude: f64, out: &Path) -> Result<ScanRow, Failure> {
    let profile = cfg.problem.u0.with_amplitude(amplitude);
    let mut problem = cfg.problem_with(&profile, r, lambda).map_err(|e| numerical(cfg, "scan point", e))?;
    let initial = hs_history(&TimeSlab::new(0.0, 1.0, vec![problem.u0.clone()]).expect("one slice"), problem.s)
        .map_err(|e| numerical(cfg, "initial norm", e))?[0];
    problem.options.blowup_cap = Some(cfg.numerics.blowup_factor * initial);
    let row = |status: &str, t_max, final_norm, monotone| ScanRow {
        r,
        lambda,
        amplitude,
        status: status.to_string(),
        t_max,
        initial_norm: initial,
        final_norm,
        monotone_escape: monotone,
    };
    match continue_solution(&problem) {
        Ok(res) => {
            std::fs::create_dir_all(out)?;
            write_csv(&out.join("solution.csv"), &SOLUTION_HEADER, solution_rows(&problem, &res))?;
            let cap = cfg.numerics.blowup_factor * initial;
            let mut history: Vec<f64> =
                solution_rows(&problem, &res).iter().map(|r| r[1].parse().unwrap_or(f64::NAN)).collect();
            if let Some(hit) = history.iter().position(|&v| v > cap) {
                history.truncate(hit + 1);
            }
            let monotone = res.status == ContinuationStatus::BlowupDetected && monotone_escape(&history, initial);
            Ok(row(status_name(res.status), res.t_reached, res.final_norm, monotone))
        }
        Err(_) => Ok(row("error", 0.0, initial, false)),
    }
}

pub fn blowup_scan(cfg: &Config) -> Result<String, Failure> {
    let out = prepare(cfg, "blowup-scan")?;
    let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
    let amp0 = match cfg.problem.u0 {
        crate::config::Profile::Gaussian { amplitude, .. }
        | crate::config::Profile::Exp { amplitude, .. }
        | crate::config::Profile::Sech { amplitude, .. } => amplitude,
        crate::config::Profile::Zero => 0.0,
    };
    let mut points = Vec::new();
    for r in or(&cfg.sweep.r, cfg.problem.r) {
        for l in or(&cfg.sweep.lambda, cfg.problem.lambda) {
            for a in or(&cfg.sweep.amplitude, amp0) {
                points.push((r, l, a));
            }
        }
    }
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &(r, l, a))| scan_point(cfg, r, l, a, &out.join(format!("run_{i:03}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let body = rows.iter().map(|s| {
        vec![
            fmt(s.r),
            fmt(s.lambda),
            fmt(s.amplitude),
            s.status.clone(),
            fmt(s.t_max),
            fmt(s.initial_norm),
            fmt(s.final_norm),
            s.monotone_escape.to_string(),
        ]
    });
    write_csv(
        &out.join("scan.csv"),
        &["r", "lambda", "amplitude", "status", "t_max", "initial_norm", "final_norm", "monotone_escape"],
        body,
    )?;
    Ok(rows
        .iter()
        .map(|s| {
            format!(
                "r {} lambda {} amplitude {} status {} t_max {:.6} norm {:.4} -> {:.4}\n",
                s.r, s.lambda, s.amplitude, s.status, s.t_max, s.initial_norm, s.final_norm
            )
        })
        .collect())
}

pub fn compare_oracle(cfg: &Config) -> Result<String, Failure> {
    let out = prepare(cfg, "compare-oracle")?;
    let fail = |ctx: &'static str| move |e| dump(&cfg.output.dir, numerical(cfg, ctx, e));
    let problem = cfg.problem().map_err(fail("building the problem"))?;
    let spectral = continue_solution(&problem).map_err(fail("spectral solve"))?;
    if spectral.status != ContinuationStatus::Completed {
        let message = format!("spectral solve ended with status {}", status_name(spectral.status));
        let text = format!("{message}\nparameters: {}\n{:?}\n", describe(cfg), spectral.failure);
        return Err(dump(&out, Failure::Numerical { message, dump: text }));
    }
    let cn = crank_nicolson_run(&problem, problem.u0.grid().dx(), cfg.numerics.dt).map_err(fail("Crank-Nicolson solve"))?;
    let cn_dt = cn.slab.dt();
    let mut rows = Vec::new();
    let mut sup: f64 = 0.0;
    for (k, field) in spectral.fields.iter().enumerate() {
        for (m, u) in field.slab.slices().iter().enumerate() {
            if k > 0 && m == 0 {
                continue;
            }
            let t = field.slab.times()[m];
            let pos = (t / cn_dt).min(cn.slab.steps() as f64);
            let j = pos.floor() as usize;
            let theta = pos - j as f64;
            let v = if theta < 1e-9 || j >= cn.slab.steps() {
                cn.slab.slice(j.min(cn.slab.steps())).clone()
            } else {
                let a = cn.slab.slice(j).scale((1.0 - theta).into());
                a.add(&cn.slab.slice(j + 1).scale(theta.into()))
            };
            let diff = u.sub(&v).l2_norm();
            sup = sup.max(diff);
            rows.push(vec![fmt(t), fmt(diff), fmt(u.l2_norm().powi(2)), fmt(v.l2_norm().powi(2))]);
        }
    }
    write_csv(&out.join("compare.csv"), &["t", "l2_diff", "mass_spectral", "mass_cn"], rows)?;
    let mut text = format!("sup_l2_difference {}\n", fmt(sup));
    if cn.truncation_warning {
        writeln!(text, "warning: |u(L,t)| reached {} in the Crank-Nicolson run", fmt(cn.edge_max)).ok();
    }
    Ok(text)
}
