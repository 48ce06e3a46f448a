//! TOML run configuration and flag overrides.

use std::path::{Path, PathBuf};

use halfline_nls::nls::{NlsProblem, SolverOptions};
use halfline_nls::sobolev::{Grid1D, GridFunction, TimeTrace, C64};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Schema(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemSection,
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub estimates: EstimatesSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Closed,
    Open,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub k: f64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub mode: Mode,
    pub u0: Profile,
    /// Neumann data for open-loop runs.
    pub h: Option<BoundaryProfile>,
}

/// Analytic initial data on `[0, L]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// `A e^{-((x-c)/w)²}`
    Gaussian { amplitude: f64, #[serde(default = "one")] width: f64, #[serde(default)] center: f64 },
    /// `A e^{-x/w}`
    Exp { amplitude: f64, #[serde(default = "one")] width: f64 },
    /// `A sech(x/w)`
    Sech { amplitude: f64, #[serde(default = "one")] width: f64 },
    Zero,
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Gaussian { amplitude, width, center } => amplitude * (-((x - center) / width).powi(2)).exp(),
            Profile::Exp { amplitude, width } => amplitude * (-x / width).exp(),
            Profile::Sech { amplitude, width } => amplitude / (x / width).cosh(),
            Profile::Zero => 0.0,
        }
    }

    pub fn with_amplitude(&self, a: f64) -> Self {
        match self.clone() {
            Profile::Gaussian { width, center, .. } => Profile::Gaussian { amplitude: a, width, center },
            Profile::Exp { width, .. } => Profile::Exp { amplitude: a, width },
            Profile::Sech { width, .. } => Profile::Sech { amplitude: a, width },
            Profile::Zero => Profile::Zero,
        }
    }
}

/// Analytic Neumann data on `[0, T]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundaryProfile {
    /// `A (t/T)^a (1 - t/T)^a`
    Bump { amplitude: f64, #[serde(default = "two")] power: i32 },
    /// `A sin(ωt)`
    Sine { amplitude: f64, frequency: f64 },
    Zero,
}

fn two() -> i32 {
    2
}

impl BoundaryProfile {
    pub fn eval(&self, t: f64, horizon: f64) -> f64 {
        match *self {
            BoundaryProfile::Bump { amplitude, power } => {
                let u = t / horizon;
                amplitude * (u * (1.0 - u)).max(0.0).powi(power)
            }
            BoundaryProfile::Sine { amplitude, frequency } => amplitude * (frequency * t).sin(),
            BoundaryProfile::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
    pub dt: f64,
    /// First segment length tried by the lifespan search; defaults to `T`.
    pub t0: Option<f64>,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_ctol")]
    pub ctol: f64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub seed: u64,
    /// Blow-up is declared once `‖u‖_{H^s}` exceeds this multiple of its initial value.
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
}

fn default_picard_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    50
}
fn default_ctol() -> f64 {
    1e-3
}
fn default_blowup_factor() -> f64 {
    1e6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Time-slice stride of the binary snapshot; 0 disables it.
    #[serde(default = "default_stride")]
    pub snapshot_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_stride() -> usize {
    10
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), snapshot_every: default_stride() }
    }
}

/// Grid for `blowup-scan`; empty lists fall back to the problem values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub amplitude: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatesSection {
    #[serde(rename = "T", default = "default_horizons")]
    pub horizons: Vec<f64>,
    #[serde(default = "default_random")]
    pub random_members: usize,
    #[serde(rename = "L", default = "default_lab_length")]
    pub length: f64,
    #[serde(default = "default_lab_n")]
    pub n: usize,
    #[serde(default = "default_lab_dt")]
    pub dt: f64,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Horizons of the interpolation sweep.
    #[serde(rename = "interpolation_T", default = "default_interp_horizons")]
    pub interpolation_horizons: Vec<f64>,
}

fn default_horizons() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_random() -> usize {
    3
}
fn default_lab_length() -> f64 {
    8.0
}
fn default_lab_n() -> usize {
    65
}
fn default_lab_dt() -> f64 {
    0.01
}
fn default_pairs() -> usize {
    50
}
fn default_interp_horizons() -> Vec<f64> {
    vec![0.125, 0.25, 0.5, 1.0]
}

impl Default for EstimatesSection {
    fn default() -> Self {
        Self {
            horizons: default_horizons(),
            random_members: default_random(),
            length: default_lab_length(),
            n: default_lab_n(),
            dt: default_lab_dt(),
            pairs: default_pairs(),
            interpolation_horizons: default_interp_horizons(),
        }
    }
}

/// Command-line values that replace config keys one for one.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub lambda: Option<f64>,
    pub horizon: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
            ConfigError::Schema(format!("{origin}:{line}: {msg}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) {
        let pb = &mut self.problem;
        pb.s = o.s.unwrap_or(pb.s);
        pb.p = o.p.unwrap_or(pb.p);
        pb.r = o.r.unwrap_or(pb.r);
        pb.lambda = o.lambda.unwrap_or(pb.lambda);
        pb.horizon = o.horizon.unwrap_or(pb.horizon);
        self.numerics.n = o.n.unwrap_or(self.numerics.n);
        self.numerics.dt = o.dt.unwrap_or(self.numerics.dt);
        if let Some(d) = &o.out_dir {
            self.output.dir = d.clone();
        }
    }

    /// Cross-key checks that the serde schema cannot express.
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Schema(m.to_string()));
        if self.problem.mode == Mode::Open && self.problem.h.is_none() {
            return bad("problem.mode = \"open\" requires a [problem.h] table");
        }
        if self.numerics.n < 16 {
            return bad("numerics.n must be at least 16");
        }
        if !(self.numerics.length > 0.0) || !(self.numerics.dt > 0.0) || !(self.problem.horizon > 0.0) {
            return bad("numerics.L, numerics.dt and problem.T must be positive");
        }
        Ok(())
    }

    pub fn options(&self) -> SolverOptions {
        let nm = &self.numerics;
        SolverOptions {
            dt: nm.dt,
            ctol: nm.ctol,
            strict: nm.strict,
            picard_tol: nm.picard_tol,
            max_iter: nm.max_iter,
            t0_initial: nm.t0,
            ..SolverOptions::default()
        }
    }

    pub fn grid(&self) -> halfline_nls::Result<Grid1D> {
        Grid1D::half_line(self.numerics.length, self.numerics.n)
    }

    /// Problem with `u0` drawn from `profile` (the configured one unless overridden).
    pub fn problem_with(&self, profile: &Profile, r: f64, lambda: f64) -> halfline_nls::Result<NlsProblem> {
        let pb = &self.problem;
        let u0 = GridFunction::from_fn(self.grid()?, |x| C64::new(profile.eval(x), 0.0));
        let problem = match (pb.mode, &pb.h) {
            (Mode::Open, Some(h)) => {
                let dt = self.numerics.dt;
                let steps = (pb.horizon / dt).ceil() as usize;
                let trace = TimeTrace::from_fn(0.0, pb.horizon / steps as f64, steps, |t| {
                    C64::new(h.eval(t, pb.horizon), 0.0)
                })?;
                NlsProblem::open_loop(pb.s, pb.p, pb.k, pb.horizon, u0, trace)?
            }
            _ => NlsProblem::closed_loop(pb.s, pb.p, r, pb.k, lambda, pb.horizon, u0)?,
        };
        Ok(problem.with_options(self.options()))
    }

    pub fn problem(&self) -> halfline_nls::Result<NlsProblem> {
        self.problem_with(&self.problem.u0, self.problem.r, self.problem.lambda)
    }
}
