//! Experiment configuration, runners and CSV output.
//!
//! Every run is a pure function of its [`ExperimentConfig`]: rows are sorted
//! before they are written, so equal configs give byte-identical files.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bottleneck::marked_state_bound;
use crate::chain::{build_transition_matrix, exact_mixing_time, tv_distance_curve, ChainState};
use crate::error::Error;
use crate::model::{dimension, gibbs_measure, Config, MarkedStateHamiltonian};
use crate::proposal::{single_flip_kernel, uniform_kernel, ProposalKernel};
use crate::quantum::{
    resonance_field, MixerKind, MixerSpec, Propagator, PropagatorConfig, QuantumHamiltonian,
};
use crate::spectral::{
    averaged_grover_gap_closed_form, scaling_fit, spectral_gap, time_averaged_kernel,
    AveragingScheme, GapRoute, SamplingMode,
};

pub const CSV_HEADER: [&str; 10] = [
    "experiment", "N", "alpha", "beta", "h", "t", "quantity", "value", "method", "seed",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    FigureA,
    FigureB,
    Scan,
    Sample,
    Validate,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FigureA => "figure-a",
            ExperimentKind::FigureB => "figure-b",
            ExperimentKind::Scan => "scan",
            ExperimentKind::Sample => "sample",
            ExperimentKind::Validate => "validate",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "figure-a" => ExperimentKind::FigureA,
            "figure-b" => ExperimentKind::FigureB,
            "scan" => ExperimentKind::Scan,
            "sample" => ExperimentKind::Sample,
            "validate" => ExperimentKind::Validate,
            _ => return Err("expected figure-a, figure-b, scan, sample or validate".into()),
        })
    }
}

/// Proposal family. `Local` is the classical single-spin-flip proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mixer {
    Grover,
    TransverseField,
    Uniform,
    Local,
}

impl Mixer {
    pub fn as_str(self) -> &'static str {
        match self {
            Mixer::Grover => "grover",
            Mixer::TransverseField => "transverse",
            Mixer::Uniform => "uniform",
            Mixer::Local => "local",
        }
    }

    fn quantum(self) -> Option<MixerKind> {
        match self {
            Mixer::Grover => Some(MixerKind::Grover),
            Mixer::TransverseField => Some(MixerKind::TransverseField),
            _ => None,
        }
    }
}

impl FromStr for Mixer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "grover" => Mixer::Grover,
            "transverse" | "transverse-field" => Mixer::TransverseField,
            "uniform" => Mixer::Uniform,
            "local" | "single-flip" => Mixer::Local,
            _ => return Err("expected grover, transverse, uniform or local".into()),
        })
    }
}

/// A fixed value, an inclusive range `lo:hi`, or (for `h`) `resonance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSpec {
    Fixed(f64),
    Range(f64, f64),
    Resonance,
}

impl ParamSpec {
    fn parse(s: &str, allow_resonance: bool) -> Result<Self, String> {
        if s == "resonance" {
            return match allow_resonance {
                true => Ok(ParamSpec::Resonance),
                false => Err("`resonance` only applies to h".into()),
            };
        }
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| e.to_string())
                .and_then(|x| match x.is_finite() {
                    true => Ok(x),
                    false => Err("must be finite".to_string()),
                })
        };
        match s.split_once(':') {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo > hi {
                    return Err("range must have lo <= hi".into());
                }
                Ok(if lo == hi {
                    ParamSpec::Fixed(lo)
                } else {
                    ParamSpec::Range(lo, hi)
                })
            }
            None => num(s).map(ParamSpec::Fixed),
        }
    }

    fn range(self, alpha: f64, n_spins: usize) -> (f64, f64) {
        match self {
            ParamSpec::Fixed(v) => (v, v),
            ParamSpec::Range(lo, hi) => (lo, hi),
            ParamSpec::Resonance => {
                let r = resonance_field(alpha, n_spins);
                (r, r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_min: usize,
    pub n_max: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mixer: Mixer,
    pub h: ParamSpec,
    pub t: ParamSpec,
    pub avg_samples: usize,
    pub avg_mode: SamplingMode,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub max_dense_n: usize,
    /// Chain length for `sample`.
    pub steps: u64,
    pub epsilon: f64,
    /// Overrides the eigensolve tolerance of `validate`.
    pub eigen_tol: Option<f64>,
}

impl ExperimentConfig {
    /// Defaults for one experiment. The figure time window and fields are
    /// choices of this tool, not taken from any reference result.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let base = Self {
            experiment,
            n_min: 10,
            n_max: 20,
            alpha: 1.0,
            beta: 5.0,
            mixer: Mixer::Grover,
            h: ParamSpec::Fixed(1.0),
            t: ParamSpec::Fixed(1.0),
            avg_samples: 64,
            avg_mode: SamplingMode::Grid,
            seed: 0,
            out: None,
            max_dense_n: 12,
            steps: 10_000,
            epsilon: 0.01,
            eigen_tol: None,
        };
        match experiment {
            ExperimentKind::FigureA => Self {
                h: ParamSpec::Fixed(-1.0),
                t: ParamSpec::Range(2.0, 20.0),
                ..base
            },
            ExperimentKind::FigureB => Self {
                mixer: Mixer::TransverseField,
                ..base
            },
            ExperimentKind::Scan => Self {
                n_min: 4,
                n_max: 10,
                avg_samples: 8,
                ..base
            },
            ExperimentKind::Sample => Self {
                n_min: 4,
                n_max: 8,
                mixer: Mixer::Uniform,
                beta: 1.0,
                ..base
            },
            // Only `n_max` matters here, as the size budget.
            ExperimentKind::Validate => Self { n_min: 1, ..base },
        }
    }

    /// Builds a config from ordered `key=value` pairs; later pairs win. The
    /// experiment is read first so that its defaults sit underneath.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let kind = pairs
            .iter()
            .rev()
            .find(|(k, _)| normalise_key(k) == "experiment")
            .map(|(k, v)| {
                v.parse::<ExperimentKind>().map_err(|reason| ConfigError::BadValue {
                    key: k.clone(),
                    value: v.clone(),
                    reason,
                })
            })
            .transpose()?
            .ok_or_else(|| ConfigError::Invalid("no experiment given".into()))?;
        let mut cfg = Self::defaults(kind);
        // `alpha` moves the default figure-a field, which tracks -alpha.
        let explicit_h = pairs.iter().any(|(k, _)| normalise_key(k) == "h");
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        if kind == ExperimentKind::FigureA && !explicit_h {
            cfg.h = ParamSpec::Fixed(-cfg.alpha);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: String| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        let int = || value.parse::<usize>().map_err(|e| bad(e.to_string()));
        let real = || {
            value
                .parse::<f64>()
                .map_err(|e| bad(e.to_string()))
                .and_then(|x| if x.is_finite() { Ok(x) } else { Err(bad("must be finite".into())) })
        };
        match normalise_key(key).as_str() {
            "experiment" => self.experiment = value.parse().map_err(bad)?,
            "n_min" => self.n_min = int()?,
            "n_max" => self.n_max = int()?,
            "alpha" => self.alpha = real()?,
            "beta" => self.beta = real()?,
            "mixer" => self.mixer = value.parse().map_err(bad)?,
            "h" => self.h = ParamSpec::parse(value, true).map_err(bad)?,
            "t" => self.t = ParamSpec::parse(value, false).map_err(bad)?,
            "avg_samples" => self.avg_samples = int()?,
            "avg_mode" => {
                self.avg_mode = match value {
                    "grid" => SamplingMode::Grid,
                    "mc" | "monte-carlo" => SamplingMode::MonteCarlo { seed: self.seed },
                    _ => return Err(bad("expected grid or mc".into())),
                }
            }
            "seed" => {
                self.seed = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
                if let SamplingMode::MonteCarlo { .. } = self.avg_mode {
                    self.avg_mode = SamplingMode::MonteCarlo { seed: self.seed };
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "max_dense_n" => self.max_dense_n = int()?,
            "steps" => self.steps = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            "epsilon" => self.epsilon = real()?,
            "eigen_tol" => self.eigen_tol = Some(real()?).filter(|&x| x > 0.0).map(Some).ok_or_else(|| bad("must be positive".into()))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if self.n_min == 0 || self.n_min > self.n_max {
            return fail(format!("need 1 <= n-min <= n-max, got {}..{}", self.n_min, self.n_max));
        }
        if self.n_max > crate::quantum::COLUMN_MAX_SPINS {
            return fail(format!(
                "n-max {} exceeds the single-column limit {}",
                self.n_max,
                crate::quantum::COLUMN_MAX_SPINS
            ));
        }
        if !(self.alpha > 0.0) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta >= 0.0) {
            return fail(format!("beta must be nonnegative, got {}", self.beta));
        }
        if self.avg_samples == 0 {
            return fail("avg-samples must be at least 1".into());
        }
        if self.max_dense_n > crate::chain::CHAIN_MAX_SPINS {
            return fail(format!(
                "max-dense-n {} exceeds the dense chain limit {}",
                self.max_dense_n,
                crate::chain::CHAIN_MAX_SPINS
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return fail(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.experiment == ExperimentKind::Sample && self.steps == 0 {
            return fail("steps must be positive".into());
        }
        Ok(())
    }

    fn scheme(&self, n_spins: usize) -> AveragingScheme {
        AveragingScheme {
            t_range: self.t.range(self.alpha, n_spins),
            h_range: self.h.range(self.alpha, n_spins),
            sample_count: self.avg_samples,
            mode: self.avg_mode,
        }
    }
}

fn normalise_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// `key=value` lines; blank lines and `#` comments are ignored.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    DeltaExact,
    DeltaClosed,
    Bound,
    Tv,
    Tmix,
    Slope,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::DeltaExact => "delta_exact",
            Quantity::DeltaClosed => "delta_closed",
            Quantity::Bound => "bound",
            Quantity::Tv => "tv",
            Quantity::Tmix => "tmix",
            Quantity::Slope => "slope",
        }
    }
}

/// A parameter column: a value, an average over a scheme, or not applicable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Value(f64),
    Averaged,
    NotApplicable,
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Value(v) => f.write_str(&format_real(*v)),
            ParamValue::Averaged => f.write_str("avg"),
            ParamValue::NotApplicable => f.write_str("na"),
        }
    }
}

/// 17 significant digits, `.` decimal separator.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: ExperimentKind,
    pub n_spins: usize,
    pub alpha: f64,
    pub beta: f64,
    pub h: ParamValue,
    pub t: ParamValue,
    pub quantity: Quantity,
    /// `None` marks a row that was skipped; the reason is in `method`.
    pub value: Option<f64>,
    pub method: String,
    pub seed: u64,
}

impl CsvRow {
    pub fn record(&self) -> [String; 10] {
        [
            self.experiment.as_str().to_string(),
            self.n_spins.to_string(),
            format_real(self.alpha),
            format_real(self.beta),
            self.h.to_string(),
            self.t.to_string(),
            self.quantity.as_str().to_string(),
            self.value.map(format_real).unwrap_or_default(),
            self.method.clone(),
            self.seed.to_string(),
        ]
    }

    fn sort_key(&self) -> (usize, Quantity, String, String, String) {
        (
            self.n_spins,
            self.quantity,
            self.method.clone(),
            self.h.to_string(),
            self.t.to_string(),
        )
    }
}

pub fn sort_rows(rows: &mut [CsvRow]) {
    rows.sort_by_cached_key(|r| r.sort_key());
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

fn skip_reason(e: &Error) -> &'static str {
    match e {
        Error::BudgetExceeded { .. } => "skipped_budget",
        Error::NonConvergence(_) | Error::NoConvergence { .. } => "skipped_nonconvergence",
        _ => "skipped_error",
    }
}

struct RowContext<'a> {
    cfg: &'a ExperimentConfig,
    n_spins: usize,
    h: ParamValue,
    t: ParamValue,
}

impl RowContext<'_> {
    fn row(&self, quantity: Quantity, value: Result<f64, Error>, method: &str) -> CsvRow {
        let (value, method) = match value {
            Ok(v) if v.is_finite() => (Some(v), method.to_string()),
            Ok(_) => (None, "skipped_nonfinite".to_string()),
            Err(e) => (None, skip_reason(&e).to_string()),
        };
        CsvRow {
            experiment: self.cfg.experiment,
            n_spins: self.n_spins,
            alpha: self.cfg.alpha,
            beta: self.cfg.beta,
            h: self.h,
            t: self.t,
            quantity,
            value,
            method,
            seed: self.cfg.seed,
        }
    }
}

fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

fn param_column((lo, hi): (f64, f64)) -> ParamValue {
    if lo == hi {
        ParamValue::Value(lo)
    } else {
        ParamValue::Averaged
    }
}

fn classical_kernel(mixer: Mixer, n_spins: usize) -> Result<ProposalKernel, Error> {
    match mixer {
        Mixer::Uniform => uniform_kernel(n_spins),
        _ => single_flip_kernel(n_spins),
    }
}

/// Marked-state column averaged over the scheme, one evolution per sample.
fn averaged_marked_column(
    h_c: &MarkedStateHamiltonian,
    kind: MixerKind,
    scheme: &AveragingScheme,
    prop_cfg: &PropagatorConfig,
) -> Result<Vec<f64>, Error> {
    let samples = scheme.samples()?;
    let mut acc = vec![0.0; h_c.dim()];
    let mut prop: Option<Propagator> = None;
    for &(h, t) in &samples {
        let next = match prop.take() {
            Some(p) if p.hamiltonian().mixer.field == h => p.retimed(t)?,
            _ => Propagator::new(
                QuantumHamiltonian::new(*h_c, MixerSpec { kind, field: h }),
                t,
                prop_cfg,
            )?,
        };
        for (a, q) in acc.iter_mut().zip(next.proposal_column(h_c.marked())?) {
            *a += q;
        }
        prop = Some(next);
    }
    let w = 1.0 / samples.len() as f64;
    acc.iter_mut().for_each(|a| *a *= w);
    Ok(acc)
}

/// Exact gap of the (possibly averaged) chain and its method tag.
fn exact_gap(
    kernel: &ProposalKernel,
    h_c: &MarkedStateHamiltonian,
    beta: f64,
) -> Result<(f64, &'static str), Error> {
    let p = build_transition_matrix(kernel, &gibbs_measure(h_c, beta)?)?;
    let r = spectral_gap(&p, GapRoute::Auto, crate::spectral::DEFAULT_EPSILON)?;
    Ok((r.delta, r.method.tag()))
}

/// Per-N rows shared by both figure runs: closed form (Grover), marked-state
/// bound (all N) and the exact gap of the averaged chain (small N).
fn figure_rows(cfg: &ExperimentConfig, n_spins: usize) -> Vec<CsvRow> {
    let prop_cfg = PropagatorConfig::default();
    let scheme = cfg.scheme(n_spins);
    let ctx = RowContext {
        cfg,
        n_spins,
        h: param_column(scheme.h_range),
        t: param_column(scheme.t_range),
    };
    let h_c = match MarkedStateHamiltonian::with_default_mark(n_spins, cfg.alpha) {
        Ok(h) => h,
        Err(e) => return vec![ctx.row(Quantity::Bound, Err(e), "")],
    };
    let mut rows = Vec::new();
    let Some(kind) = cfg.mixer.quantum() else {
        let kernel = classical_kernel(cfg.mixer, n_spins);
        let bound = kernel.as_ref().map_err(Clone::clone).and_then(|k| {
            marked_state_bound(&k.column(h_c.marked())?, h_c.marked(), n_spins, cfg.alpha, cfg.beta)
        });
        let ctx = RowContext { h: ParamValue::NotApplicable, t: ParamValue::NotApplicable, ..ctx };
        rows.push(ctx.row(Quantity::Bound, bound, "marked_column"));
        if n_spins <= cfg.max_dense_n {
            let exact = kernel.and_then(|k| exact_gap(&k, &h_c, cfg.beta));
            let tag = exact.as_ref().map(|e| e.1).unwrap_or("");
            rows.push(ctx.row(Quantity::DeltaExact, exact.map(|e| e.0), tag));
        }
        return rows;
    };
    if kind == MixerKind::Grover {
        let closed = averaged_grover_gap_closed_form(n_spins, cfg.alpha, cfg.beta, &scheme);
        rows.push(ctx.row(Quantity::DeltaClosed, closed, "closed_form"));
    }
    let bound = averaged_marked_column(&h_c, kind, &scheme, &prop_cfg)
        .and_then(|col| marked_state_bound(&col, h_c.marked(), n_spins, cfg.alpha, cfg.beta));
    rows.push(ctx.row(Quantity::Bound, bound, "marked_column"));
    if n_spins <= cfg.max_dense_n {
        let exact = time_averaged_kernel(&h_c, kind, &scheme, &prop_cfg)
            .and_then(|k| exact_gap(&k, &h_c, cfg.beta));
        let tag = exact.as_ref().map(|e| e.1).unwrap_or("");
        rows.push(ctx.row(Quantity::DeltaExact, exact.map(|e| e.0), tag));
    }
    rows
}

fn slope_row(cfg: &ExperimentConfig, rows: &[CsvRow], quantity: Quantity) -> Option<CsvRow> {
    let points: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.quantity == quantity)
        .filter_map(|r| r.value.map(|v| (r.n_spins, v)))
        .collect();
    if points.len() < 4 {
        return None;
    }
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    let first = rows.iter().find(|r| r.quantity == quantity)?;
    let ctx = RowContext {
        cfg,
        n_spins: hi,
        h: first.h,
        t: first.t,
    };
    let method = format!("lsq_log2_{}_n{lo}_{hi}", quantity.as_str());
    Some(ctx.row(Quantity::Slope, scaling_fit(&points), &method))
}

fn figure(cfg: &ExperimentConfig) -> Vec<CsvRow> {
    let ns: Vec<usize> = (cfg.n_min..=cfg.n_max).collect();
    let mut rows: Vec<CsvRow> = par_map(ns, |n| figure_rows(cfg, n)).into_iter().flatten().collect();
    // With a per-N field (resonance) the h column differs by row; the slope
    // row then reports the field of the largest N.
    for q in [Quantity::DeltaClosed, Quantity::Bound, Quantity::DeltaExact] {
        let mut sorted: Vec<CsvRow> = rows.iter().filter(|r| r.quantity == q).cloned().collect();
        sorted.sort_by_key(|r| r.n_spins);
        if let Some(mut s) = slope_row(cfg, &sorted, q) {
            if let Some(last) = sorted.iter().rev().find(|r| r.value.is_some()) {
                s.h = last.h;
            }
            rows.push(s);
        }
    }
    sort_rows(&mut rows);
    rows
}

/// Time-averaged Grover gaps across N: closed-form average for every N, the
/// averaged chain's exact gap where it fits in memory.
pub fn run_figure_a(cfg: &ExperimentConfig) -> Vec<CsvRow> {
    figure(cfg)
}

/// Exact gaps and marked-state bounds, by default for the transverse field.
pub fn run_figure_b(cfg: &ExperimentConfig) -> Vec<CsvRow> {
    figure(cfg)
}

fn sweep_values(spec: ParamSpec, alpha: f64, n_spins: usize, count: usize) -> Vec<f64> {
    match spec {
        ParamSpec::Range(lo, hi) => {
            if count == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
            }
        }
        other => vec![other.range(alpha, n_spins).0],
    }
}

/// Pointwise sweep: ranges in `h` and `t` are swept, not averaged.
pub fn run_scan(cfg: &ExperimentConfig) -> Vec<CsvRow> {
    let mut points = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        if cfg.mixer.quantum().is_none() {
            points.push((n, f64::NAN, f64::NAN));
            continue;
        }
        for h in sweep_values(cfg.h, cfg.alpha, n, cfg.avg_samples) {
            for t in sweep_values(cfg.t, cfg.alpha, n, cfg.avg_samples) {
                points.push((n, h, t));
            }
        }
    }
    let mut rows: Vec<CsvRow> = par_map(points, |(n, h, t)| scan_point(cfg, n, h, t))
        .into_iter()
        .flatten()
        .collect();
    sort_rows(&mut rows);
    rows
}

fn scan_point(cfg: &ExperimentConfig, n_spins: usize, h: f64, t: f64) -> Vec<CsvRow> {
    let quantum = cfg.mixer.quantum();
    let param = |v: f64| match quantum {
        Some(_) => ParamValue::Value(v),
        None => ParamValue::NotApplicable,
    };
    let ctx = RowContext {
        cfg,
        n_spins,
        h: param(h),
        t: param(t),
    };
    let h_c = match MarkedStateHamiltonian::with_default_mark(n_spins, cfg.alpha) {
        Ok(h) => h,
        Err(e) => return vec![ctx.row(Quantity::Bound, Err(e), "")],
    };
    let mut rows = Vec::new();
    if quantum == Some(MixerKind::Grover) {
        let d = crate::spectral::grover_gap_closed_form(n_spins, cfg.alpha, cfg.beta, h, t);
        rows.push(ctx.row(Quantity::DeltaClosed, Ok(d), "closed_form"));
    }
    let prop_cfg = PropagatorConfig::default();
    let column = match quantum {
        Some(kind) => crate::quantum::quantum_proposal_column(
            &h_c,
            &MixerSpec { kind, field: h },
            t,
            h_c.marked(),
            &prop_cfg,
        ),
        None => classical_kernel(cfg.mixer, n_spins).and_then(|k| k.column(h_c.marked())),
    };
    let bound = column.and_then(|c| marked_state_bound(&c, h_c.marked(), n_spins, cfg.alpha, cfg.beta));
    rows.push(ctx.row(Quantity::Bound, bound, "marked_column"));
    if n_spins <= cfg.max_dense_n {
        let kernel = match quantum {
            Some(kind) => crate::quantum::quantum_kernel_structured(
                &h_c,
                &MixerSpec { kind, field: h },
                t,
                &prop_cfg,
            )
            .map(ProposalKernel::Structured),
            None => classical_kernel(cfg.mixer, n_spins),
        };
        let chain = kernel.and_then(|k| build_transition_matrix(&k, &gibbs_measure(&h_c, cfg.beta)?));
        match chain {
            Ok(p) => {
                let gap = spectral_gap(&p, GapRoute::Auto, cfg.epsilon);
                let tag = gap.as_ref().map(|g| g.method.tag()).unwrap_or("");
                rows.push(ctx.row(Quantity::DeltaExact, gap.map(|g| g.delta), tag));
                let tmix = exact_mixing_time(&p, cfg.epsilon).map(|v| v as f64);
                let method = format!("exact_eps_{}", cfg.epsilon);
                rows.push(ctx.row(Quantity::Tmix, tmix, &method));
            }
            Err(e) => {
                rows.push(ctx.row(Quantity::DeltaExact, Err(e.clone()), ""));
                rows.push(ctx.row(Quantity::Tmix, Err(e), ""));
            }
        }
    }
    rows
}

/// Runs one Metropolis-Hastings chain per N from the configuration farthest
/// from the marked state, and reports the distance of its visit histogram
/// to the target at four checkpoints. Small N also get the exact distance of
/// the step-`t` distribution.
pub fn run_sample(cfg: &ExperimentConfig) -> Vec<CsvRow> {
    let ns: Vec<usize> = (cfg.n_min..=cfg.n_max).collect();
    let mut rows: Vec<CsvRow> = par_map(ns, |n| sample_rows(cfg, n)).into_iter().flatten().collect();
    sort_rows(&mut rows);
    rows
}

fn sample_rows(cfg: &ExperimentConfig, n_spins: usize) -> Vec<CsvRow> {
    let quantum = cfg.mixer.quantum();
    let scheme = cfg.scheme(n_spins);
    let ctx = RowContext {
        cfg,
        n_spins,
        h: quantum.map_or(ParamValue::NotApplicable, |_| param_column(scheme.h_range)),
        t: quantum.map_or(ParamValue::NotApplicable, |_| param_column(scheme.t_range)),
    };
    let result = (|| -> Result<Vec<CsvRow>, Error> {
        let h_c = MarkedStateHamiltonian::with_default_mark(n_spins, cfg.alpha)?;
        let measure = gibbs_measure(&h_c, cfg.beta)?;
        let kernel = match quantum {
            Some(kind) if n_spins <= crate::proposal::DENSE_KERNEL_MAX_SPINS => {
                time_averaged_kernel(&h_c, kind, &scheme, &PropagatorConfig::default())?
            }
            Some(kind) => {
                let (h, t) = scheme.samples()?[0];
                if scheme.samples()?.len() > 1 {
                    return Err(Error::BudgetExceeded {
                        what: "averaged sampling kernel",
                        n_spins,
                        limit: crate::proposal::DENSE_KERNEL_MAX_SPINS,
                    });
                }
                crate::quantum::quantum_column_oracle(
                    &h_c,
                    &MixerSpec { kind, field: h },
                    t,
                    &PropagatorConfig::default(),
                )
            }
            None => classical_kernel(cfg.mixer, n_spins)?,
        };
        let start = Config(dimension(n_spins) - 1);
        let mut state = ChainState::new(start, n_spins, cfg.seed, n_spins as u64)?;
        let pi = measure.probabilities();
        let mut visits = vec![0u64; dimension(n_spins)];
        let checkpoints: Vec<u64> = (1..=4).map(|i| (cfg.steps * i / 4).max(1)).collect();
        let mut out = Vec::new();
        for &c in &checkpoints {
            while state.step_count < c {
                state.step(&kernel, &measure)?;
                visits[state.current.0] += 1;
            }
            let total = state.step_count as f64;
            let d = 0.5
                * visits
                    .iter()
                    .zip(&pi)
                    .map(|(&v, &p)| (v as f64 / total - p).abs())
                    .sum::<f64>();
            out.push(ctx.row(Quantity::Tv, Ok(d), &format!("empirical_steps_{c}")));
        }
        if n_spins <= cfg.max_dense_n {
            let p = build_transition_matrix(&kernel, &measure)?;
            let curve = tv_distance_curve(&p, start, *checkpoints.last().unwrap() as usize)?;
            for &c in &checkpoints {
                out.push(ctx.row(Quantity::Tv, Ok(curve[c as usize]), &format!("exact_steps_{c}")));
            }
        }
        Ok(out)
    })();
    result.unwrap_or_else(|e| vec![ctx.row(Quantity::Tv, Err(e), "")])
}
