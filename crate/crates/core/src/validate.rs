//! The acceptance suite as library code, shared by the `validate`
//! experiment and the `acceptance` test target.
//!
//! Each check returns one or more [`Outcome`]s. Failures are data: a check
//! that misses its tolerance still reports what it measured.

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bottleneck::{bottleneck_bound, marked_state_bound, sum_qa_certificate};
use crate::chain::{build_transition_matrix, exact_mixing_time, TransitionMatrix};
use crate::error::Result;
use crate::experiment::{run_figure_a, run_figure_b, write_csv, CsvRow, ExperimentConfig, ExperimentKind, Quantity};
use crate::model::{dimension, gibbs_measure, pi_min, Config, MarkedStateHamiltonian};
use crate::proposal::{affine_combination, uniform_kernel, validate_kernel, ProposalKernel};
use crate::quantum::{
    evolve, quantum_kernel_structured, quantum_kernel_with, quantum_proposal_column,
    resonance_field, KernelAssembly, MixerSpec, PropagatorConfig, Statevector,
};
use crate::spectral::{
    grover_gap_closed_form, mixing_time_bounds, scaling_fit, spectral_gap, uniform_gap_closed_form,
    GapRoute,
};

pub const VALIDATE_HEADER: [&str; 5] = ["criterion", "description", "measured", "tolerance", "verdict"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

/// Direction of the comparison against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: String,
    pub description: String,
    pub measured: f64,
    pub tolerance: f64,
    pub rule: Rule,
    pub verdict: Verdict,
    pub elapsed: Duration,
    pub detail: String,
}

impl Outcome {
    fn judged(
        id: &str,
        description: &str,
        measured: f64,
        rule: Rule,
        tolerance: f64,
        elapsed: Duration,
        detail: String,
    ) -> Self {
        let ok = match rule {
            Rule::AtMost => measured <= tolerance,
            Rule::AtLeast => measured >= tolerance,
        };
        Self {
            id: id.to_string(),
            description: description.to_string(),
            measured,
            tolerance,
            rule,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            elapsed,
            detail,
        }
    }

    fn skipped(id: &str, description: &str, reason: String) -> Self {
        Self {
            id: id.to_string(),
            description: description.to_string(),
            measured: f64::NAN,
            tolerance: f64::NAN,
            rule: Rule::AtMost,
            verdict: Verdict::Skipped,
            elapsed: Duration::ZERO,
            detail: reason,
        }
    }

    fn failed(id: &str, description: &str, err: impl fmt::Display) -> Self {
        Self {
            verdict: Verdict::Fail,
            detail: format!("error: {err}"),
            ..Self::skipped(id, description, String::new())
        }
    }

    /// Fails an outcome that passed its tolerance but ran over time.
    fn within(mut self, limit: Duration) -> Self {
        if self.elapsed > limit && self.verdict == Verdict::Pass {
            self.verdict = Verdict::Fail;
            self.detail = format!(
                "{}; runtime {:.1}s over the {:.0}s limit",
                self.detail,
                self.elapsed.as_secs_f64(),
                limit.as_secs_f64()
            );
        }
        self
    }

    pub fn tolerance_text(&self) -> String {
        match self.rule {
            _ if self.verdict == Verdict::Skipped => String::new(),
            Rule::AtMost => format!("<= {:e}", self.tolerance),
            Rule::AtLeast => format!(">= {:e}", self.tolerance),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:<4} {:<7} measured={:<24e} tolerance {:<12} time={:.2}s  {}",
            self.id,
            self.verdict.as_str().to_uppercase(),
            self.measured,
            self.tolerance_text(),
            self.elapsed.as_secs_f64(),
            self.description
        )?;
        if !self.detail.is_empty() {
            write!(f, " [{}]", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Largest spin count any check may use; checks that need more are skipped.
    pub max_n: usize,
    pub seed: u64,
    /// Replaces the eigensolve tolerance of the closed-form checks.
    pub eigen_tolerance: Option<f64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            max_n: 20,
            seed: 0,
            eigen_tolerance: None,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn hamiltonian(n: usize, alpha: f64) -> Result<MarkedStateHamiltonian> {
    MarkedStateHamiltonian::with_default_mark(n, alpha)
}

fn chain(kernel: &ProposalKernel, h_c: &MarkedStateHamiltonian, beta: f64) -> Result<TransitionMatrix> {
    build_transition_matrix(kernel, &gibbs_measure(h_c, beta)?)
}

fn need(id: &str, description: &str, opts: &ValidateOptions, n: usize) -> Option<Outcome> {
    (n > opts.max_n).then(|| Outcome::skipped(id, description, format!("needs N = {n} > budget {}", opts.max_n)))
}

macro_rules! attempt {
    ($id:expr, $desc:expr, $body:expr) => {
        match (|| -> Result<Outcome> { $body })() {
            Ok(o) => o,
            Err(e) => Outcome::failed($id, $desc, e),
        }
    };
}

pub const C1: &str = "uniform-proposal gap vs closed form, N=4..10, beta in {0,1,5}, within 1 min";

pub fn criterion_1(opts: &ValidateOptions) -> Outcome {
    if let Some(s) = need("1", C1, opts, 10) {
        return s;
    }
    let tol = opts.eigen_tolerance.unwrap_or(1e-8);
    let start = Instant::now();
    attempt!("1", C1, {
        let mut worst: f64 = 0.0;
        let mut at = String::new();
        for n in 4..=10 {
            let h_c = hamiltonian(n, 1.0)?;
            let kernel = uniform_kernel(n)?;
            for beta in [0.0, 1.0, 5.0] {
                let p = chain(&kernel, &h_c, beta)?;
                let d = spectral_gap(&p, GapRoute::Full, 0.01)?.delta;
                let e = rel(d, uniform_gap_closed_form(n, 1.0, beta));
                if e > worst {
                    worst = e;
                    at = format!("worst at N={n}, beta={beta}");
                }
            }
        }
        Ok(Outcome::judged("1", C1, worst, Rule::AtMost, tol, start.elapsed(), at)
            .within(Duration::from_secs(60)))
    })
}

/// One draw of the Grover closed-form sweep.
#[derive(Debug, Clone, Copy)]
pub struct GroverDraw {
    pub n_spins: usize,
    pub alpha: f64,
    pub h: f64,
    pub t: f64,
}

/// Fifty draws of `(α, h, t)` per `N = 4..=10`, in a fixed order.
pub fn grover_draws(seed: u64) -> Vec<GroverDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(350);
    for n_spins in 4..=10 {
        for _ in 0..50 {
            let alpha = rng.random_range(0.5..2.0);
            let h = rng.random_range(-2.0..2.0);
            let t = rng.random_range(0.0..5.0);
            out.push(GroverDraw { n_spins, alpha, h, t });
        }
    }
    out
}

/// Relaxation rate of the modes that live on the unmarked states alone and
/// are orthogonal to their uniform vector: `q_m / (2^N - 1) + (2^N - 1) q_u`,
/// with `q_m` the proposal mass leaving the marked state and `q_u` the
/// proposal between two unmarked states. No acceptance enters, since these
/// moves are never rejected.
pub fn unmarked_mode_gap(kernel: &ProposalKernel, marked: Config, n_spins: usize) -> Result<f64> {
    let dim = dimension(n_spins);
    let q_m = 1.0 - kernel.column(marked)?[marked.0];
    let a = (0..dim).find(|&x| x != marked.0).expect("N >= 1");
    let b = (0..dim).find(|&x| x != marked.0 && x != a).expect("N >= 2");
    let q_u = kernel.column(Config(a))?[b];
    Ok(q_m / (dim - 1) as f64 + (dim - 1) as f64 * q_u)
}

pub const C2: &str = "simulated Grover chain gap vs closed form, N=4..10, 50 draws, beta in {1,5}, within 5 min";

pub fn criterion_2(opts: &ValidateOptions) -> Outcome {
    if let Some(s) = need("2", C2, opts, 10) {
        return s;
    }
    let tol = opts.eigen_tolerance.unwrap_or(1e-8);
    let start = Instant::now();
    attempt!("2", C2, {
        let cfg = PropagatorConfig::default();
        let mut worst: f64 = 0.0;
        let mut misses = 0;
        let mut explained = 0;
        let mut at = String::new();
        for d in grover_draws(opts.seed) {
            let h_c = hamiltonian(d.n_spins, d.alpha)?;
            let kernel = ProposalKernel::Structured(quantum_kernel_structured(
                &h_c,
                &MixerSpec::grover(d.h),
                d.t,
                &cfg,
            )?);
            let unmarked = unmarked_mode_gap(&kernel, h_c.marked(), d.n_spins)?;
            for beta in [1.0, 5.0] {
                let p = chain(&kernel, &h_c, beta)?;
                let gap = spectral_gap(&p, GapRoute::Full, 0.01)?.delta;
                let closed = grover_gap_closed_form(d.n_spins, d.alpha, beta, d.h, d.t);
                let e = rel(gap, closed);
                if e > tol {
                    misses += 1;
                    if rel(gap, closed.min(unmarked)) <= tol {
                        explained += 1;
                    }
                }
                if e > worst {
                    worst = e;
                    at = format!(
                        "worst at N={}, alpha={:.4}, h={:.4}, t={:.4}, beta={beta}",
                        d.n_spins, d.alpha, d.h, d.t
                    );
                }
            }
        }
        let detail = format!(
            "{misses} of 700 cases over tolerance, {explained} of them set by the unmarked mode; {at}"
        );
        Ok(Outcome::judged("2", C2, worst, Rule::AtMost, tol, start.elapsed(), detail)
            .within(Duration::from_secs(300)))
    })
}

pub const C3: &str = "marked-state bound from a simulated column vs closed form over the same sweep";

pub fn criterion_3(opts: &ValidateOptions) -> Outcome {
    if let Some(s) = need("3", C3, opts, 10) {
        return s;
    }
    let start = Instant::now();
    attempt!("3", C3, {
        // One column per draw, so the dense route would waste its eigenbasis.
        let cfg = PropagatorConfig::krylov();
        let mut worst: f64 = 0.0;
        for d in grover_draws(opts.seed) {
            let h_c = hamiltonian(d.n_spins, d.alpha)?;
            let col = quantum_proposal_column(&h_c, &MixerSpec::grover(d.h), d.t, h_c.marked(), &cfg)?;
            for beta in [1.0, 5.0] {
                let bound = marked_state_bound(&col, h_c.marked(), d.n_spins, d.alpha, beta)?;
                worst = worst.max(rel(bound, grover_gap_closed_form(d.n_spins, d.alpha, beta, d.h, d.t)));
            }
        }
        Ok(Outcome::judged("3", C3, worst, Rule::AtMost, 1e-9, start.elapsed(), String::new()))
    })
}

pub const C4A: &str = "transverse-field gap below marked-state bound, N=6..12, beta=5, 20 draws";
pub const C4B: &str = "transverse-field gap below the bound of 100 random cuts per chain, N=6..8";

/// Random cut with `π(S) ≤ 1/2`, neither empty nor full.
fn random_cut(rng: &mut ChaCha8Rng, p: &TransitionMatrix) -> Vec<Config> {
    let n = p.dim();
    loop {
        let density: f64 = rng.random_range(0.05..0.95);
        let set: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < density).collect();
        if set.is_empty() || set.len() == n {
            continue;
        }
        let mass: f64 = set.iter().map(|&x| p.stationary().prob(Config(x))).sum();
        let chosen = if mass <= 0.5 {
            set
        } else {
            let mut inside = vec![false; n];
            set.iter().for_each(|&x| inside[x] = true);
            (0..n).filter(|&x| !inside[x]).collect()
        };
        return chosen.into_iter().map(Config).collect();
    }
}

pub fn criterion_4(opts: &ValidateOptions) -> Vec<Outcome> {
    if let Some(s) = need("4a", C4A, opts, 12) {
        return vec![s.clone(), Outcome::skipped("4b", C4B, s.detail)];
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4);
    let mut cut_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x40);
    let result = (|| -> Result<(f64, f64, String)> {
        let cfg = PropagatorConfig::default();
        let mut worst_marked = f64::NEG_INFINITY;
        let mut worst_cut = f64::NEG_INFINITY;
        let mut tightness = Vec::new();
        for n in 6..=12 {
            let h_c = hamiltonian(n, 1.0)?;
            for _ in 0..20 {
                let h = rng.random_range(-2.0..2.0);
                let t = rng.random_range(0.0..5.0);
                let mixer = MixerSpec::transverse_field(h);
                let kernel = ProposalKernel::Structured(quantum_kernel_structured(&h_c, &mixer, t, &cfg)?);
                let p = chain(&kernel, &h_c, 5.0)?;
                let delta = spectral_gap(&p, GapRoute::Auto, 0.01)?.delta;
                let col = kernel.column(h_c.marked())?;
                let bound = marked_state_bound(&col, h_c.marked(), n, 1.0, 5.0)?;
                worst_marked = worst_marked.max(delta - bound);
                if delta > 0.0 {
                    tightness.push(bound / delta);
                }
                if n <= 8 {
                    for _ in 0..100 {
                        let cut = random_cut(&mut cut_rng, &p);
                        let b = bottleneck_bound(&p, &cut)?.bound;
                        worst_cut = worst_cut.max(delta - b);
                    }
                }
            }
        }
        tightness.sort_by(f64::total_cmp);
        let median = tightness.get(tightness.len() / 2).copied().unwrap_or(f64::NAN);
        Ok((worst_marked, worst_cut, format!("median bound/gap ratio {median:.4}")))
    })();
    let elapsed = start.elapsed();
    match result {
        Ok((a, b, detail)) => vec![
            Outcome::judged("4a", C4A, a, Rule::AtMost, 1e-12, elapsed, detail),
            Outcome::judged("4b", C4B, b, Rule::AtMost, 1e-12, elapsed, String::new()),
        ],
        Err(e) => vec![Outcome::failed("4a", C4A, &e), Outcome::failed("4b", C4B, &e)],
    }
}

pub const C5A: &str = "closed-form gap slope at the resonance field, N=10..20, beta=5, target -1";
pub const C5B: &str = "closed-form gap slope at h=alpha=1, t=0.3, N=10..20, beta=5, target -2";

pub fn criterion_5(opts: &ValidateOptions) -> Vec<Outcome> {
    if let Some(s) = need("5a", C5A, opts, 20) {
        return vec![s.clone(), Outcome::skipped("5b", C5B, s.detail)];
    }
    let start = Instant::now();
    let resonance: Vec<(usize, f64)> = (10..=20)
        .map(|n| {
            let h = resonance_field(1.0, n);
            let gamma = crate::quantum::gamma_squared(n, 1.0, h).sqrt();
            // Half a Rabi period: t = π / (2Nω) with Nω = γ.
            let t = std::f64::consts::PI / (2.0 * gamma);
            (n, grover_gap_closed_form(n, 1.0, 5.0, h, t))
        })
        .collect();
    let off: Vec<(usize, f64)> = (10..=20)
        .map(|n| (n, grover_gap_closed_form(n, 1.0, 5.0, 1.0, 0.3)))
        .collect();
    let judge = |id: &str, desc: &str, pts: &[(usize, f64)], target: f64| match scaling_fit(pts) {
        Ok(slope) => Outcome::judged(
            id,
            desc,
            (slope - target).abs(),
            Rule::AtMost,
            0.1,
            start.elapsed(),
            format!("slope {slope:.4}"),
        ),
        Err(e) => Outcome::failed(id, desc, e),
    };
    vec![judge("5a", C5A, &resonance, -1.0), judge("5b", C5B, &off, -2.0)]
}

pub const C6: &str = "transverse-field marked-state bound slope, N=10..20, beta=5, h=1, t=1, within 10 min";

pub fn criterion_6(opts: &ValidateOptions) -> Outcome {
    if let Some(s) = need("6", C6, opts, 20) {
        return s;
    }
    let start = Instant::now();
    attempt!("6", C6, {
        let cfg = PropagatorConfig::default();
        let mut pts = Vec::new();
        for n in 10..=20 {
            let h_c = hamiltonian(n, 1.0)?;
            let col = quantum_proposal_column(&h_c, &MixerSpec::transverse_field(1.0), 1.0, h_c.marked(), &cfg)?;
            pts.push((n, marked_state_bound(&col, h_c.marked(), n, 1.0, 5.0)?));
        }
        let slope = scaling_fit(&pts)?;
        Ok(Outcome::judged("6", C6, slope, Rule::AtLeast, -1.2, start.elapsed(), String::new())
            .within(Duration::from_secs(600)))
    })
}

pub const C7: &str = "exact mixing time inside the spectral sandwich, N=4..8, uniform and Grover, beta in {1,5}";

pub fn criterion_7(opts: &ValidateOptions) -> Outcome {
    if let Some(s) = need("7", C7, opts, 8) {
        return s;
    }
    let start = Instant::now();
    attempt!("7", C7, {
        let eps = 0.01;
        let cfg = PropagatorConfig::default();
        // Positive measured value means the exact time left the sandwich.
        let mut worst = f64::NEG_INFINITY;
        let mut at = String::new();
        for n in 4..=8 {
            let h_c = hamiltonian(n, 1.0)?;
            let grover = quantum_kernel_structured(&h_c, &MixerSpec::grover(1.0), 1.0, &cfg)?;
            for (name, kernel) in [("uniform", uniform_kernel(n)?), ("grover", ProposalKernel::Structured(grover))] {
                for beta in [1.0, 5.0] {
                    let p = chain(&kernel, &h_c, beta)?;
                    let delta = spectral_gap(&p, GapRoute::Full, eps)?.delta;
                    let (lo, hi) = mixing_time_bounds(delta, pi_min(p.stationary()), eps)?;
                    let t = exact_mixing_time(&p, eps)? as f64;
                    let v = (lo - t).max(t - hi);
                    if v > worst {
                        worst = v;
                        at = format!("tightest at N={n}, {name}, beta={beta}: {lo:.1} <= {t} <= {hi:.1}");
                    }
                }
            }
        }
        Ok(Outcome::judged("7", C7, worst, Rule::AtMost, 0.0, start.elapsed(), at)
            .within(Duration::from_secs(120)))
    })
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Result<Statevector> {
    let amps: Vec<Complex64> = (0..dimension(n))
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(n, amps.into_iter().map(|z| z / norm).collect())
}

pub const C8: &str = "Krylov vs dense propagation fidelity, N<=10, 20 random states and times";

pub fn criterion_8(opts: &ValidateOptions) -> Outcome {
    if let Some(s) = need("8", C8, opts, 10) {
        return s;
    }
    let start = Instant::now();
    attempt!("8", C8, {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x8);
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let n = rng.random_range(4..=10);
            let alpha = rng.random_range(0.5..2.0);
            let h = rng.random_range(-2.0..2.0);
            let t = rng.random_range(0.0..5.0);
            let mixer = if i % 2 == 0 {
                MixerSpec::grover(h)
            } else {
                MixerSpec::transverse_field(h)
            };
            let h_c = hamiltonian(n, alpha)?;
            let psi = random_state(&mut rng, n)?;
            let a = evolve(&h_c, &mixer, &psi, t, &PropagatorConfig::dense())?;
            let b = evolve(&h_c, &mixer, &psi, t, &PropagatorConfig::krylov())?;
            worst = worst.max(1.0 - a.fidelity(&b));
        }
        Ok(Outcome::judged("8", C8, worst, Rule::AtMost, 1e-10, start.elapsed(), String::new()))
    })
}

pub const C9A: &str = "detailed balance of quantum-proposal chains, 120 random cases";
pub const C9B: &str = "double stochasticity of quantum kernels, 120 random cases";
pub const C9C: &str = "symmetry of quantum kernels, 120 random cases";
pub const C9D: &str = "sum of Q*A into the marked state minus one, kernels and convex mixtures";

pub fn criterion_9(opts: &ValidateOptions) -> Vec<Outcome> {
    if let Some(s) = need("9a", C9A, opts, 7) {
        return [("9a", C9A), ("9b", C9B), ("9c", C9C), ("9d", C9D)]
            .iter()
            .map(|(id, d)| Outcome::skipped(id, d, s.detail.clone()))
            .collect();
    }
    let start = Instant::now();
    let result = (|| -> Result<[f64; 4]> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9);
        let cfg = PropagatorConfig::default();
        let mut worst = [0.0f64, 0.0, 0.0, f64::NEG_INFINITY];
        let mut previous: Option<(usize, ProposalKernel)> = None;
        for i in 0..120 {
            let n = rng.random_range(3..=7);
            let alpha = rng.random_range(0.5..2.0);
            let h = rng.random_range(-2.0..2.0);
            let t = rng.random_range(0.0..5.0);
            let beta = rng.random_range(0.0..5.0);
            let mixer = match i % 2 {
                0 => MixerSpec::grover(h),
                _ => MixerSpec::transverse_field(h),
            };
            let h_c = hamiltonian(n, alpha)?;
            // Column by column, so every entry comes from its own evolution.
            let kernel = quantum_kernel_with(&h_c, &mixer, t, &cfg, KernelAssembly::PerColumn)?;
            let cert = validate_kernel(&kernel)?;
            let p = chain(&kernel, &h_c, beta)?;
            worst[0] = worst[0].max(p.detailed_balance_violation());
            worst[1] = worst[1].max(cert.max_column_deviation.max(cert.max_row_deviation));
            worst[2] = worst[2].max(cert.max_asymmetry);
            worst[3] = worst[3].max(sum_qa_certificate(&kernel, h_c.marked())? - 1.0);
            if let Some((pn, other)) = &previous {
                if *pn == n {
                    let w = rng.random_range(0.0..1.0);
                    let mix = affine_combination(&[w, 1.0 - w], &[kernel.clone(), other.clone()])?;
                    worst[3] = worst[3].max(sum_qa_certificate(&mix, h_c.marked())? - 1.0);
                }
            }
            previous = Some((n, kernel));
        }
        Ok(worst)
    })();
    let elapsed = start.elapsed();
    match result {
        Ok(w) => vec![
            Outcome::judged("9a", C9A, w[0], Rule::AtMost, 1e-9, elapsed, String::new()),
            Outcome::judged("9b", C9B, w[1], Rule::AtMost, 1e-9, elapsed, String::new()),
            Outcome::judged("9c", C9C, w[2], Rule::AtMost, 1e-9, elapsed, String::new()),
            Outcome::judged("9d", C9D, w[3], Rule::AtMost, 1e-10, elapsed, String::new()),
        ],
        Err(e) => [("9a", C9A), ("9b", C9B), ("9c", C9C), ("9d", C9D)]
            .iter()
            .map(|(id, d)| Outcome::failed(id, d, &e))
            .collect(),
    }
}

pub const C10A: &str = "figure runs complete for N=10..20 at beta=5 within 30 min";
pub const C10B: &str = "figure runs: exact gap never above the bound on paired rows";
pub const C10C: &str = "figure runs byte-identical when repeated with the same seed";

fn csv_bytes(rows: &[CsvRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Largest `exact - bound` over rows sharing `(N, h, t)`.
pub fn paired_violation(rows: &[CsvRow]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for e in rows.iter().filter(|r| r.quantity == Quantity::DeltaExact) {
        for b in rows.iter().filter(|r| {
            r.quantity == Quantity::Bound && r.n_spins == e.n_spins && r.h == e.h && r.t == e.t
        }) {
            if let (Some(x), Some(y)) = (e.value, b.value) {
                worst = worst.max(x - y);
            }
        }
    }
    worst
}

pub fn criterion_10(opts: &ValidateOptions) -> Vec<Outcome> {
    if let Some(s) = need("10a", C10A, opts, 20) {
        return vec![
            s.clone(),
            Outcome::skipped("10b", C10B, s.detail.clone()),
            Outcome::skipped("10c", C10C, s.detail),
        ];
    }
    let mut a_cfg = ExperimentConfig::defaults(ExperimentKind::FigureA);
    let mut b_cfg = ExperimentConfig::defaults(ExperimentKind::FigureB);
    a_cfg.seed = opts.seed;
    b_cfg.seed = opts.seed;
    let start = Instant::now();
    let a = run_figure_a(&a_cfg);
    let b = run_figure_b(&b_cfg);
    let first = start.elapsed();
    let skipped = a.iter().chain(&b).filter(|r| r.value.is_none()).count();
    let sizes_ok = (10..=20).all(|n| {
        [&a, &b].iter().all(|rows| rows.iter().any(|r| r.n_spins == n && r.value.is_some()))
    });
    let a2 = run_figure_a(&a_cfg);
    let b2 = run_figure_b(&b_cfg);
    let mismatches = (csv_bytes(&a) != csv_bytes(&a2)) as u32 + (csv_bytes(&b) != csv_bytes(&b2)) as u32;
    let violation = paired_violation(&a).max(paired_violation(&b));
    let mut complete = Outcome::judged(
        "10a",
        C10A,
        first.as_secs_f64(),
        Rule::AtMost,
        1800.0,
        first,
        format!("{} rows, {skipped} skipped", a.len() + b.len()),
    );
    if skipped > 0 || !sizes_ok {
        complete.verdict = Verdict::Fail;
    }
    vec![
        complete,
        Outcome::judged("10b", C10B, violation, Rule::AtMost, 1e-12, first, String::new()),
        Outcome::judged("10c", C10C, mismatches as f64, Rule::AtMost, 0.0, start.elapsed(), String::new()),
    ]
}

/// Every check, in order.
pub fn run_all(opts: &ValidateOptions) -> Vec<Outcome> {
    let mut out = vec![criterion_1(opts), criterion_2(opts), criterion_3(opts)];
    out.extend(criterion_4(opts));
    out.extend(criterion_5(opts));
    out.push(criterion_6(opts));
    out.push(criterion_7(opts));
    out.push(criterion_8(opts));
    out.extend(criterion_9(opts));
    out.extend(criterion_10(opts));
    out
}

pub fn write_outcomes<W: Write>(outcomes: &[Outcome], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(VALIDATE_HEADER)?;
    for o in outcomes {
        let measured = if o.measured.is_nan() {
            String::new()
        } else {
            crate::experiment::format_real(o.measured)
        };
        w.write_record([
            o.id.clone(),
            o.description.clone(),
            measured,
            o.tolerance_text(),
            o.verdict.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_budget_skips_large_checks() {
        let opts = ValidateOptions {
            max_n: 8,
            ..Default::default()
        };
        assert_eq!(criterion_1(&opts).verdict, Verdict::Skipped);
        assert!(criterion_5(&opts).iter().all(|o| o.verdict == Verdict::Skipped));
        assert!(criterion_10(&opts).iter().all(|o| o.verdict == Verdict::Skipped));
    }

    #[test]
    fn tightened_tolerance_fails() {
        let o = Outcome::judged("x", "d", 1e-13, Rule::AtMost, 1e-15, Duration::ZERO, String::new());
        assert_eq!(o.verdict, Verdict::Fail);
        let o = Outcome::judged("x", "d", -1.1, Rule::AtLeast, -1.2, Duration::from_secs(9), String::new())
            .within(Duration::from_secs(5));
        assert_eq!(o.verdict, Verdict::Fail);
    }

    #[test]
    fn draws_are_fixed_by_seed() {
        let a = grover_draws(3);
        let b = grover_draws(3);
        assert_eq!(a.len(), 350);
        assert!(a.iter().zip(&b).all(|(x, y)| x.h == y.h && x.t == y.t));
        assert!(a.iter().all(|d| (0.5..2.0).contains(&d.alpha) && (0.0..5.0).contains(&d.t)));
    }

    #[test]
    fn unmarked_mode_sets_the_gap_when_the_closed_form_misses() {
        let (n, alpha, h, t, beta) = (8, 0.6122, -0.8825, 3.549, 1.0);
        let h_c = hamiltonian(n, alpha).unwrap();
        let kernel = ProposalKernel::Structured(
            quantum_kernel_structured(&h_c, &MixerSpec::grover(h), t, &PropagatorConfig::dense()).unwrap(),
        );
        let p = chain(&kernel, &h_c, beta).unwrap();
        let gap = spectral_gap(&p, GapRoute::Full, 0.01).unwrap().delta;
        let closed = grover_gap_closed_form(n, alpha, beta, h, t);
        let unmarked = unmarked_mode_gap(&kernel, h_c.marked(), n).unwrap();
        assert!(unmarked < closed);
        assert!(rel(gap, unmarked) < 1e-9, "{gap} vs {unmarked}");
    }

    #[test]
    fn outcome_csv() {
        let o = vec![
            Outcome::judged("1", "d, with comma", 0.5, Rule::AtMost, 1e-8, Duration::ZERO, String::new()),
            Outcome::skipped("2", "e", "budget".into()),
        ];
        let mut buf = Vec::new();
        write_outcomes(&o, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "criterion,description,measured,tolerance,verdict\n\
             1,\"d, with comma\",5.0000000000000000e-1,<= 1e-8,fail\n\
             2,e,,,skipped\n"
        );
    }
}
