//! Metropolis-Hastings chains over the spin configurations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Config, GibbsMeasure};
use crate::proposal::{validate_kernel, ProposalKernel};
use crate::symmetry::{invariance_defect, lump_from_level};

/// Largest chain held as a dense matrix.
pub const CHAIN_MAX_SPINS: usize = 12;
/// Kernels must be symmetric to this tolerance before a chain is built.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Diagonal entries below this are reported rather than clamped.
const DIAGONAL_FLOOR: f64 = -1e-12;
/// Spin-permutation defect below which a chain counts as orbit-symmetric.
const ORBIT_TOL: f64 = 1e-12;
/// Hard cap on mixing-time searches.
pub const MIXING_CAP: u64 = 1 << 40;

/// `min(1, exp(-β·ΔE + log_q_ratio))`.
pub fn mh_acceptance(delta_e: f64, beta: f64, log_q_ratio: f64) -> f64 {
    let exponent = if beta == 0.0 {
        log_q_ratio
    } else {
        -beta * delta_e + log_q_ratio
    };
    if exponent >= 0.0 {
        1.0
    } else {
        exponent.exp()
    }
}

/// Dense Metropolis-Hastings matrix, `p[(y, x)] = Pr(y → x)`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n_spins: usize,
    p: DMatrix<f64>,
    escape: Vec<f64>,
    stationary: GibbsMeasure,
    orbit_symmetric: bool,
}

pub fn build_transition_matrix(
    kernel: &ProposalKernel,
    measure: &GibbsMeasure,
) -> Result<TransitionMatrix> {
    let n_spins = kernel.n_spins();
    if n_spins != measure.n_spins() {
        return Err(Error::MismatchedDimensions {
            expected: measure.dim(),
            found: kernel.dim(),
        });
    }
    if n_spins > CHAIN_MAX_SPINS {
        return Err(Error::BudgetExceeded {
            what: "dense transition matrix",
            n_spins,
            limit: CHAIN_MAX_SPINS,
        });
    }
    let cert = validate_kernel(kernel)?;
    if cert.max_asymmetry > SYMMETRY_TOL {
        return Err(Error::AsymmetricKernel {
            asymmetry: cert.max_asymmetry,
        });
    }
    let n = kernel.dim();
    let lw = measure.log_weights();
    let dense = kernel.to_dense()?;
    let mut p = DMatrix::<f64>::zeros(n, n);
    let mut escape = vec![0.0; n];
    for y in 0..n {
        let col = dense.column(Config(y));
        let mut out = 0.0;
        for x in 0..n {
            if x == y {
                continue;
            }
            let d = lw[x] - lw[y];
            let a = if d >= 0.0 { 1.0 } else { d.exp() };
            let v = col[x] * a;
            p[(y, x)] = v;
            out += v;
        }
        let diag = 1.0 - out;
        if diag < DIAGONAL_FLOOR {
            return Err(Error::NegativeDiagonal { row: y, value: diag });
        }
        p[(y, y)] = diag.max(0.0);
        escape[y] = out;
    }
    let orbit_symmetric = match (kernel.as_structured(), measure.marked()) {
        (Some(s), Some(k)) if s.center() == k => true,
        (_, Some(k)) => invariance_defect(n_spins, k.0, |y, x| p[(y, x)]) <= ORBIT_TOL,
        _ => false,
    };
    Ok(TransitionMatrix {
        n_spins,
        p,
        escape,
        stationary: measure.clone(),
        orbit_symmetric,
    })
}

impl TransitionMatrix {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// `P(y, x)`.
    pub fn prob(&self, y: Config, x: Config) -> f64 {
        self.p[(y.0, x.0)]
    }

    /// Off-diagonal row mass `Σ_{x≠y} P(y, x)`, kept separately so that
    /// `1 - P(y, y)` never suffers cancellation.
    pub fn escape(&self) -> &[f64] {
        &self.escape
    }

    pub fn stationary(&self) -> &GibbsMeasure {
        &self.stationary
    }

    /// True when `P` commutes with relabelling the spins around the marked state.
    pub fn is_orbit_symmetric(&self) -> bool {
        self.orbit_symmetric
    }

    /// Entry of `S = Π^{1/2} P Π^{-1/2}`, from log-space weight ratios.
    pub fn symmetrized(&self, y: usize, x: usize) -> f64 {
        let lw = self.stationary.log_weights();
        let v = self.p[(y, x)];
        if v == 0.0 {
            0.0
        } else {
            v * (0.5 * (lw[y] - lw[x])).exp()
        }
    }

    /// Entry of `I - S`, with the diagonal taken from the escape mass.
    pub fn laplacian(&self, y: usize, x: usize) -> f64 {
        if y == x {
            self.escape[y]
        } else {
            -0.5 * (self.symmetrized(y, x) + self.symmetrized(x, y))
        }
    }

    pub fn max_row_deviation(&self) -> f64 {
        self.p
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |π(y)P(y,x) - π(x)P(x,y)|` over the largest such flow.
    pub fn detailed_balance_violation(&self) -> f64 {
        let lw = self.stationary.log_weights();
        let lz = self.stationary.log_partition();
        let n = self.dim();
        let mut worst: f64 = 0.0;
        let mut largest: f64 = 0.0;
        for y in 0..n {
            let py = (lw[y] - lz).exp();
            #[allow(clippy::needless_range_loop)]
            for x in 0..n {
                let f = py * self.p[(y, x)];
                largest = largest.max(f);
                if x > y {
                    let g = (lw[x] - lz).exp() * self.p[(x, y)];
                    worst = worst.max((f - g).abs());
                }
            }
        }
        if largest == 0.0 {
            0.0
        } else {
            worst / largest
        }
    }

    /// `‖πᵀP - πᵀ‖₁`.
    pub fn stationarity_defect(&self) -> f64 {
        let pi = DVector::from_vec(self.stationary.probabilities());
        let moved = self.p.tr_mul(&pi);
        (moved - pi).abs().sum()
    }

    /// Fails with [`Error::NotReversible`] above `tol`.
    pub fn check_reversible(&self, tol: f64) -> Result<()> {
        let violation = self.detailed_balance_violation();
        if violation > tol {
            return Err(Error::NotReversible { violation });
        }
        Ok(())
    }
}

/// One chain's position plus its private random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: Config,
    pub step_count: u64,
    rng: ChaCha8Rng,
}

impl ChainState {
    /// Stream `stream` of the generator seeded by `seed`; distinct streams are independent.
    pub fn new(start: Config, n_spins: usize, seed: u64, stream: u64) -> Result<Self> {
        let current = Config::new(start.0, n_spins)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            current,
            step_count: 0,
            rng,
        })
    }

    pub fn seed(&self) -> [u8; 32] {
        self.rng.get_seed()
    }

    pub fn stream(&self) -> u64 {
        self.rng.get_stream()
    }

    /// Propose from `Q(·|current)` and accept with the symmetric-kernel rule.
    /// Returns whether the move was accepted; rejections still count as steps.
    pub fn step(&mut self, kernel: &ProposalKernel, measure: &GibbsMeasure) -> Result<bool> {
        let y = self.current;
        let x = kernel.sample(y, &mut self.rng)?;
        self.step_count += 1;
        if x == y {
            return Ok(true);
        }
        let lw = measure.log_weights();
        let d = lw[x.0] - lw[y.0];
        let a = if d >= 0.0 { 1.0 } else { d.exp() };
        let accepted = a >= 1.0 || self.rng.random::<f64>() < a;
        if accepted {
            self.current = x;
        }
        Ok(accepted)
    }
}

pub fn chain_step(
    mut state: ChainState,
    kernel: &ProposalKernel,
    measure: &GibbsMeasure,
) -> Result<ChainState> {
    state.step(kernel, measure)?;
    Ok(state)
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `d(t)` for `t = 0..=max_t` from a point mass at `start`.
pub fn tv_distance_curve(p: &TransitionMatrix, start: Config, max_t: usize) -> Result<Vec<f64>> {
    let start = Config::new(start.0, p.n_spins)?;
    let pi = p.stationary.probabilities();
    let mut dist = DVector::<f64>::zeros(p.dim());
    dist[start.0] = 1.0;
    let mut curve = Vec::with_capacity(max_t + 1);
    curve.push(tv(dist.as_slice(), &pi));
    for _ in 0..max_t {
        dist = p.p.tr_mul(&dist);
        curve.push(tv(dist.as_slice(), &pi));
    }
    Ok(curve)
}

/// `min{t : d(t) ≤ ε}` for the worst rows of `rows`, where `rows` holds the
/// start distributions and `d` the largest row-wise distance to `pi` after
/// `t` steps of `m`. Relies on each row's distance being nonincreasing in `t`.
fn binary_lifted_time(
    m: &DMatrix<f64>,
    rows: DMatrix<f64>,
    distance: impl Fn(&DMatrix<f64>) -> f64,
    epsilon: f64,
) -> Result<u64> {
    if distance(&rows) <= epsilon {
        return Ok(0);
    }
    // powers[i] = m^(2^i); stop at the first power whose distance is small.
    let mut powers = vec![m.clone()];
    loop {
        let last = powers.last().unwrap();
        if distance(&(&rows * last)) <= epsilon {
            break;
        }
        if (1u64 << powers.len()) > MIXING_CAP {
            return Err(Error::NoConvergence { cap: MIXING_CAP });
        }
        let sq = last * last;
        powers.push(sq);
    }
    // Largest t with d(t) > ε, accumulated bit by bit.
    let mut t = 0u64;
    let mut cur = rows;
    for i in (0..powers.len() - 1).rev() {
        let next = &cur * &powers[i];
        if distance(&next) > epsilon {
            cur = next;
            t += 1 << i;
        }
    }
    Ok(t + 1)
}

fn row_distance(pi: &[f64]) -> impl Fn(&DMatrix<f64>) -> f64 + '_ {
    move |m: &DMatrix<f64>| {
        m.row_iter()
            .map(|r| {
                0.5 * r
                    .iter()
                    .zip(pi)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Worst-case mixing time `max_y min{t : d_y(t) ≤ ε}`.
///
/// Orbit-symmetric chains are lumped per Hamming level around the marked
/// state, so only `N + 1` small chains are powered; other chains are powered
/// as a whole up to 10 spins.
pub fn exact_mixing_time(p: &TransitionMatrix, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if epsilon >= 1.0 {
        return Ok(0);
    }
    if p.orbit_symmetric {
        if let Some(k) = p.stationary.marked() {
            return lumped_mixing_time(p, k, epsilon);
        }
    }
    if p.n_spins > 10 {
        return Err(Error::BudgetExceeded {
            what: "unreduced mixing time",
            n_spins: p.n_spins,
            limit: 10,
        });
    }
    let pi = p.stationary.probabilities();
    let n = p.dim();
    binary_lifted_time(&p.p, DMatrix::identity(n, n), row_distance(&pi), epsilon)
}

fn lumped_mixing_time(p: &TransitionMatrix, k: Config, epsilon: f64) -> Result<u64> {
    let n_spins = p.n_spins;
    let pi = p.stationary.probabilities();
    let entry = |a: usize, b: usize| p.p[(a ^ k.0, b ^ k.0)];
    let mut worst = 0;
    for w in 0..=n_spins {
        let lumped = lump_from_level(n_spins, w, entry, |z| pi[z ^ k.0]);
        let size = lumped.transition.nrows();
        let mut start = DMatrix::<f64>::zeros(1, size);
        start[(0, lumped.start_class)] = 1.0;
        let t = binary_lifted_time(
            &lumped.transition,
            start,
            row_distance(&lumped.stationary),
            epsilon,
        )?;
        worst = worst.max(t);
    }
    Ok(worst)
}
