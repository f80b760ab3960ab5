//! Equilibrium flows and the bottleneck upper bound on the spectral gap.
//!
//! For any cut `S`, `δ ≤ E(S, Sᶜ) / (π(S) π(Sᶜ))`, where `E` is the
//! stationary flow across the cut. The cut that isolates the marked state
//! needs only the proposal column of that state, which is what makes the
//! bound reachable at sizes where the chain itself cannot be stored.

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::model::{dimension, log_sum_exp, Config, MarkedStateHamiltonian};
use crate::proposal::{validate_kernel, ProposalKernel, DENSE_KERNEL_MAX_SPINS, STOCHASTIC_TOL};

/// Largest chain searched exhaustively over all cuts.
pub const EXHAUSTIVE_MAX_SPINS: usize = 4;
/// Entries of a marked column may dip this far below zero from rounding.
const COLUMN_FLOOR: f64 = -1e-14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetDescriptor {
    Explicit(Vec<Config>),
    AllButMarked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckReport {
    pub set_measure: f64,
    pub flow: f64,
    pub bound: f64,
    pub set: SetDescriptor,
}

/// Compensated (Neumaier) sum.
fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn normalise(set: &[Config], p: &TransitionMatrix) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut idx = set
        .iter()
        .map(|c| Config::new(c.0, p.n_spins()).map(|c| c.0))
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

fn log_flow(p: &TransitionMatrix, s1: &[usize], s2: &[usize]) -> f64 {
    let lw = p.stationary().log_weights();
    let lz = p.stationary().log_partition();
    let m = p.matrix();
    let terms: Vec<f64> = s1
        .iter()
        .flat_map(|&x| s2.iter().map(move |&y| (x, y)))
        .filter(|&(x, y)| m[(x, y)] > 0.0)
        .map(|(x, y)| lw[x] - lz + m[(x, y)].ln())
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + neumaier(terms.iter().map(|t| (t - top).exp())).ln()
}

/// `E(S₁, S₂) = Σ_{x∈S₁, y∈S₂} π(x) P(x, y)`.
pub fn flow(p: &TransitionMatrix, s1: &[Config], s2: &[Config]) -> Result<f64> {
    let a = normalise(s1, p)?;
    let b = normalise(s2, p)?;
    Ok(log_flow(p, &a, &b).exp())
}

fn complement(p: &TransitionMatrix, set: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; p.dim()];
    for &x in set {
        inside[x] = true;
    }
    (0..p.dim()).filter(|&x| !inside[x]).collect()
}

fn log_measure(p: &TransitionMatrix, set: &[usize]) -> f64 {
    let lw = p.stationary().log_weights();
    let v: Vec<f64> = set.iter().map(|&x| lw[x]).collect();
    log_sum_exp(&v) - p.stationary().log_partition()
}

fn bound_for(p: &TransitionMatrix, set: &[usize]) -> (f64, f64, f64) {
    let rest = complement(p, set);
    let ls = log_measure(p, set);
    let lc = log_measure(p, &rest);
    let lf = log_flow(p, set, &rest);
    (ls.exp(), lf.exp(), (lf - ls - lc).exp())
}

/// `E(S₁, S₁ᶜ) / (π(S₁) π(S₁ᶜ))`, requiring `π(S₁) ≤ 1/2`.
pub fn bottleneck_bound(p: &TransitionMatrix, s1: &[Config]) -> Result<BottleneckReport> {
    let set = normalise(s1, p)?;
    if set.len() == p.dim() {
        return Err(Error::MeasureTooLarge { measure: 1.0 });
    }
    let (measure, flow, bound) = bound_for(p, &set);
    if measure > 0.5 {
        return Err(Error::MeasureTooLarge { measure });
    }
    let all_but_marked = p
        .stationary()
        .marked()
        .is_some_and(|k| set.len() + 1 == p.dim() && !set.contains(&k.0));
    Ok(BottleneckReport {
        set_measure: measure,
        flow,
        bound,
        set: if all_but_marked {
            SetDescriptor::AllButMarked
        } else {
            SetDescriptor::Explicit(set.into_iter().map(Config).collect())
        },
    })
}

/// Smallest bound over every cut with `π(S₁) ≤ 1/2`, by enumeration.
pub fn min_bottleneck_exhaustive(p: &TransitionMatrix) -> Result<BottleneckReport> {
    let n_spins = p.n_spins();
    if n_spins > EXHAUSTIVE_MAX_SPINS {
        return Err(Error::BudgetExceeded {
            what: "exhaustive cut search",
            n_spins,
            limit: EXHAUSTIVE_MAX_SPINS,
        });
    }
    let n = p.dim();
    let mut best: Option<(f64, Vec<usize>, f64, f64)> = None;
    for mask in 1u64..(1u64 << n) - 1 {
        let set: Vec<usize> = (0..n).filter(|&x| mask >> x & 1 == 1).collect();
        let (measure, flow, bound) = bound_for(p, &set);
        if measure > 0.5 {
            continue;
        }
        if best.as_ref().is_none_or(|b| bound < b.0) {
            best = Some((bound, set, measure, flow));
        }
    }
    let (_, set, _, _) = best.ok_or(Error::EmptySet)?;
    let set: Vec<Config> = set.into_iter().map(Config).collect();
    bottleneck_bound(p, &set)
}

fn check_column(col: &[f64], n_spins: usize) -> Result<()> {
    if col.len() != dimension(n_spins) {
        return Err(Error::MismatchedDimensions {
            expected: dimension(n_spins),
            found: col.len(),
        });
    }
    if let Some(v) = col.iter().find(|v| !(**v >= COLUMN_FLOOR)) {
        return Err(Error::InvalidDistribution(format!("entry {v} is negative")));
    }
    let total = neumaier(col.iter().copied());
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidDistribution(format!("column sums to {total}")));
    }
    Ok(())
}

/// Bound for the cut isolating the marked state, from the proposal column
/// `Q(·|k)` of a symmetric kernel:
/// `(Σ_{x≠k} Q(x|k)) (1 + e^{-Nβα}(2^N - 1)) / (2^N - 1)`.
///
/// Every move into `k` is downhill and so always accepted. The escape mass is
/// summed directly rather than formed as `1 - Q(k|k)`, which would lose all
/// precision once it drops below machine epsilon.
pub fn marked_state_bound(
    q_col_k: &[f64],
    marked: Config,
    n_spins: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    check_column(q_col_k, n_spins)?;
    let marked = Config::new(marked.0, n_spins)?;
    let escape = neumaier(
        q_col_k
            .iter()
            .enumerate()
            .filter(|&(x, _)| x != marked.0)
            .map(|(_, &v)| v.max(0.0)),
    );
    let unmarked = dimension(n_spins) as f64 - 1.0;
    let weight = 1.0 + (-(n_spins as f64) * beta * alpha).exp() * unmarked;
    Ok(escape * weight / unmarked)
}

/// [`marked_state_bound`] for a whole kernel. The downhill shortcut is used
/// only when the kernel is certified symmetric; otherwise the flow into the
/// marked state is summed with the full acceptance rule, Hastings ratio
/// included.
pub fn marked_state_bound_checked(kernel: &ProposalKernel, h_c: &MarkedStateHamiltonian, beta: f64) -> Result<f64> {
    let n_spins = h_c.n_spins();
    if kernel.n_spins() != n_spins {
        return Err(Error::MismatchedDimensions {
            expected: h_c.dim(),
            found: kernel.dim(),
        });
    }
    let k = h_c.marked();
    let symmetric = match kernel {
        ProposalKernel::Structured(_) => true,
        _ if n_spins <= DENSE_KERNEL_MAX_SPINS => validate_kernel(kernel)?.max_asymmetry <= 1e-9,
        _ => false,
    };
    if symmetric {
        return marked_state_bound(&kernel.column(k)?, k, n_spins, h_c.alpha(), beta);
    }
    if n_spins > DENSE_KERNEL_MAX_SPINS {
        return Err(Error::BudgetExceeded {
            what: "asymmetric marked-state bound",
            n_spins,
            limit: DENSE_KERNEL_MAX_SPINS,
        });
    }
    // E(U, {k}) / (π(U) π(k)) with π(x) / π(k) = e^{-Nβα} for x ≠ k.
    let dense = kernel.to_dense()?;
    let depth = beta * h_c.well_depth();
    let into_k = (0..h_c.dim()).filter(|&x| x != k.0).map(|x| {
        let fwd = dense.prob(k, Config(x));
        let back = dense.prob(Config(x), k);
        if fwd == 0.0 {
            return 0.0;
        }
        let log_ratio = depth + (back / fwd).ln();
        fwd * log_ratio.min(0.0).exp()
    });
    let flow_per_unmarked = neumaier(into_k);
    let unmarked = dimension(n_spins) as f64 - 1.0;
    let weight = 1.0 + (-depth).exp() * unmarked;
    Ok(flow_per_unmarked * weight / unmarked)
}

/// `Σ_{x≠k} Q(k|x) A(k|x)`: at most one for any doubly stochastic kernel.
/// Moves into the marked state are downhill, so `A = 1`.
pub fn sum_qa_certificate(kernel: &ProposalKernel, marked: Config) -> Result<f64> {
    let marked = Config::new(marked.0, kernel.n_spins())?;
    let row: Vec<f64> = match kernel {
        // Oracles only expose columns; the quantum kernels behind them are symmetric.
        ProposalKernel::ColumnOracle(o) => o.column(marked)?,
        _ => (0..kernel.dim())
            .map(|x| kernel.prob(marked, Config(x)))
            .collect::<Result<_>>()?,
    };
    Ok(neumaier(
        row.into_iter()
            .enumerate()
            .filter(|&(x, _)| x != marked.0)
            .map(|(_, v)| v),
    ))
}
