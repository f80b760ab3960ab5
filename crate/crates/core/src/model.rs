//! Classical spin configurations, the marked-state Hamiltonian and its Gibbs measure.
//!
//! A configuration of `N` spins is stored as an index in `[0, 2^N)`; bit `i`
//! clear means `x_i = +1`. Every probability is kept as a log-weight and only
//! exponentiated on demand, because `e^{βαN}` overflows long before the
//! parameter ranges of interest run out (β = 5, N = 20 already gives e^100).

use crate::error::{Error, Result};

/// Largest spin count whose configuration space we are willing to enumerate.
pub const MAX_SPINS: usize = 30;

/// A classical spin configuration, `index < 2^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Config(pub usize);

impl Config {
    pub fn new(index: usize, n_spins: usize) -> Result<Self> {
        if n_spins > MAX_SPINS || index >= 1usize << n_spins {
            return Err(Error::ConfigOutOfRange { index, n_spins });
        }
        Ok(Config(index))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    /// Spin value `x_i = ±1`.
    #[inline]
    pub fn spin(self, i: usize) -> i8 {
        if self.0 >> i & 1 == 0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn hamming(self, other: Config) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

/// Dimension `2^N` of the configuration space.
pub fn dimension(n_spins: usize) -> usize {
    1usize << n_spins
}

/// `H_c = -αN |k⟩⟨k|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedStateHamiltonian {
    n_spins: usize,
    alpha: f64,
    marked: Config,
}

impl MarkedStateHamiltonian {
    pub fn new(n_spins: usize, alpha: f64, marked: Config) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidParameter(format!(
                "spin count must be in 1..={MAX_SPINS}, got {n_spins}"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        let marked = Config::new(marked.0, n_spins)?;
        Ok(Self {
            n_spins,
            alpha,
            marked,
        })
    }

    /// Marked state at the all-up configuration.
    pub fn with_default_mark(n_spins: usize, alpha: f64) -> Result<Self> {
        Self::new(n_spins, alpha, Config(0))
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn marked(&self) -> Config {
        self.marked
    }

    pub fn dim(&self) -> usize {
        dimension(self.n_spins)
    }

    /// Depth `αN` of the energy well.
    pub fn well_depth(&self) -> f64 {
        self.alpha * self.n_spins as f64
    }

    pub fn energy(&self, x: Config) -> Result<f64> {
        Config::new(x.0, self.n_spins)?;
        Ok(self.energy_unchecked(x))
    }

    #[inline]
    pub(crate) fn energy_unchecked(&self, x: Config) -> f64 {
        if x == self.marked {
            -self.well_depth()
        } else {
            0.0
        }
    }
}

/// Free-function form of [`MarkedStateHamiltonian::energy`].
pub fn energy(h: &MarkedStateHamiltonian, x: Config) -> Result<f64> {
    h.energy(x)
}

/// An arbitrary diagonal Hamiltonian given by its energy vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    n_spins: usize,
    energies: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn new(n_spins: usize, energies: Vec<f64>) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidParameter(format!(
                "spin count must be in 1..={MAX_SPINS}, got {n_spins}"
            )));
        }
        if energies.len() != dimension(n_spins) {
            return Err(Error::MismatchedDimensions {
                expected: dimension(n_spins),
                found: energies.len(),
            });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("energies must be finite".into()));
        }
        Ok(Self { n_spins, energies })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

/// Numerically stable `log Σ exp(v_i)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Boltzmann distribution `π(x) = e^{-βH_c(x)} / Z`, stored in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMeasure {
    beta: f64,
    n_spins: usize,
    log_weights: Vec<f64>,
    log_partition: f64,
    marked: Option<Config>,
}

impl GibbsMeasure {
    fn from_log_weights(
        n_spins: usize,
        beta: f64,
        log_weights: Vec<f64>,
        marked: Option<Config>,
    ) -> Self {
        let log_partition = log_sum_exp(&log_weights);
        Self {
            beta,
            n_spins,
            log_weights,
            log_partition,
            marked,
        }
    }

    /// Gibbs measure of an arbitrary diagonal Hamiltonian.
    pub fn from_diagonal(h: &DiagonalHamiltonian, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let lw = h.energies.iter().map(|e| -beta * e).collect();
        Ok(Self::from_log_weights(h.n_spins, beta, lw, None))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.log_weights.len()
    }

    /// The marked configuration, when the measure came from a marked-state Hamiltonian.
    pub fn marked(&self) -> Option<Config> {
        self.marked
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    #[inline]
    pub fn log_prob(&self, x: Config) -> f64 {
        self.log_weights[x.0] - self.log_partition
    }

    #[inline]
    pub fn prob(&self, x: Config) -> f64 {
        self.log_prob(x).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights
            .iter()
            .map(|lw| (lw - self.log_partition).exp())
            .collect()
    }

    /// `log π(S)` for a set of configurations.
    pub fn log_measure_of(&self, set: &[Config]) -> f64 {
        let lw: Vec<f64> = set.iter().map(|&x| self.log_prob(x)).collect();
        log_sum_exp(&lw)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and nonnegative, got {beta}"
        )));
    }
    Ok(())
}

pub fn gibbs_measure(h: &MarkedStateHamiltonian, beta: f64) -> Result<GibbsMeasure> {
    check_beta(beta)?;
    let mut lw = vec![0.0; h.dim()];
    lw[h.marked.0] = beta * h.well_depth();
    // Closed form of the partition sum, log(e^{βαN} + 2^N - 1).
    let a = beta * h.well_depth();
    let b = ((h.dim() - 1) as f64).ln();
    let log_partition = if h.dim() == 1 {
        a
    } else {
        a.max(b) + (-(a - b).abs()).exp().ln_1p()
    };
    Ok(GibbsMeasure {
        beta,
        n_spins: h.n_spins,
        log_weights: lw,
        log_partition,
        marked: Some(h.marked),
    })
}

pub fn pi_min(m: &GibbsMeasure) -> f64 {
    let min_lw = m
        .log_weights
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (min_lw - m.log_partition).exp()
}

/// Temperature of the first-order transition of the marked model, `α / ln 2`.
pub fn critical_temperature(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(alpha / std::f64::consts::LN_2)
}
