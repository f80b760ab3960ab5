//! Proposal kernels `Q(x|y)`: the probability of suggesting `x` from the current state `y`.
//!
//! Columns are indexed by the source state. Four representations share one
//! interface: dense matrices, symmetry-compressed tables, column oracles
//! (one evolution per requested column) and affine combinations.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{dimension, Config, MAX_SPINS};
use crate::symmetry::{binomial, low_mask};

/// Entries above this (negative) floor are rounding noise and are clamped to zero.
pub const CLAMP_FLOOR: f64 = -1e-14;
/// Entries of an affine combination below this are a hard error.
pub const AFFINE_FLOOR: f64 = -1e-10;
/// Column-sum tolerance for a kernel to count as stochastic.
pub const STOCHASTIC_TOL: f64 = 1e-10;
/// Largest spin count for which a kernel is materialised as a dense matrix.
pub const DENSE_KERNEL_MAX_SPINS: usize = 14;

/// Dense kernel stored column by column: `cols[y * n + x] = Q(x|y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseKernel {
    n_spins: usize,
    cols: Vec<f64>,
}

impl DenseKernel {
    /// Builds a kernel from a column-major buffer, clamping rounding noise and
    /// rejecting anything that is not column-stochastic.
    pub fn new(n_spins: usize, cols: Vec<f64>) -> Result<Self> {
        let mut k = Self::new_unchecked(n_spins, cols)?;
        let n = k.dim();
        for y in 0..n {
            let col = &mut k.cols[y * n..(y + 1) * n];
            for v in col.iter_mut() {
                if *v < CLAMP_FLOOR {
                    return Err(Error::NegativeProbability { value: *v });
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "column {y} sums to {s}"
                )));
            }
        }
        Ok(k)
    }

    /// Wraps a buffer without checking stochasticity; use [`validate_kernel`] to audit it.
    pub fn new_unchecked(n_spins: usize, cols: Vec<f64>) -> Result<Self> {
        if n_spins == 0 || n_spins > DENSE_KERNEL_MAX_SPINS {
            return Err(Error::BudgetExceeded {
                what: "dense kernel",
                n_spins,
                limit: DENSE_KERNEL_MAX_SPINS,
            });
        }
        let n = dimension(n_spins);
        if cols.len() != n * n {
            return Err(Error::MismatchedDimensions {
                expected: n * n,
                found: cols.len(),
            });
        }
        Ok(Self { n_spins, cols })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        dimension(self.n_spins)
    }

    #[inline]
    pub fn prob(&self, x: Config, y: Config) -> f64 {
        self.cols[y.0 * self.dim() + x.0]
    }

    pub fn column(&self, y: Config) -> &[f64] {
        let n = self.dim();
        &self.cols[y.0 * n..(y.0 + 1) * n]
    }
}

/// Kernel invariant under permutations of the spin labels around a centre `c`.
///
/// `Q(x|y)` depends only on `|y⊕c|`, `|x⊕c|` and `|(x⊕c)∧(y⊕c)|`, so the whole
/// kernel fits in an `(N+1)^3` table. The uniform, single-flip, Grover and
/// transverse-field kernels all have this form with `c` the marked state.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel {
    n_spins: usize,
    center: Config,
    table: Vec<f64>,
}

impl SymmetricKernel {
    /// Tabulates `f(w_y, w_x, overlap)` over every reachable triple.
    pub fn from_fn(
        n_spins: usize,
        center: Config,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidParameter(format!(
                "spin count must be in 1..={MAX_SPINS}, got {n_spins}"
            )));
        }
        let center = Config::new(center.0, n_spins)?;
        let m = n_spins + 1;
        let mut table = vec![0.0; m * m * m];
        for wy in 0..=n_spins {
            for wx in 0..=n_spins {
                for ov in overlap_range(n_spins, wx, wy) {
                    table[(wy * m + wx) * m + ov] = f(wy, wx, ov);
                }
            }
        }
        Ok(Self {
            n_spins,
            center,
            table,
        })
    }

    /// Reads the table off one column per Hamming level: `columns[w]` must be
    /// the column of the representative `c ⊕ (2^w - 1)`. Fails when members of
    /// one orbit disagree by more than `tol`.
    pub fn from_level_columns(
        n_spins: usize,
        center: Config,
        columns: &[Vec<f64>],
        tol: f64,
    ) -> Result<Self> {
        if columns.len() != n_spins + 1 {
            return Err(Error::MismatchedDimensions {
                expected: n_spins + 1,
                found: columns.len(),
            });
        }
        let n = dimension(n_spins);
        let m = n_spins + 1;
        let mut table = vec![f64::NAN; m * m * m];
        for (wy, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::MismatchedDimensions {
                    expected: n,
                    found: col.len(),
                });
            }
            let mask = low_mask(wy);
            for (x, &v) in col.iter().enumerate() {
                let z = x ^ center.0;
                let wx = z.count_ones() as usize;
                let ov = (z & mask).count_ones() as usize;
                let slot = &mut table[(wy * m + wx) * m + ov];
                if slot.is_nan() {
                    *slot = v;
                } else if (*slot - v).abs() > tol {
                    return Err(Error::InvalidDistribution(format!(
                        "column of level {wy} is not invariant under spin permutations \
                         ({} vs {})",
                        *slot, v
                    )));
                }
            }
        }
        for v in table.iter_mut() {
            if v.is_nan() {
                *v = 0.0;
            }
        }
        Ok(Self {
            n_spins,
            center,
            table,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn center(&self) -> Config {
        self.center
    }

    pub fn dim(&self) -> usize {
        dimension(self.n_spins)
    }

    #[inline]
    fn idx(&self, wy: usize, wx: usize, ov: usize) -> usize {
        let m = self.n_spins + 1;
        (wy * m + wx) * m + ov
    }

    #[inline]
    pub fn entry(&self, wy: usize, wx: usize, ov: usize) -> f64 {
        self.table[self.idx(wy, wx, ov)]
    }

    #[inline]
    pub fn prob(&self, x: Config, y: Config) -> f64 {
        let zx = x.0 ^ self.center.0;
        let zy = y.0 ^ self.center.0;
        self.entry(
            zy.count_ones() as usize,
            zx.count_ones() as usize,
            (zx & zy).count_ones() as usize,
        )
    }

    pub fn column(&self, y: Config) -> Vec<f64> {
        (0..self.dim()).map(|x| self.prob(Config(x), y)).collect()
    }

    fn combine(weights: &[f64], parts: &[&SymmetricKernel]) -> Self {
        let first = parts[0];
        let mut table = vec![0.0; first.table.len()];
        for (w, k) in weights.iter().zip(parts) {
            for (t, v) in table.iter_mut().zip(&k.table) {
                *t += w * v;
            }
        }
        Self {
            n_spins: first.n_spins,
            center: first.center,
            table,
        }
    }

    fn min_entry(&self) -> f64 {
        let n = self.n_spins;
        let mut min = f64::INFINITY;
        for wy in 0..=n {
            for wx in 0..=n {
                for ov in overlap_range(n, wx, wy) {
                    min = min.min(self.entry(wy, wx, ov));
                }
            }
        }
        min
    }

    /// Certificate computed on the table with orbit multiplicities, without densifying.
    fn certificate(&self) -> KernelCertificate {
        let n = self.n_spins;
        let mut col_dev: f64 = 0.0;
        let mut row_dev: f64 = 0.0;
        let mut asym: f64 = 0.0;
        for wy in 0..=n {
            let mut col_sum = 0.0;
            let mut row_sum = 0.0;
            for wx in 0..=n {
                for ov in overlap_range(n, wx, wy) {
                    let count = binomial(wy, ov) * binomial(n - wy, wx - ov);
                    col_sum += count * self.entry(wy, wx, ov);
                    // Row of a level-wy state: sum over sources of level wx.
                    row_sum += count * self.entry(wx, wy, ov);
                    asym = asym.max((self.entry(wy, wx, ov) - self.entry(wx, wy, ov)).abs());
                }
            }
            col_dev = col_dev.max((col_sum - 1.0).abs());
            row_dev = row_dev.max((row_sum - 1.0).abs());
        }
        KernelCertificate {
            max_column_deviation: col_dev,
            max_row_deviation: row_dev,
            max_asymmetry: asym,
        }
    }
}

/// Overlaps `|a∧b|` attainable by strings of weights `wx`, `wy` on `n` bits.
pub(crate) fn overlap_range(n: usize, wx: usize, wy: usize) -> std::ops::RangeInclusive<usize> {
    (wx + wy).saturating_sub(n)..=wx.min(wy)
}

type ColumnFn = dyn Fn(Config) -> Result<Vec<f64>> + Send + Sync;

/// A kernel known only through a procedure that produces one column at a time.
#[derive(Clone)]
pub struct ColumnOracle {
    n_spins: usize,
    f: Arc<ColumnFn>,
}

impl ColumnOracle {
    pub fn new(
        n_spins: usize,
        f: impl Fn(Config) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n_spins,
            f: Arc::new(f),
        }
    }

    pub fn column(&self, y: Config) -> Result<Vec<f64>> {
        let col = (self.f)(y)?;
        if col.len() != dimension(self.n_spins) {
            return Err(Error::MismatchedDimensions {
                expected: dimension(self.n_spins),
                found: col.len(),
            });
        }
        Ok(col)
    }
}

impl fmt::Debug for ColumnOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColumnOracle")
            .field("n_spins", &self.n_spins)
            .finish_non_exhaustive()
    }
}

/// Pointwise combination `Σ λ_i Q_i` with weights summing to one.
#[derive(Debug, Clone)]
pub struct AffineKernel {
    weights: Vec<f64>,
    kernels: Vec<ProposalKernel>,
}

impl AffineKernel {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kernels(&self) -> &[ProposalKernel] {
        &self.kernels
    }
}

#[derive(Debug, Clone)]
pub enum ProposalKernel {
    Dense(DenseKernel),
    Structured(SymmetricKernel),
    ColumnOracle(ColumnOracle),
    Affine(AffineKernel),
}

impl ProposalKernel {
    pub fn n_spins(&self) -> usize {
        match self {
            ProposalKernel::Dense(k) => k.n_spins,
            ProposalKernel::Structured(k) => k.n_spins,
            ProposalKernel::ColumnOracle(k) => k.n_spins,
            ProposalKernel::Affine(k) => k.kernels[0].n_spins(),
        }
    }

    pub fn dim(&self) -> usize {
        dimension(self.n_spins())
    }

    /// `Q(x|y)`. For a column oracle this runs a full column evaluation.
    pub fn prob(&self, x: Config, y: Config) -> Result<f64> {
        Ok(match self {
            ProposalKernel::Dense(k) => k.prob(x, y),
            ProposalKernel::Structured(k) => k.prob(x, y),
            ProposalKernel::ColumnOracle(k) => k.column(y)?[x.0],
            ProposalKernel::Affine(k) => {
                let mut s = 0.0;
                for (w, child) in k.weights.iter().zip(&k.kernels) {
                    s += w * child.prob(x, y)?;
                }
                s.max(0.0)
            }
        })
    }

    /// Column `Q(·|y)`.
    pub fn column(&self, y: Config) -> Result<Vec<f64>> {
        if y.0 >= self.dim() {
            return Err(Error::ConfigOutOfRange {
                index: y.0,
                n_spins: self.n_spins(),
            });
        }
        match self {
            ProposalKernel::Dense(k) => Ok(k.column(y).to_vec()),
            ProposalKernel::Structured(k) => Ok(k.column(y)),
            ProposalKernel::ColumnOracle(k) => k.column(y),
            ProposalKernel::Affine(k) => {
                let mut acc = vec![0.0; self.dim()];
                for (w, child) in k.weights.iter().zip(&k.kernels) {
                    for (a, v) in acc.iter_mut().zip(child.column(y)?) {
                        *a += w * v;
                    }
                }
                for a in acc.iter_mut() {
                    *a = a.max(0.0);
                }
                Ok(acc)
            }
        }
    }

    pub fn to_dense(&self) -> Result<DenseKernel> {
        if let ProposalKernel::Dense(k) = self {
            return Ok(k.clone());
        }
        let n_spins = self.n_spins();
        if n_spins > DENSE_KERNEL_MAX_SPINS {
            return Err(Error::BudgetExceeded {
                what: "dense kernel",
                n_spins,
                limit: DENSE_KERNEL_MAX_SPINS,
            });
        }
        let n = self.dim();
        let mut cols = Vec::with_capacity(n * n);
        for y in 0..n {
            cols.extend(self.column(Config(y))?);
        }
        DenseKernel::new_unchecked(n_spins, cols)
    }

    /// The symmetry-compressed form, when this kernel has one.
    pub fn as_structured(&self) -> Option<&SymmetricKernel> {
        match self {
            ProposalKernel::Structured(k) => Some(k),
            _ => None,
        }
    }

    /// Draws `x ~ Q(·|y)`.
    pub fn sample<R: Rng + ?Sized>(&self, y: Config, rng: &mut R) -> Result<Config> {
        let col = self.column(y)?;
        Ok(Config(sample_index(&col, rng)))
    }
}

/// Inverse-CDF draw from an unnormalised nonnegative weight vector.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_nonzero = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_nonzero
}

/// Uniform proposal over all `2^N` states, the current one included.
pub fn uniform_kernel(n_spins: usize) -> Result<ProposalKernel> {
    let q = 1.0 / dimension(n_spins.min(MAX_SPINS)) as f64;
    SymmetricKernel::from_fn(n_spins, Config(0), |_, _, _| q).map(ProposalKernel::Structured)
}

/// Flip one uniformly chosen spin.
pub fn single_flip_kernel(n_spins: usize) -> Result<ProposalKernel> {
    let q = 1.0 / n_spins.max(1) as f64;
    SymmetricKernel::from_fn(n_spins, Config(0), |wy, wx, ov| {
        if wx + wy - 2 * ov == 1 {
            q
        } else {
            0.0
        }
    })
    .map(ProposalKernel::Structured)
}

/// Pointwise affine combination. Negative weights are allowed as long as the
/// result is still entrywise nonnegative.
pub fn affine_combination(weights: &[f64], kernels: &[ProposalKernel]) -> Result<ProposalKernel> {
    if weights.is_empty() || weights.len() != kernels.len() {
        return Err(Error::MismatchedDimensions {
            expected: kernels.len(),
            found: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "affine weights must sum to 1, got {total}"
        )));
    }
    let n_spins = kernels[0].n_spins();
    for k in kernels {
        if k.n_spins() != n_spins {
            return Err(Error::MismatchedDimensions {
                expected: n_spins,
                found: k.n_spins(),
            });
        }
    }

    let structured: Option<Vec<&SymmetricKernel>> =
        kernels.iter().map(|k| k.as_structured()).collect();
    if let Some(parts) = structured {
        if parts.iter().all(|p| p.center == parts[0].center) {
            let combined = SymmetricKernel::combine(weights, &parts);
            let min = combined.min_entry();
            if min < AFFINE_FLOOR {
                return Err(Error::NegativeProbability { value: min });
            }
            return Ok(ProposalKernel::Structured(combined));
        }
    }

    let combined = ProposalKernel::Affine(AffineKernel {
        weights: weights.to_vec(),
        kernels: kernels.to_vec(),
    });
    // Scan every entry once; the clamping in `column` must not hide a real violation.
    let n = dimension(n_spins);
    for y in 0..n {
        let mut raw = vec![0.0; n];
        for (w, child) in weights.iter().zip(kernels) {
            for (a, v) in raw.iter_mut().zip(child.column(Config(y))?) {
                *a += w * v;
            }
        }
        if let Some(&min) = raw.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < AFFINE_FLOOR {
                return Err(Error::NegativeProbability { value: min });
            }
        }
    }
    Ok(combined)
}

/// Deviation maxima of a kernel from column/row stochasticity and symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelCertificate {
    pub max_column_deviation: f64,
    pub max_row_deviation: f64,
    pub max_asymmetry: f64,
}

impl KernelCertificate {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_asymmetry <= tol
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        self.max_column_deviation <= tol && self.max_row_deviation <= tol
    }
}

/// Reports how far a kernel is from being symmetric and doubly stochastic.
/// Violations are data, not errors; only evaluating the kernel can fail.
pub fn validate_kernel(k: &ProposalKernel) -> Result<KernelCertificate> {
    if let ProposalKernel::Structured(s) = k {
        return Ok(s.certificate());
    }
    let d = k.to_dense()?;
    let n = d.dim();
    let mut cert = KernelCertificate::default();
    let mut row_sums = vec![0.0; n];
    for y in 0..n {
        let col = d.column(Config(y));
        let s: f64 = col.iter().sum();
        cert.max_column_deviation = cert.max_column_deviation.max((s - 1.0).abs());
        for (x, &v) in col.iter().enumerate() {
            row_sums[x] += v;
            if x > y {
                let a = (v - d.prob(Config(y), Config(x))).abs();
                cert.max_asymmetry = cert.max_asymmetry.max(a);
            }
        }
    }
    cert.max_row_deviation = row_sums
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(cert)
}

/// `Q(x|y)` of the identity kernel, handy for `t = 0` checks.
pub fn identity_kernel(n_spins: usize) -> Result<ProposalKernel> {
    SymmetricKernel::from_fn(n_spins, Config(0), |wy, wx, ov| {
        if wx == wy && ov == wx {
            1.0
        } else {
            0.0
        }
    })
    .map(ProposalKernel::Structured)
}

/// Representative `c ⊕ (2^w - 1)` of Hamming level `w` around `c`.
pub fn level_representative(center: Config, w: usize) -> Config {
    Config(center.0 ^ low_mask(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_values() {
        let k = uniform_kernel(1).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(k.prob(Config(x), Config(y)).unwrap(), 0.5);
            }
        }
        let k = uniform_kernel(3).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                assert_eq!(k.prob(Config(x), Config(y)).unwrap(), 0.125);
            }
        }
        let cert = validate_kernel(&k).unwrap();
        assert_eq!(cert, KernelCertificate::default());
    }

    #[test]
    fn single_flip_values() {
        let k = single_flip_kernel(2).unwrap();
        let col = k.column(Config(0b00)).unwrap();
        assert_eq!(col, vec![0.0, 0.5, 0.5, 0.0]);
        let cert = validate_kernel(&single_flip_kernel(5).unwrap()).unwrap();
        assert!(cert.max_column_deviation < 1e-15);
        let k = single_flip_kernel(4).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                assert_eq!(
                    k.prob(Config(x), Config(y)).unwrap(),
                    k.prob(Config(y), Config(x)).unwrap()
                );
                let expected = if Config(x).hamming(Config(y)) == 1 { 0.25 } else { 0.0 };
                assert_eq!(k.prob(Config(x), Config(y)).unwrap(), expected);
            }
        }
    }

    #[test]
    fn structured_certificate_matches_dense_certificate() {
        // A deliberately lopsided table: asymmetric and not stochastic.
        let s = SymmetricKernel::from_fn(3, Config(5), |wy, wx, ov| {
            0.1 + 0.03 * wy as f64 + 0.01 * wx as f64 + 0.002 * ov as f64
        })
        .unwrap();
        let structured = ProposalKernel::Structured(s.clone());
        let dense = ProposalKernel::Dense(structured.to_dense().unwrap());
        let a = validate_kernel(&structured).unwrap();
        let b = validate_kernel(&dense).unwrap();
        assert_relative_eq!(a.max_column_deviation, b.max_column_deviation, epsilon = 1e-14);
        assert_relative_eq!(a.max_row_deviation, b.max_row_deviation, epsilon = 1e-14);
        assert_relative_eq!(a.max_asymmetry, b.max_asymmetry, epsilon = 1e-14);
        assert!(a.max_asymmetry > 0.0);
    }

    #[test]
    fn identity_combination_is_unchanged() {
        let k = single_flip_kernel(3).unwrap();
        let c = affine_combination(&[1.0], std::slice::from_ref(&k)).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                assert_eq!(
                    c.prob(Config(x), Config(y)).unwrap(),
                    k.prob(Config(x), Config(y)).unwrap()
                );
            }
        }
    }

    #[test]
    fn convex_combination_stays_doubly_stochastic() {
        let a = uniform_kernel(3).unwrap();
        let b = single_flip_kernel(3).unwrap();
        let c = affine_combination(&[0.5, 0.5], &[a, b]).unwrap();
        let cert = validate_kernel(&c).unwrap();
        assert!(cert.is_doubly_stochastic(1e-12));
        assert!(cert.is_symmetric(1e-15));
    }

    #[test]
    fn negative_combination_rejected() {
        let a = uniform_kernel(2).unwrap();
        let b = single_flip_kernel(2).unwrap();
        // Single-flip neighbours get 3/4 - 1 < 0.
        let err = affine_combination(&[3.0, -2.0], &[a, b]).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { .. }));
    }

    #[test]
    fn mismatched_kernels_rejected() {
        let a = uniform_kernel(2).unwrap();
        let b = uniform_kernel(3).unwrap();
        assert!(matches!(
            affine_combination(&[0.5, 0.5], &[a.clone(), b]),
            Err(Error::MismatchedDimensions { .. })
        ));
        assert!(affine_combination(&[0.5, 0.6], &[a.clone(), a]).is_err());
    }

    #[test]
    fn generic_affine_path_with_dense_children() {
        let a = ProposalKernel::Dense(uniform_kernel(2).unwrap().to_dense().unwrap());
        let b = ProposalKernel::Dense(single_flip_kernel(2).unwrap().to_dense().unwrap());
        let c = affine_combination(&[0.25, 0.75], &[a.clone(), b.clone()]).unwrap();
        assert!(matches!(c, ProposalKernel::Affine(_)));
        assert_relative_eq!(c.prob(Config(1), Config(0)).unwrap(), 0.25 * 0.25 + 0.75 * 0.5);
        let err = affine_combination(&[3.0, -2.0], &[a, b]).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { .. }));
    }

    #[test]
    fn hand_built_violation_reported() {
        let k = DenseKernel::new_unchecked(1, vec![0.7, 0.2, 0.5, 0.5]).unwrap();
        let cert = validate_kernel(&ProposalKernel::Dense(k)).unwrap();
        assert_relative_eq!(cert.max_column_deviation, 0.1, epsilon = 1e-15);
        assert_relative_eq!(cert.max_asymmetry, 0.3, epsilon = 1e-15);
        assert!(DenseKernel::new(1, vec![0.7, 0.2, 0.5, 0.5]).is_err());
    }

    #[test]
    fn dense_constructor_clamps_noise() {
        let k = DenseKernel::new(1, vec![1.0 + 1e-15, -1e-15, 0.5, 0.5]).unwrap();
        assert_eq!(k.prob(Config(1), Config(0)), 0.0);
        assert!(DenseKernel::new(1, vec![1.1, -0.1, 0.5, 0.5]).is_err());
    }

    #[test]
    fn level_columns_round_trip() {
        let k = single_flip_kernel(4).unwrap();
        let center = Config(0b1010);
        let cols: Vec<Vec<f64>> = (0..=4)
            .map(|w| k.column(level_representative(center, w)).unwrap())
            .collect();
        let s = SymmetricKernel::from_level_columns(4, center, &cols, 1e-12).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                assert_eq!(s.prob(Config(x), Config(y)), k.prob(Config(x), Config(y)).unwrap());
            }
        }
        // A column that breaks the permutation symmetry is refused.
        let mut bad = cols.clone();
        bad[1][3] += 0.1;
        assert!(SymmetricKernel::from_level_columns(4, center, &bad, 1e-12).is_err());
    }

    #[test]
    fn sampling_follows_column() {
        let k = single_flip_kernel(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = k.sample(Config(5), &mut rng).unwrap();
            assert_eq!(x.hamming(Config(5)), 1);
        }
    }

    #[test]
    fn column_oracle_kernel() {
        let base = single_flip_kernel(3).unwrap();
        let oracle = ProposalKernel::ColumnOracle(ColumnOracle::new(3, move |y| base.column(y)));
        let cert = validate_kernel(&oracle).unwrap();
        assert!(cert.is_doubly_stochastic(1e-15) && cert.is_symmetric(0.0));
        assert_eq!(oracle.prob(Config(1), Config(0)).unwrap(), 1.0 / 3.0);
    }
}
