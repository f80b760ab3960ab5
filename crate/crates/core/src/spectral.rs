//! Spectral gaps, their closed forms for the marked-state model, and
//! mixing-time bounds.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::model::{dimension, pi_min, MarkedStateHamiltonian};
use crate::proposal::{affine_combination, ProposalKernel};
use crate::quantum::{MixerKind, MixerSpec, Propagator, PropagatorConfig, QuantumHamiltonian};
use crate::symmetry::reduced_blocks;

/// Spin count above which only the symmetry-reduced eigensolve is attempted.
pub const FULL_EIGEN_MAX_SPINS: usize = 12;
/// `Auto` uses the full eigensolve up to this size.
pub const AUTO_FULL_MAX_SPINS: usize = 10;
/// Detailed-balance tolerance required before the chain is symmetrised.
pub const REVERSIBILITY_TOL: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GapMethod {
    /// Eigenvalues of the full symmetrised matrix.
    Full,
    /// Eigenvalues of the spin-permutation blocks.
    Reduced,
}

impl GapMethod {
    pub fn tag(self) -> &'static str {
        match self {
            GapMethod::Full => "dense_eigen",
            GapMethod::Reduced => "reduced_eigen",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapRoute {
    #[default]
    Auto,
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralReport {
    /// `1 - |λ₂|`.
    pub delta: f64,
    pub lambda2_abs: f64,
    pub method: GapMethod,
    pub epsilon: f64,
    pub mixing_lower: f64,
    pub mixing_upper: f64,
}

/// Gap of a reversible chain with the default route and `ε = 0.01`.
pub fn spectral_gap_dense(p: &TransitionMatrix) -> Result<SpectralReport> {
    spectral_gap(p, GapRoute::Auto, DEFAULT_EPSILON)
}

/// `δ = 1 - |λ₂|` of `P`, computed from `L = I - S` where `S` is the
/// symmetrisation `Π^{1/2} P Π^{-1/2}`. Working with `L` keeps small gaps
/// accurate: its diagonal is the escape mass, not `1 - P(y,y)`.
pub fn spectral_gap(p: &TransitionMatrix, route: GapRoute, epsilon: f64) -> Result<SpectralReport> {
    p.check_reversible(REVERSIBILITY_TOL)?;
    let n_spins = p.n_spins();
    let marked = p.stationary().marked();
    let reducible = p.is_orbit_symmetric() && marked.is_some();
    let method = match route {
        GapRoute::Full => GapMethod::Full,
        GapRoute::Reduced if reducible => GapMethod::Reduced,
        GapRoute::Reduced => {
            return Err(Error::InvalidParameter(
                "chain is not symmetric under spin relabelling".into(),
            ))
        }
        GapRoute::Auto if n_spins <= AUTO_FULL_MAX_SPINS => GapMethod::Full,
        GapRoute::Auto if reducible => GapMethod::Reduced,
        GapRoute::Auto => GapMethod::Full,
    };
    let mut nu = match method {
        GapMethod::Full => {
            if n_spins > FULL_EIGEN_MAX_SPINS {
                return Err(Error::BudgetExceeded {
                    what: "full eigensolve",
                    n_spins,
                    limit: FULL_EIGEN_MAX_SPINS,
                });
            }
            let n = p.dim();
            let l = DMatrix::from_fn(n, n, |y, x| p.laplacian(y, x));
            l.symmetric_eigenvalues().iter().copied().collect::<Vec<_>>()
        }
        GapMethod::Reduced => {
            let k = marked.expect("checked above").0;
            reduced_blocks(n_spins, |a, b| p.laplacian(a ^ k, b ^ k))
                .into_iter()
                .flat_map(|b| b.matrix.symmetric_eigenvalues().iter().copied().collect::<Vec<_>>())
                .collect()
        }
    };
    if nu.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite eigenvalue".into()));
    }
    let delta = gap_from_laplacian(&mut nu);
    let (mixing_lower, mixing_upper) = if delta > 0.0 {
        mixing_time_bounds(delta, pi_min(p.stationary()), epsilon)?
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(SpectralReport {
        delta,
        lambda2_abs: 1.0 - delta,
        method,
        epsilon,
        mixing_lower,
        mixing_upper,
    })
}

/// Eigenvalues `ν` of `I - S` to `1 - |λ₂|`: drop the stationary `ν ≈ 0`,
/// then `|λ| = |1 - ν|` is largest at either end of what remains.
fn gap_from_laplacian(nu: &mut Vec<f64>) -> f64 {
    nu.sort_by(f64::total_cmp);
    let zero = nu
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if nu.len() < 2 {
        return 1.0;
    }
    nu.remove(zero);
    let lo = nu[0];
    let hi = nu[nu.len() - 1];
    lo.min(2.0 - hi).clamp(0.0, 1.0)
}

/// Gap of the uniform-proposal chain, `2^{-N}(1 + (2^N - 1)e^{-Nβα})`.
///
/// The radicand of the usual square-root form is a perfect square; this is
/// its root, which needs no log-space care.
pub fn uniform_gap_closed_form(n_spins: usize, alpha: f64, beta: f64) -> f64 {
    let inv_dim = (-(n_spins as f64)).exp2();
    inv_dim + (1.0 - inv_dim) * (-(n_spins as f64) * beta * alpha).exp()
}

/// `Q(k|x)` for the Grover mixer, with the `γ → 0` limit taken smoothly.
pub fn grover_marked_transfer(n_spins: usize, alpha: f64, h: f64, t: f64) -> f64 {
    let n = n_spins as f64;
    let gamma_sq = crate::quantum::gamma_squared(n_spins, alpha, h).max(0.0);
    let gamma = gamma_sq.sqrt();
    let x = gamma * t;
    let sin_over_gamma = if x.abs() < 1e-6 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / gamma
    };
    (n * h * sin_over_gamma * (-n).exp2()).powi(2)
}

/// Gap of the Grover-mixer chain, `Q(k|x)·(1 + e^{-Nβα}(2^N - 1))`.
pub fn grover_gap_closed_form(n_spins: usize, alpha: f64, beta: f64, h: f64, t: f64) -> f64 {
    let q = grover_marked_transfer(n_spins, alpha, h, t);
    let unmarked = dimension(n_spins) as f64 - 1.0;
    q * (1.0 + (-(n_spins as f64) * beta * alpha).exp() * unmarked)
}

/// Symmetrised Grover chain on `span{|k⟩, uniform unmarked}`: diagonal
/// `a`, `c` and off-diagonal `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelReduction {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `√((a - c)² + 4b²)`, the distance between the two eigenvalues.
    pub delta: f64,
}

pub fn two_level_reduction(
    n_spins: usize,
    alpha: f64,
    beta: f64,
    h: f64,
    t: f64,
) -> TwoLevelReduction {
    let q = grover_marked_transfer(n_spins, alpha, h, t);
    let m = dimension(n_spins) as f64 - 1.0;
    let e = (-(n_spins as f64) * beta * alpha).exp();
    let a = 1.0 - m * q * e;
    let c = 1.0 - q;
    let b = m.sqrt() * q * e.sqrt();
    // a - c formed directly so that it does not cancel when both are near 1.
    let diff = q * (1.0 - m * e);
    TwoLevelReduction {
        a,
        b,
        c,
        delta: (diff * diff + 4.0 * b * b).sqrt(),
    }
}

/// `((1/δ - 1) ln(1/2ε), (1/δ) ln(1/(ε π_min)))`.
pub fn mixing_time_bounds(delta: f64, pi_min: f64, epsilon: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("gap must lie in (0, 1], got {delta}")));
    }
    if !(pi_min > 0.0 && pi_min <= 1.0) {
        return Err(Error::InvalidParameter(format!("pi_min must lie in (0, 1], got {pi_min}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let lower = (1.0 / delta - 1.0) * (1.0 / (2.0 * epsilon)).ln();
    let upper = (1.0 / delta) * (1.0 / (epsilon * pi_min)).ln();
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Evenly spaced points including both ends; a single point sits at the
    /// midpoint. When both `h` and `t` vary the grid is their product, and a
    /// fixed parameter contributes one point.
    Grid,
    /// Independent uniform draws.
    MonteCarlo { seed: u64 },
}

/// Which `(h, t)` pairs a time-averaged proposal mixes over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingScheme {
    pub t_range: (f64, f64),
    pub h_range: (f64, f64),
    pub sample_count: usize,
    pub mode: SamplingMode,
}

impl AveragingScheme {
    pub fn fixed(h: f64, t: f64) -> Self {
        Self {
            t_range: (t, t),
            h_range: (h, h),
            sample_count: 1,
            mode: SamplingMode::Grid,
        }
    }

    pub fn time_grid(h: f64, t_min: f64, t_max: f64, sample_count: usize) -> Self {
        Self {
            t_range: (t_min, t_max),
            h_range: (h, h),
            sample_count,
            mode: SamplingMode::Grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ok(self.t_range) || !ok(self.h_range) || self.sample_count == 0 {
            return Err(Error::InvalidParameter(format!("invalid averaging scheme {self:?}")));
        }
        Ok(())
    }

    /// The `(h, t)` pairs, in a fixed order. A scheme with no varying
    /// parameter yields exactly one pair.
    pub fn samples(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let n = self.sample_count;
        let varies = |(lo, hi): (f64, f64)| hi > lo;
        Ok(match self.mode {
            SamplingMode::Grid => {
                let hs = match varies(self.h_range) {
                    true => linspace(self.h_range, n),
                    false => vec![self.h_range.0],
                };
                let ts = match varies(self.t_range) {
                    true => linspace(self.t_range, n),
                    false => vec![self.t_range.0],
                };
                hs.iter()
                    .flat_map(|&h| ts.iter().map(move |&t| (h, t)))
                    .collect()
            }
            SamplingMode::MonteCarlo { .. }
                if !varies(self.h_range) && !varies(self.t_range) =>
            {
                vec![(self.h_range.0, self.t_range.0)]
            }
            SamplingMode::MonteCarlo { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = |(lo, hi): (f64, f64)| {
                    if hi > lo {
                        rng.random_range(lo..hi)
                    } else {
                        lo
                    }
                };
                (0..n)
                    .map(|_| {
                        let h = draw(self.h_range);
                        (h, draw(self.t_range))
                    })
                    .collect()
            }
        })
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Equal-weight mixture of the quantum kernels over the scheme's samples.
pub fn time_averaged_kernel(
    h_c: &MarkedStateHamiltonian,
    mixer: MixerKind,
    scheme: &AveragingScheme,
    cfg: &PropagatorConfig,
) -> Result<ProposalKernel> {
    let samples = scheme.samples()?;
    // Samples sharing a field share one propagator, so a dense
    // diagonalisation happens once per field rather than once per time.
    let mut kernels = Vec::with_capacity(samples.len());
    let mut prop: Option<Propagator> = None;
    for &(h, t) in &samples {
        let next = match prop.take() {
            Some(p) if p.hamiltonian().mixer.field == h => p.retimed(t)?,
            _ => {
                let ham = QuantumHamiltonian::new(*h_c, MixerSpec { kind: mixer, field: h });
                Propagator::new(ham, t, cfg)?
            }
        };
        kernels.push(ProposalKernel::Structured(next.structured_kernel()?));
        prop = Some(next);
    }
    if kernels.len() == 1 {
        return Ok(kernels.into_iter().next().unwrap());
    }
    let w = 1.0 / kernels.len() as f64;
    affine_combination(&vec![w; kernels.len()], &kernels)
}

/// Mean of the Grover closed-form gap over the scheme's samples. Because the
/// gap is linear in `Q(k|x)`, this is also the gap of the averaged kernel
/// whenever the marked mode sets it.
pub fn averaged_grover_gap_closed_form(
    n_spins: usize,
    alpha: f64,
    beta: f64,
    scheme: &AveragingScheme,
) -> Result<f64> {
    let samples = scheme.samples()?;
    let total: f64 = samples
        .iter()
        .map(|&(h, t)| grover_gap_closed_form(n_spins, alpha, beta, h, t))
        .sum();
    Ok(total / samples.len() as f64)
}

/// Least-squares slope of `log₂ δ` against `N`.
pub fn scaling_fit(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(_, d)) = points.iter().find(|(_, d)| !(*d > 0.0)) {
        return Err(Error::NonPositiveGap(d));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, d)| d.log2()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("scaling fit needs distinct N".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::build_transition_matrix;
    use crate::model::{gibbs_measure, Config};
    use crate::proposal::{single_flip_kernel, uniform_kernel};
    use crate::quantum::{grover_closed_form, quantum_kernel_structured};
    use approx::assert_relative_eq;

    fn chain(kernel: &ProposalKernel, n: usize, alpha: f64, beta: f64, k: usize) -> TransitionMatrix {
        let hc = MarkedStateHamiltonian::new(n, alpha, Config(k)).unwrap();
        build_transition_matrix(kernel, &gibbs_measure(&hc, beta).unwrap()).unwrap()
    }

    /// Independent oracle: eigenvalues of the unsymmetrised `P`.
    fn gap_from_p(p: &TransitionMatrix) -> f64 {
        let mut mags: Vec<f64> = p
            .matrix()
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        1.0 - mags[1]
    }

    #[test]
    fn uniform_closed_form_limits() {
        assert_eq!(uniform_gap_closed_form(7, 1.0, 0.0), 1.0);
        assert_relative_eq!(uniform_gap_closed_form(7, 1.0, 1e3), 1.0 / 128.0);
        // The square-root form, evaluated naively where it is safe.
        let (n, a, b) = (5usize, 0.8, 0.3);
        let m = 31.0;
        let e = (-(n as f64) * b * a).exp();
        let root = (e * e * m * m + 2.0 * e * m + 1.0).sqrt() / 32.0;
        assert_relative_eq!(uniform_gap_closed_form(n, a, b), root, max_relative = 1e-15);
    }

    #[test]
    fn infinite_temperature_uniform_gap_is_one() {
        let p = chain(&uniform_kernel(4).unwrap(), 4, 1.0, 0.0, 0);
        assert_relative_eq!(spectral_gap_dense(&p).unwrap().delta, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_gap_matches_closed_form() {
        let p = chain(&uniform_kernel(6).unwrap(), 6, 1.0, 5.0, 3);
        let r = spectral_gap_dense(&p).unwrap();
        let exact = uniform_gap_closed_form(6, 1.0, 5.0);
        assert!((r.delta - exact).abs() / exact < 1e-10, "{} vs {exact}", r.delta);
    }

    #[test]
    fn grover_gap_matches_closed_form() {
        let g = grover_closed_form(8, 1.0, 1.0, 1.0).unwrap();
        let p = chain(&ProposalKernel::Structured(g.to_kernel(Config(0)).unwrap()), 8, 1.0, 5.0, 0);
        let r = spectral_gap_dense(&p).unwrap();
        let exact = grover_gap_closed_form(8, 1.0, 5.0, 1.0, 1.0);
        assert!((r.delta - exact).abs() / exact < 1e-9, "{} vs {exact}", r.delta);
    }

    #[test]
    fn symmetrised_and_raw_spectra_agree() {
        for (kernel, beta) in [(uniform_kernel(5).unwrap(), 1.0), (single_flip_kernel(6).unwrap(), 0.7)] {
            let n = kernel.n_spins();
            let p = chain(&kernel, n, 1.0, beta, 2);
            let d = spectral_gap(&p, GapRoute::Full, 0.01).unwrap().delta;
            assert_relative_eq!(d, gap_from_p(&p), epsilon = 1e-10);
        }
    }

    #[test]
    fn reduced_route_matches_full_route() {
        let g = grover_closed_form(7, 0.9, -1.3, 2.2).unwrap();
        let kernels = [
            uniform_kernel(7).unwrap(),
            single_flip_kernel(7).unwrap(),
            ProposalKernel::Structured(g.to_kernel(Config(77)).unwrap()),
        ];
        for k in &kernels {
            let p = chain(k, 7, 0.9, 2.0, 77);
            let full = spectral_gap(&p, GapRoute::Full, 0.01).unwrap();
            let red = spectral_gap(&p, GapRoute::Reduced, 0.01).unwrap();
            assert_eq!(red.method, GapMethod::Reduced);
            assert_relative_eq!(full.delta, red.delta, max_relative = 1e-10);
        }
    }

    #[test]
    fn negative_eigenvalues_count() {
        // Single flips at infinite temperature: the chain on the hypercube has
        // eigenvalue -1 (parity), so the gap is zero.
        let p = chain(&single_flip_kernel(4).unwrap(), 4, 1.0, 0.0, 0);
        assert_relative_eq!(spectral_gap_dense(&p).unwrap().delta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_level_identity() {
        let r = two_level_reduction(6, 1.0, 2.0, 1.0, 0.7);
        assert_relative_eq!(r.delta, grover_gap_closed_form(6, 1.0, 2.0, 1.0, 0.7), max_relative = 1e-12);
        let cold = two_level_reduction(6, 1.0, 200.0, 1.0, 0.7);
        assert_relative_eq!(cold.delta, grover_marked_transfer(6, 1.0, 1.0, 0.7), max_relative = 1e-12);
        assert_eq!(two_level_reduction(6, 1.0, 2.0, 1.0, 0.0).delta, 0.0);
        // Eigenvalues of the 2×2 are 1 and 1 - δ.
        let m = nalgebra::Matrix2::new(r.a, r.b, r.b, r.c);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_relative_eq!(ev[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(1.0 - ev[0], r.delta, epsilon = 1e-14);
    }

    #[test]
    fn small_angle_branch_is_continuous() {
        let g = crate::quantum::gamma_squared(6, 1.0, 1.0).sqrt();
        let ratio = |t: f64| grover_marked_transfer(6, 1.0, 1.0, t) / (t * t);
        let (below, above) = (ratio(0.999e-6 / g), ratio(1.001e-6 / g));
        assert_relative_eq!(below, above, max_relative = 1e-9);
        assert_eq!(grover_gap_closed_form(6, 1.0, 5.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn mixing_bound_values() {
        let (lo, hi) = mixing_time_bounds(0.5, 0.25, 0.01).unwrap();
        assert_relative_eq!(lo, 50f64.ln());
        assert_relative_eq!(hi, 2.0 * 400f64.ln());
        assert_eq!(mixing_time_bounds(1.0, 0.5, 0.1).unwrap().0, 0.0);
        assert!(mixing_time_bounds(0.0, 0.5, 0.1).is_err());
        assert!(mixing_time_bounds(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn scheme_samples() {
        let s = AveragingScheme::time_grid(-1.0, 2.0, 20.0, 4).samples().unwrap();
        assert_eq!(s, vec![(-1.0, 2.0), (-1.0, 8.0), (-1.0, 14.0), (-1.0, 20.0)]);
        let s = AveragingScheme::time_grid(-1.0, 2.0, 20.0, 1).samples().unwrap();
        assert_eq!(s, vec![(-1.0, 11.0)]);
        let mc = AveragingScheme {
            t_range: (0.0, 1.0),
            h_range: (-2.0, 2.0),
            sample_count: 10,
            mode: SamplingMode::MonteCarlo { seed: 3 },
        };
        assert_eq!(mc.samples().unwrap(), mc.samples().unwrap());
        assert_eq!(mc.samples().unwrap().len(), 10);
        let product = AveragingScheme { mode: SamplingMode::Grid, sample_count: 3, ..mc };
        assert_eq!(product.samples().unwrap().len(), 9);
        assert!(AveragingScheme { sample_count: 0, ..mc }.validate().is_err());
    }

    #[test]
    fn single_sample_average_is_the_kernel() {
        let hc = MarkedStateHamiltonian::new(5, 1.0, Config(0)).unwrap();
        let cfg = PropagatorConfig::default();
        let k = time_averaged_kernel(&hc, MixerKind::TransverseField, &AveragingScheme::fixed(0.7, 1.1), &cfg).unwrap();
        let direct = quantum_kernel_structured(&hc, &MixerSpec::transverse_field(0.7), 1.1, &cfg).unwrap();
        for x in 0..32 {
            assert_eq!(k.prob(Config(x), Config(9)).unwrap(), direct.prob(Config(x), Config(9)));
        }
    }

    #[test]
    fn averaged_grover_kernel_gap_matches_averaged_closed_form() {
        let n = 6;
        let hc = MarkedStateHamiltonian::new(n, 1.0, Config(0)).unwrap();
        let scheme = AveragingScheme::time_grid(-1.0, 2.0, 20.0, 8);
        let k = time_averaged_kernel(&hc, MixerKind::Grover, &scheme, &PropagatorConfig::default()).unwrap();
        let p = chain(&k, n, 1.0, 5.0, 0);
        let d = spectral_gap_dense(&p).unwrap().delta;
        let avg = averaged_grover_gap_closed_form(n, 1.0, 5.0, &scheme).unwrap();
        assert_relative_eq!(d, avg, max_relative = 1e-8);
    }

    #[test]
    fn slope_fits() {
        let pts: Vec<(usize, f64)> = (4..10).map(|n| (n, (-(n as f64)).exp2())).collect();
        assert_relative_eq!(scaling_fit(&pts).unwrap(), -1.0, epsilon = 1e-12);
        assert!(scaling_fit(&pts[..3]).is_err());
        assert!(matches!(
            scaling_fit(&[(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0)]),
            Err(Error::NonPositiveGap(_))
        ));
    }
}
