//! Statevector simulation of `U = e^{-iHt}` with `H = H_c + h·H_mix`, and the
//! measured-evolution proposal `Q(x|y) = |⟨x|U|y⟩|²`.

mod grover;
mod krylov;

pub(crate) use grover::gamma_squared;
pub use grover::{grover_closed_form, resonance_field, GroverClosedForm};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{dimension, Config, MarkedStateHamiltonian};
use crate::proposal::{
    level_representative, ColumnOracle, DenseKernel, ProposalKernel, SymmetricKernel,
};
use krylov::{expm_krylov, KrylovSettings};

/// Largest spin count for which the dense eigendecomposition is attempted at all.
pub const DENSE_DIAG_MAX_SPINS: usize = 12;
/// Dense diagonalisation is the automatic choice up to this size.
pub const AUTO_DENSE_MAX_SPINS: usize = 10;
/// Largest spin count for a single-column evolution.
pub const COLUMN_MAX_SPINS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixerKind {
    /// `H_mix = N|s⟩⟨s|` with `|s⟩` the uniform superposition.
    Grover,
    /// `H_mix = Σ_i σ_i^x`; `σ_i^x` toggles bit `i`.
    TransverseField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixerSpec {
    pub kind: MixerKind,
    pub field: f64,
}

impl MixerSpec {
    pub fn grover(field: f64) -> Self {
        Self {
            kind: MixerKind::Grover,
            field,
        }
    }

    pub fn transverse_field(field: f64) -> Self {
        Self {
            kind: MixerKind::TransverseField,
            field,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_spins: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn basis(n_spins: usize, y: Config) -> Result<Self> {
        let y = Config::new(y.0, n_spins)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dimension(n_spins)];
        amplitudes[y.0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    /// Normalised state; fails unless the input norm is 1 within 1e-10.
    pub fn from_amplitudes(n_spins: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let sv = Self::from_raw(n_spins, amplitudes)?;
        let norm = sv.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "statevector norm is {norm}, expected 1"
            )));
        }
        Ok(sv)
    }

    /// Any vector of the right length, e.g. the unnormalised `Hψ`.
    pub fn from_raw(n_spins: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dimension(n_spins) {
            return Err(Error::MismatchedDimensions {
                expected: dimension(n_spins),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Born-rule probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// `H = H_c + h·H_mix` as a matrix-free operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumHamiltonian {
    pub classical: MarkedStateHamiltonian,
    pub mixer: MixerSpec,
}

impl QuantumHamiltonian {
    pub fn new(classical: MarkedStateHamiltonian, mixer: MixerSpec) -> Self {
        Self { classical, mixer }
    }

    pub fn n_spins(&self) -> usize {
        self.classical.n_spins()
    }

    pub fn dim(&self) -> usize {
        self.classical.dim()
    }

    /// Upper bound on the spectral norm: `αN + |h|N` for both mixers.
    pub fn norm_bound(&self) -> f64 {
        self.classical.well_depth() + self.mixer.field.abs() * self.n_spins() as f64
    }

    /// `dst = H src`.
    pub fn apply_into(&self, src: &[Complex64], dst: &mut [Complex64]) {
        let n_spins = self.n_spins();
        let h = self.mixer.field;
        match self.mixer.kind {
            MixerKind::Grover => {
                let total: Complex64 = src.iter().sum();
                let c = total * (h * n_spins as f64 * (-(n_spins as f64)).exp2());
                for d in dst.iter_mut() {
                    *d = c;
                }
            }
            MixerKind::TransverseField => {
                for d in dst.iter_mut() {
                    *d = Complex64::new(0.0, 0.0);
                }
                for bit in 0..n_spins {
                    let stride = 1usize << bit;
                    for block in (0..src.len()).step_by(2 * stride) {
                        for y in block..block + stride {
                            dst[y] += src[y + stride] * h;
                            dst[y + stride] += src[y] * h;
                        }
                    }
                }
            }
        }
        let k = self.classical.marked().index();
        dst[k] -= src[k] * self.classical.well_depth();
    }

    /// Explicit real-symmetric matrix, for dense diagonalisation.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let n_spins = self.n_spins();
        let h = self.mixer.field;
        let mut m = match self.mixer.kind {
            MixerKind::Grover => {
                DMatrix::from_element(n, n, h * n_spins as f64 * (-(n_spins as f64)).exp2())
            }
            MixerKind::TransverseField => {
                let mut m = DMatrix::zeros(n, n);
                for y in 0..n {
                    for bit in 0..n_spins {
                        m[(y ^ (1 << bit), y)] = h;
                    }
                }
                m
            }
        };
        let k = self.classical.marked().index();
        m[(k, k)] -= self.classical.well_depth();
        m
    }
}

/// `Hψ` (not normalised).
pub fn apply_hamiltonian(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    psi: &Statevector,
) -> Result<Statevector> {
    if psi.n_spins != h_c.n_spins() {
        return Err(Error::MismatchedDimensions {
            expected: h_c.dim(),
            found: psi.amplitudes.len(),
        });
    }
    let ham = QuantumHamiltonian::new(*h_c, *mixer);
    let mut out = vec![Complex64::new(0.0, 0.0); h_c.dim()];
    ham.apply_into(&psi.amplitudes, &mut out);
    Statevector::from_raw(h_c.n_spins(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PropagatorMethod {
    /// Dense diagonalisation up to [`AUTO_DENSE_MAX_SPINS`] spins, Krylov above.
    #[default]
    Auto,
    DenseDiagonalization,
    KrylovSubspace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub method: PropagatorMethod,
    pub krylov_dim: usize,
    pub tolerance: f64,
    /// Cap on adaptive Krylov restarts.
    pub max_substeps: usize,
    /// Memory cap for the Krylov basis; the dimension shrinks to fit.
    pub krylov_memory_bytes: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            method: PropagatorMethod::Auto,
            krylov_dim: 30,
            tolerance: 1e-12,
            max_substeps: 100_000,
            krylov_memory_bytes: 2 << 30,
        }
    }
}

impl PropagatorConfig {
    pub fn dense() -> Self {
        Self {
            method: PropagatorMethod::DenseDiagonalization,
            ..Self::default()
        }
    }

    pub fn krylov() -> Self {
        Self {
            method: PropagatorMethod::KrylovSubspace,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.krylov_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "propagator needs tolerance > 0 and krylov_dim >= 2 (got {}, {})",
                self.tolerance, self.krylov_dim
            )));
        }
        Ok(())
    }

    fn resolve(&self, n_spins: usize) -> PropagatorMethod {
        match self.method {
            PropagatorMethod::Auto if n_spins <= AUTO_DENSE_MAX_SPINS => {
                PropagatorMethod::DenseDiagonalization
            }
            PropagatorMethod::Auto => PropagatorMethod::KrylovSubspace,
            m => m,
        }
    }
}

#[derive(Clone)]
enum Engine {
    Dense {
        vectors: Arc<DMatrix<f64>>,
        values: Arc<Vec<f64>>,
    },
    Krylov {
        settings: KrylovSettings,
    },
}

/// `e^{-iHt}` prepared once for repeated application.
#[derive(Clone)]
pub struct Propagator {
    ham: QuantumHamiltonian,
    t: f64,
    engine: Engine,
}

impl Propagator {
    pub fn new(ham: QuantumHamiltonian, t: f64, cfg: &PropagatorConfig) -> Result<Self> {
        cfg.validate()?;
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
        }
        let n_spins = ham.n_spins();
        let engine = match cfg.resolve(n_spins) {
            PropagatorMethod::DenseDiagonalization => {
                if n_spins > DENSE_DIAG_MAX_SPINS {
                    return Err(Error::BudgetExceeded {
                        what: "dense diagonalisation",
                        n_spins,
                        limit: DENSE_DIAG_MAX_SPINS,
                    });
                }
                let eig = SymmetricEigen::new(ham.dense_matrix());
                Engine::Dense {
                    vectors: Arc::new(eig.eigenvectors),
                    values: Arc::new(eig.eigenvalues.iter().copied().collect()),
                }
            }
            _ => {
                let vec_bytes = ham.dim() * std::mem::size_of::<Complex64>();
                let fit = (cfg.krylov_memory_bytes / vec_bytes.max(1)).saturating_sub(2);
                Engine::Krylov {
                    settings: KrylovSettings {
                        dim: cfg.krylov_dim.min(fit.max(4)),
                        tolerance: cfg.tolerance,
                        max_substeps: cfg.max_substeps,
                        max_halvings: 60,
                    },
                }
            }
        };
        Ok(Self { ham, t, engine })
    }

    /// The same Hamiltonian at another time; a dense diagonalisation is shared.
    pub fn retimed(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
        }
        Ok(Self {
            ham: self.ham,
            t,
            engine: self.engine.clone(),
        })
    }

    pub fn hamiltonian(&self) -> &QuantumHamiltonian {
        &self.ham
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn evolve(&self, psi: &Statevector) -> Result<Statevector> {
        if psi.n_spins != self.ham.n_spins() {
            return Err(Error::MismatchedDimensions {
                expected: self.ham.dim(),
                found: psi.amplitudes.len(),
            });
        }
        let amps = match &self.engine {
            Engine::Dense { vectors, values } => {
                let vectors = vectors.as_ref();
                let phases: Vec<Complex64> = values
                    .iter()
                    .map(|&l| Complex64::from_polar(1.0, -l * self.t))
                    .collect();
                let re = DVector::from_iterator(psi.amplitudes.len(), psi.amplitudes.iter().map(|z| z.re));
                let im = DVector::from_iterator(psi.amplitudes.len(), psi.amplitudes.iter().map(|z| z.im));
                let cr = vectors.tr_mul(&re);
                let ci = vectors.tr_mul(&im);
                let (mut ar, mut ai) = (cr.clone(), ci.clone());
                for j in 0..phases.len() {
                    let z = Complex64::new(cr[j], ci[j]) * phases[j];
                    ar[j] = z.re;
                    ai[j] = z.im;
                }
                let out_r = vectors * ar;
                let out_i = vectors * ai;
                out_r
                    .iter()
                    .zip(out_i.iter())
                    .map(|(&r, &i)| Complex64::new(r, i))
                    .collect()
            }
            Engine::Krylov { settings } => {
                let ham = self.ham;
                let apply = move |src: &[Complex64], dst: &mut [Complex64]| ham.apply_into(src, dst);
                expm_krylov(&apply, &psi.amplitudes, self.t, ham.norm_bound(), settings)?
            }
        };
        Statevector::from_raw(psi.n_spins, amps)
    }

    /// Measured-evolution column `Q(·|y)`.
    pub fn proposal_column(&self, y: Config) -> Result<Vec<f64>> {
        let psi = Statevector::basis(self.ham.n_spins(), y)?;
        if self.t == 0.0 {
            return Ok(psi.probabilities());
        }
        Ok(self.evolve(&psi)?.probabilities())
    }

    /// The whole kernel from one evolution per Hamming level around the
    /// marked state.
    pub fn structured_kernel(&self) -> Result<SymmetricKernel> {
        let n_spins = self.ham.n_spins();
        let marked = self.ham.classical.marked();
        let columns = map_levels(n_spins + 1, n_spins <= 14, |w| {
            self.proposal_column(level_representative(marked, w))
        })?;
        SymmetricKernel::from_level_columns(n_spins, marked, &columns, 1e-9)
    }
}

/// `e^{-iHt}ψ₀`.
pub fn evolve(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    psi0: &Statevector,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<Statevector> {
    if psi0.n_spins != h_c.n_spins() {
        return Err(Error::MismatchedDimensions {
            expected: h_c.dim(),
            found: psi0.amplitudes.len(),
        });
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    Propagator::new(QuantumHamiltonian::new(*h_c, *mixer), t, cfg)?.evolve(psi0)
}

/// One measured evolution from `|y⟩`; works up to [`COLUMN_MAX_SPINS`] spins.
pub fn quantum_proposal_column(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    t: f64,
    y: Config,
    cfg: &PropagatorConfig,
) -> Result<Vec<f64>> {
    let n_spins = h_c.n_spins();
    if n_spins > COLUMN_MAX_SPINS {
        return Err(Error::BudgetExceeded {
            what: "proposal column",
            n_spins,
            limit: COLUMN_MAX_SPINS,
        });
    }
    let psi = Statevector::basis(n_spins, y)?;
    Ok(evolve(h_c, mixer, &psi, t, cfg)?.probabilities())
}

/// How a dense quantum kernel is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelAssembly {
    /// One evolution per Hamming level around the marked state; the rest follows
    /// from spin-permutation symmetry.
    #[default]
    Orbits,
    /// One evolution per column.
    PerColumn,
}

fn map_levels<T: Send>(
    count: usize,
    parallel: bool,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..count).map(f).collect()
}

/// Quantum kernel in symmetry-compressed form: `N + 1` evolutions.
pub fn quantum_kernel_structured(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<SymmetricKernel> {
    let n_spins = h_c.n_spins();
    if n_spins > COLUMN_MAX_SPINS {
        return Err(Error::BudgetExceeded {
            what: "structured quantum kernel",
            n_spins,
            limit: COLUMN_MAX_SPINS,
        });
    }
    Propagator::new(QuantumHamiltonian::new(*h_c, *mixer), t, cfg)?.structured_kernel()
}

/// Dense quantum kernel `Q(x|y) = |⟨x|e^{-iHt}|y⟩|²`.
pub fn quantum_kernel(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<ProposalKernel> {
    quantum_kernel_with(h_c, mixer, t, cfg, KernelAssembly::Orbits)
}

pub fn quantum_kernel_with(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    t: f64,
    cfg: &PropagatorConfig,
    assembly: KernelAssembly,
) -> Result<ProposalKernel> {
    let n_spins = h_c.n_spins();
    if n_spins > crate::proposal::DENSE_KERNEL_MAX_SPINS {
        return Err(Error::BudgetExceeded {
            what: "dense quantum kernel",
            n_spins,
            limit: crate::proposal::DENSE_KERNEL_MAX_SPINS,
        });
    }
    match assembly {
        KernelAssembly::Orbits => {
            let s = quantum_kernel_structured(h_c, mixer, t, cfg)?;
            Ok(ProposalKernel::Dense(
                ProposalKernel::Structured(s).to_dense()?,
            ))
        }
        KernelAssembly::PerColumn => {
            let prop = Propagator::new(QuantumHamiltonian::new(*h_c, *mixer), t, cfg)?;
            let n = h_c.dim();
            let columns = map_levels(n, true, |y| prop.proposal_column(Config(y)))?;
            DenseKernel::new(n_spins, columns.concat()).map(ProposalKernel::Dense)
        }
    }
}

/// Kernel whose columns are produced on demand by fresh evolutions.
pub fn quantum_column_oracle(
    h_c: &MarkedStateHamiltonian,
    mixer: &MixerSpec,
    t: f64,
    cfg: &PropagatorConfig,
) -> ProposalKernel {
    let (h_c, mixer, cfg) = (*h_c, *mixer, *cfg);
    ProposalKernel::ColumnOracle(ColumnOracle::new(h_c.n_spins(), move |y| {
        quantum_proposal_column(&h_c, &mixer, t, y, &cfg)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proposal::validate_kernel;
    use approx::assert_relative_eq;

    fn ham(n: usize, alpha: f64, k: usize) -> MarkedStateHamiltonian {
        MarkedStateHamiltonian::new(n, alpha, Config(k)).unwrap()
    }

    #[test]
    fn marked_state_is_eigenstate_without_field() {
        let hc = ham(4, 1.5, 9);
        let psi = Statevector::basis(4, Config(9)).unwrap();
        for mixer in [MixerSpec::grover(0.0), MixerSpec::transverse_field(0.0)] {
            let out = apply_hamiltonian(&hc, &mixer, &psi).unwrap();
            for (x, a) in out.amplitudes().iter().enumerate() {
                let expected = if x == 9 { -6.0 } else { 0.0 };
                assert_relative_eq!(a.re, expected);
                assert_eq!(a.im, 0.0);
            }
        }
    }

    #[test]
    fn transverse_field_flips_single_spins() {
        // alpha -> 0 limit: use a marked state far from the input so H_c drops out.
        let hc = ham(5, 1.0, 0b11111);
        let psi = Statevector::basis(5, Config(0)).unwrap();
        let out = apply_hamiltonian(&hc, &MixerSpec::transverse_field(0.8), &psi).unwrap();
        for (x, a) in out.amplitudes().iter().enumerate() {
            let expected = if x.count_ones() == 1 { 0.8 } else { 0.0 };
            assert_relative_eq!(a.re, expected);
        }
    }

    #[test]
    fn uniform_state_eigen_of_grover_mixer() {
        let hc = ham(4, 1.0, 3);
        let s = Statevector::from_amplitudes(4, vec![Complex64::new(0.25, 0.0); 16]).unwrap();
        let out = apply_hamiltonian(&hc, &MixerSpec::grover(0.5), &s).unwrap();
        // hN|s⟩ plus the marked-state well acting on the k-th amplitude.
        for (x, a) in out.amplitudes().iter().enumerate() {
            let expected = 0.5 * 4.0 * 0.25 - if x == 3 { 4.0 * 0.25 } else { 0.0 };
            assert_relative_eq!(a.re, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn matrix_free_and_dense_operators_agree() {
        for mixer in [MixerSpec::grover(-0.7), MixerSpec::transverse_field(1.3)] {
            let q = QuantumHamiltonian::new(ham(5, 0.9, 13), mixer);
            let m = q.dense_matrix();
            assert_eq!(m.clone(), m.transpose());
            let src: Vec<Complex64> = (0..32)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let mut dst = vec![Complex64::new(0.0, 0.0); 32];
            q.apply_into(&src, &mut dst);
            for y in 0..32 {
                let expected: Complex64 = (0..32).map(|x| src[x] * m[(y, x)]).sum();
                assert_relative_eq!(dst[y].re, expected.re, epsilon = 1e-13);
                assert_relative_eq!(dst[y].im, expected.im, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let hc = ham(3, 1.0, 0);
        let psi = Statevector::basis(3, Config(5)).unwrap();
        let out = evolve(&hc, &MixerSpec::transverse_field(1.0), &psi, 0.0, &PropagatorConfig::default()).unwrap();
        assert_eq!(out, psi);
        let col = quantum_proposal_column(&hc, &MixerSpec::grover(1.0), 0.0, Config(5), &PropagatorConfig::default()).unwrap();
        assert_eq!(col[5], 1.0);
        let k = quantum_kernel(&hc, &MixerSpec::grover(1.0), 0.0, &PropagatorConfig::krylov()).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                let expected = if x == y { 1.0 } else { 0.0 };
                assert_relative_eq!(k.prob(Config(x), Config(y)).unwrap(), expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn krylov_matches_dense_propagation() {
        let hc = ham(7, 1.0, 17);
        for mixer in [MixerSpec::grover(0.6), MixerSpec::transverse_field(-1.1)] {
            let psi = Statevector::basis(7, Config(40)).unwrap();
            let a = evolve(&hc, &mixer, &psi, 2.7, &PropagatorConfig::dense()).unwrap();
            let b = evolve(&hc, &mixer, &psi, 2.7, &PropagatorConfig::krylov()).unwrap();
            assert!(1.0 - a.fidelity(&b) < 1e-12);
            assert!((b.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn grover_evolution_keeps_unmarked_amplitudes_equal() {
        let hc = ham(6, 1.0, 5);
        let psi = Statevector::basis(6, Config(22)).unwrap();
        let out = evolve(&hc, &MixerSpec::grover(0.9), &psi, 1.9, &PropagatorConfig::krylov()).unwrap();
        let p = out.probabilities();
        let reference = p[0];
        for (x, &v) in p.iter().enumerate() {
            if x != 5 && x != 22 {
                assert!((v - reference).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grover_kernel_matches_closed_form() {
        let hc = ham(4, 1.0, 0);
        let k = quantum_kernel(&hc, &MixerSpec::grover(1.0), 1.0, &PropagatorConfig::default()).unwrap();
        let g = grover_closed_form(4, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(k.prob(Config(0), Config(3)).unwrap(), g.q_marked, epsilon = 1e-10);
        assert_relative_eq!(k.prob(Config(3), Config(0)).unwrap(), g.q_marked, epsilon = 1e-10);
        assert_relative_eq!(k.prob(Config(6), Config(3)).unwrap(), g.q_unmarked, epsilon = 1e-10);
        assert_relative_eq!(k.prob(Config(0), Config(0)).unwrap(), g.q_marked_stay, epsilon = 1e-10);
        assert_relative_eq!(k.prob(Config(9), Config(9)).unwrap(), g.q_unmarked_stay, epsilon = 1e-10);
    }

    #[test]
    fn transverse_kernel_symmetric_and_doubly_stochastic() {
        let hc = ham(4, 1.0, 6);
        let k = quantum_kernel(&hc, &MixerSpec::transverse_field(0.8), 1.3, &PropagatorConfig::default()).unwrap();
        let cert = validate_kernel(&k).unwrap();
        assert!(cert.max_asymmetry < 1e-10);
        assert!(cert.is_doubly_stochastic(1e-10));
    }

    #[test]
    fn orbit_and_per_column_assembly_agree() {
        let hc = ham(6, 0.8, 41);
        for mixer in [MixerSpec::grover(-1.2), MixerSpec::transverse_field(0.7)] {
            let a = quantum_kernel_with(&hc, &mixer, 2.2, &PropagatorConfig::default(), KernelAssembly::Orbits).unwrap();
            let b = quantum_kernel_with(&hc, &mixer, 2.2, &PropagatorConfig::default(), KernelAssembly::PerColumn).unwrap();
            let (a, b) = (a.to_dense().unwrap(), b.to_dense().unwrap());
            for y in 0..64 {
                for x in 0..64 {
                    assert!((a.prob(Config(x), Config(y)) - b.prob(Config(x), Config(y))).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn column_from_marked_state() {
        let hc = ham(12, 1.0, 0);
        let cfg = PropagatorConfig::default();
        let col = quantum_proposal_column(&hc, &MixerSpec::transverse_field(1.0), 1.0, Config(0), &cfg).unwrap();
        let rest: f64 = col.iter().skip(1).sum();
        assert_relative_eq!(rest, 1.0 - col[0], epsilon = 1e-10);
        let col = quantum_proposal_column(&ham(8, 1.0, 3), &MixerSpec::grover(0.5), 3.0, Config(3), &cfg).unwrap();
        for (x, &v) in col.iter().enumerate() {
            if x != 3 {
                assert!((v - col[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_budget_enforced() {
        let hc = ham(13, 1.0, 0);
        let err = Propagator::new(QuantumHamiltonian::new(hc, MixerSpec::grover(1.0)), 1.0, &PropagatorConfig::dense());
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
        let hc = ham(15, 1.0, 0);
        assert!(matches!(
            quantum_kernel(&hc, &MixerSpec::grover(1.0), 1.0, &PropagatorConfig::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
