use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use qmcmc::bottleneck::{bottleneck_bound, marked_state_bound};
use qmcmc::chain::{build_transition_matrix, exact_mixing_time, ChainState};
use qmcmc::model::dimension;
use qmcmc::proposal::{affine_combination, single_flip_kernel, uniform_kernel, validate_kernel};
use qmcmc::quantum::{
    evolve, grover_closed_form, quantum_kernel_structured, quantum_kernel_with, quantum_proposal_column,
    KernelAssembly, MixerSpec, PropagatorConfig, Statevector,
};
use qmcmc::spectral::{spectral_gap, uniform_gap_closed_form, GapRoute};
use qmcmc::{gibbs_measure, Config, MarkedStateHamiltonian, ProposalKernel};

fn mixer(grover: bool, h: f64) -> MixerSpec {
    if grover {
        MixerSpec::grover(h)
    } else {
        MixerSpec::transverse_field(h)
    }
}

fn state(n: usize, raw: &[(f64, f64)]) -> Statevector {
    let amps: Vec<Complex64> = raw.iter().take(dimension(n)).map(|&(a, b)| Complex64::new(a, b)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(n, amps.into_iter().map(|z| z / norm).collect()).unwrap()
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.1f64..1.0, -1.0f64..1.0), 64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_preserves_norm(
        n in 2usize..=6, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0,
        t in 0.0f64..5.0, raw in amplitudes(), krylov: bool,
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let cfg = if krylov { PropagatorConfig::krylov() } else { PropagatorConfig::dense() };
        let out = evolve(&h_c, &mixer(grover, h), &state(n, &raw), t, &cfg).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolution_composes(
        n in 2usize..=6, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0,
        t1 in 0.0f64..3.0, t2 in 0.0f64..3.0, raw in amplitudes(),
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let m = mixer(grover, h);
        let cfg = PropagatorConfig::krylov();
        let psi = state(n, &raw);
        let once = evolve(&h_c, &m, &psi, t1 + t2, &cfg).unwrap();
        let twice = evolve(&h_c, &m, &evolve(&h_c, &m, &psi, t1, &cfg).unwrap(), t2, &cfg).unwrap();
        prop_assert!(1.0 - once.fidelity(&twice) < 1e-10);
    }

    #[test]
    fn quantum_kernels_are_symmetric_and_doubly_stochastic(
        n in 2usize..=6, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0, t in 0.0f64..5.0,
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let k = quantum_kernel_with(&h_c, &mixer(grover, h), t, &PropagatorConfig::default(), KernelAssembly::PerColumn).unwrap();
        let cert = validate_kernel(&k).unwrap();
        prop_assert!(cert.is_symmetric(1e-10));
        prop_assert!(cert.is_doubly_stochastic(1e-10));
        for y in 0..dimension(n) {
            prop_assert!(k.column(Config(y)).unwrap().iter().all(|&q| q >= -1e-14));
        }
    }

    #[test]
    fn orbit_assembly_matches_per_column(
        n in 2usize..=6, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0, t in 0.0f64..5.0,
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let m = mixer(grover, h);
        let cfg = PropagatorConfig::default();
        let a = ProposalKernel::Structured(quantum_kernel_structured(&h_c, &m, t, &cfg).unwrap());
        let b = quantum_kernel_with(&h_c, &m, t, &cfg, KernelAssembly::PerColumn).unwrap();
        for y in 0..dimension(n) {
            let (ca, cb) = (a.column(Config(y)).unwrap(), b.column(Config(y)).unwrap());
            for x in 0..dimension(n) {
                prop_assert!((ca[x] - cb[x]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn grover_column_matches_closed_form(
        n in 2usize..=8, alpha in 0.5f64..2.0, h in -2.0f64..2.0, t in 0.0f64..5.0,
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let k = h_c.marked();
        let col = quantum_proposal_column(&h_c, &MixerSpec::grover(h), t, k, &PropagatorConfig::krylov()).unwrap();
        let cf = grover_closed_form(n, alpha, h, t).unwrap();
        let x = if k.0 == 0 { 1 } else { 0 };
        prop_assert!((col[x] - cf.q_marked).abs() < 1e-10);
        prop_assert!((col[k.0] - cf.q_marked_stay).abs() < 1e-10);
    }

    #[test]
    fn chains_are_reversible_stochastic_and_stationary(
        n in 2usize..=6, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0,
        t in 0.0f64..5.0, beta in 0.0f64..6.0,
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let k = ProposalKernel::Structured(
            quantum_kernel_structured(&h_c, &mixer(grover, h), t, &PropagatorConfig::default()).unwrap(),
        );
        let p = build_transition_matrix(&k, &gibbs_measure(&h_c, beta).unwrap()).unwrap();
        prop_assert!(p.max_row_deviation() < 1e-12);
        prop_assert!(p.detailed_balance_violation() < 1e-9);
        prop_assert!(p.stationarity_defect() < 1e-12);
    }

    #[test]
    fn gap_never_exceeds_bottleneck_bounds(
        n in 2usize..=6, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0,
        t in 0.0f64..5.0, beta in 0.0f64..6.0, mask in any::<u64>(),
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let k = ProposalKernel::Structured(
            quantum_kernel_structured(&h_c, &mixer(grover, h), t, &PropagatorConfig::default()).unwrap(),
        );
        let p = build_transition_matrix(&k, &gibbs_measure(&h_c, beta).unwrap()).unwrap();
        let delta = spectral_gap(&p, GapRoute::Full, 0.01).unwrap().delta;
        prop_assert!((0.0..=1.0).contains(&delta));
        let col = k.column(h_c.marked()).unwrap();
        let bound = marked_state_bound(&col, h_c.marked(), n, alpha, beta).unwrap();
        prop_assert!(delta <= bound + 1e-12, "{} > {}", delta, bound);

        let dim = dimension(n);
        let set: Vec<Config> = (0..dim).filter(|x| mask >> (x % 64) & 1 == 1).map(Config).collect();
        if !set.is_empty() && set.len() < dim {
            let mass: f64 = set.iter().map(|&x| p.stationary().prob(x)).sum();
            let cut = if mass <= 0.5 {
                set
            } else {
                (0..dim).map(Config).filter(|x| !set.contains(x)).collect()
            };
            let b = bottleneck_bound(&p, &cut).unwrap().bound;
            prop_assert!(delta <= b + 1e-12, "{} > {}", delta, b);
        }
    }

    #[test]
    fn uniform_gap_matches_closed_form(n in 2usize..=8, alpha in 0.1f64..3.0, beta in 0.0f64..8.0) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let p = build_transition_matrix(&uniform_kernel(n).unwrap(), &gibbs_measure(&h_c, beta).unwrap()).unwrap();
        let d = spectral_gap(&p, GapRoute::Full, 0.01).unwrap().delta;
        assert_relative_eq!(d, uniform_gap_closed_form(n, alpha, beta), max_relative = 1e-8);
    }

    #[test]
    fn reduced_gap_matches_full(
        n in 2usize..=7, grover: bool, alpha in 0.5f64..2.0, h in -2.0f64..2.0,
        t in 0.0f64..5.0, beta in 0.0f64..6.0,
    ) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha).unwrap();
        let k = ProposalKernel::Structured(
            quantum_kernel_structured(&h_c, &mixer(grover, h), t, &PropagatorConfig::default()).unwrap(),
        );
        let p = build_transition_matrix(&k, &gibbs_measure(&h_c, beta).unwrap()).unwrap();
        let full = spectral_gap(&p, GapRoute::Full, 0.01).unwrap().delta;
        let reduced = spectral_gap(&p, GapRoute::Reduced, 0.01).unwrap().delta;
        prop_assert!((full - reduced).abs() <= 1e-10 * full.max(1e-3));
    }

    #[test]
    fn convex_mixtures_stay_valid(w in 0.0f64..1.0, n in 2usize..=6, h in -2.0f64..2.0, t in 0.0f64..5.0) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, 1.0).unwrap();
        let q = ProposalKernel::Structured(
            quantum_kernel_structured(&h_c, &MixerSpec::transverse_field(h), t, &PropagatorConfig::default()).unwrap(),
        );
        let mix = affine_combination(&[w, 1.0 - w], &[q, single_flip_kernel(n).unwrap()]).unwrap();
        let cert = validate_kernel(&mix).unwrap();
        prop_assert!(cert.is_symmetric(1e-10) && cert.is_doubly_stochastic(1e-10));
    }

    #[test]
    fn mixing_time_grows_as_epsilon_shrinks(n in 2usize..=6, beta in 0.0f64..4.0, e in 0.02f64..0.4) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, 1.0).unwrap();
        let p = build_transition_matrix(&uniform_kernel(n).unwrap(), &gibbs_measure(&h_c, beta).unwrap()).unwrap();
        let loose = exact_mixing_time(&p, e).unwrap();
        let tight = exact_mixing_time(&p, e / 2.0).unwrap();
        prop_assert!(tight >= loose);
    }

    #[test]
    fn chain_runs_are_reproducible(seed in any::<u64>(), stream in 0u64..8, n in 2usize..=6) {
        let h_c = MarkedStateHamiltonian::with_default_mark(n, 1.0).unwrap();
        let m = gibbs_measure(&h_c, 1.0).unwrap();
        let k = uniform_kernel(n).unwrap();
        let run = || {
            let mut s = ChainState::new(Config(0), n, seed, stream).unwrap();
            (0..200).map(|_| { s.step(&k, &m).unwrap(); s.current }).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }
}
