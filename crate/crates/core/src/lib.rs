//! Markov chain Monte Carlo with measured quantum-evolution proposals on a
//! marked-state spin model: exact kernels, spectral gaps, mixing times and
//! bottleneck bounds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bottleneck;
pub mod chain;
pub mod error;
pub mod experiment;
pub mod model;
pub mod proposal;
pub mod quantum;
pub mod spectral;
pub mod symmetry;
pub mod validate;

pub use error::{Error, Result};
pub use model::{gibbs_measure, Config, GibbsMeasure, MarkedStateHamiltonian};
pub use proposal::{ProposalKernel, SymmetricKernel};
