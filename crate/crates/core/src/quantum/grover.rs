//! Closed-form Grover-mixer proposal.
//!
//! With `H_mix = N|s⟩⟨s|`, the evolution from any basis state stays in the
//! span of `|k⟩`, the uniform superposition `|X_⊥⟩` of the unmarked states and
//! the start itself, so the proposal has only four distinct values.

use crate::error::{Error, Result};
use crate::model::{dimension, Config};
use crate::proposal::SymmetricKernel;

/// Two-level solution for the Grover mixer at field `h` and time `t`.
///
/// In the basis `{|X_⊥⟩, |k⟩}` the Hamiltonian is `N(h-α)/2 · I + γ n̂·σ`
/// with `n̂ = (n_z, n_x, 0)`; `n_z` multiplies `σ_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverClosedForm {
    pub n_spins: usize,
    pub gamma: f64,
    pub omega: f64,
    pub phi: f64,
    pub n_z: f64,
    pub n_x: f64,
    /// `K`, the bracket of the unmarked-to-unmarked amplitude.
    pub k_factor: f64,
    /// `Q(k|x) = Q(x|k)` for unmarked `x`.
    pub q_marked: f64,
    /// `Q(x|y)` for distinct unmarked `x`, `y`.
    pub q_unmarked: f64,
    /// `Q(k|k)`.
    pub q_marked_stay: f64,
    /// `Q(x|x)` for unmarked `x`.
    pub q_unmarked_stay: f64,
}

/// `γ² = (N/2)² ((α+h)² - αh·2^{2-N})`.
pub(crate) fn gamma_squared(n_spins: usize, alpha: f64, h: f64) -> f64 {
    let n = n_spins as f64;
    0.25 * n * n * ((alpha + h).powi(2) - alpha * h * (2.0 - n).exp2())
}

pub fn grover_closed_form(n_spins: usize, alpha: f64, h: f64, t: f64) -> Result<GroverClosedForm> {
    if n_spins == 0 || n_spins > 60 {
        return Err(Error::InvalidParameter(format!(
            "spin count {n_spins} out of range"
        )));
    }
    if ![alpha, h, t].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("parameters must be finite".into()));
    }
    let gamma_sq = gamma_squared(n_spins, alpha, h);
    if gamma_sq < 1e-300 {
        return Err(Error::DegenerateFrequency { gamma_sq });
    }
    let n = n_spins as f64;
    let gamma = gamma_sq.sqrt();
    let omega = gamma / n;
    let phi = n * (h - alpha) / 2.0;
    let dim = dimension(n_spins) as f64;
    let inv_dim = (-n).exp2();
    let unmarked = dim - 1.0;

    let n_z = (n / gamma) * (0.5 * (h + alpha) - h * inv_dim);
    let n_x = (n / gamma) * h * unmarked.sqrt() * inv_dim;

    let (sg, cg) = (gamma * t).sin_cos();
    let (sp, cp) = (phi * t).sin_cos();
    let q_marked = (n * h * sg * inv_dim / gamma).powi(2);
    let k_factor = 1.0 - 2.0 * cp * cg + cg * cg + 2.0 * n_z * sp * sg + n_z * n_z * sg * sg;
    let q_unmarked = k_factor / (unmarked * unmarked);

    let q_marked_stay = 1.0 - unmarked * q_marked;
    let q_unmarked_stay = 1.0 - q_marked - (dim - 2.0) * q_unmarked;
    Ok(GroverClosedForm {
        n_spins,
        gamma,
        omega,
        phi,
        n_z,
        n_x,
        k_factor,
        q_marked,
        q_unmarked,
        q_marked_stay,
        q_unmarked_stay,
    })
}

impl GroverClosedForm {
    /// The proposal kernel these four values define, around marked state `k`.
    pub fn to_kernel(&self, marked: Config) -> Result<SymmetricKernel> {
        let c = *self;
        SymmetricKernel::from_fn(self.n_spins, marked, move |wy, wx, ov| {
            let same = wx == wy && ov == wx;
            match (wy == 0, wx == 0) {
                (true, true) => c.q_marked_stay,
                (true, false) | (false, true) => c.q_marked,
                (false, false) if same => c.q_unmarked_stay,
                (false, false) => c.q_unmarked,
            }
        })
    }
}

/// Field at which the two-level frequency collapses, `h = -α / (1 - 2^{-N})`.
pub fn resonance_field(alpha: f64, n_spins: usize) -> f64 {
    -alpha / (1.0 - (-(n_spins as f64)).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_at_zero_time() {
        let g = grover_closed_form(5, 1.0, 0.7, 0.0).unwrap();
        assert_eq!(g.q_marked, 0.0);
        assert_relative_eq!(g.k_factor, 0.0, epsilon = 1e-15);
        assert_relative_eq!(g.q_marked_stay, 1.0);
        assert_relative_eq!(g.q_unmarked_stay, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn no_mixing_without_field() {
        let g = grover_closed_form(6, 1.3, 0.0, 2.1).unwrap();
        assert_eq!(g.q_marked, 0.0);
        assert_relative_eq!(g.q_unmarked, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bloch_vector_is_unit_and_normalisation_holds() {
        for &(n, a, h, t) in &[(3, 1.0, 1.0, 1.0), (8, 0.5, -1.7, 3.3), (12, 2.0, 0.4, 0.2)] {
            let g = grover_closed_form(n, a, h, t).unwrap();
            assert_relative_eq!(g.n_z * g.n_z + g.n_x * g.n_x, 1.0, epsilon = 1e-12);
            let unmarked = (dimension(n) - 1) as f64;
            assert_relative_eq!(unmarked * g.q_marked + g.q_marked_stay, 1.0, epsilon = 1e-12);
            for q in [g.q_marked, g.q_unmarked, g.q_marked_stay, g.q_unmarked_stay] {
                assert!((-1e-15..=1.0 + 1e-15).contains(&q), "{q}");
            }
        }
    }

    #[test]
    fn resonance_values() {
        assert_eq!(resonance_field(1.0, 1), -2.0);
        assert_relative_eq!(resonance_field(1.0, 40), -1.0, epsilon = 1e-11);
        let res = grover_closed_form(10, 1.0, resonance_field(1.0, 10), 1.0).unwrap();
        let off = grover_closed_form(10, 1.0, 1.0, 1.0).unwrap();
        assert!(res.omega <= off.omega / 16.0);
    }

    #[test]
    fn degenerate_frequency_reported() {
        // alpha > 0 keeps gamma > 0; only the unphysical alpha = h = 0 point degenerates.
        let err = grover_closed_form(4, 0.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrequency { .. }));
    }
}
