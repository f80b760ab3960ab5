//! Lanczos approximation of `e^{-iHτ}ψ` for real-symmetric `H`, with adaptive substeps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct KrylovSettings {
    pub dim: usize,
    pub tolerance: f64,
    pub max_substeps: usize,
    pub max_halvings: u32,
}

#[inline]
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal Lanczos basis and tridiagonal projection of `H` on it.
struct LanczosBasis {
    vectors: Vec<Vec<Complex64>>,
    tri: SymmetricEigen<f64, nalgebra::Dyn>,
    /// Residual coupling out of the subspace; zero after a lucky breakdown.
    beta_next: f64,
}

impl LanczosBasis {
    fn build(
        apply: &dyn Fn(&[Complex64], &mut [Complex64]),
        start: &[Complex64],
        start_norm: f64,
        dim: usize,
        scale: f64,
    ) -> Self {
        let n = start.len();
        let dim = dim.min(n).max(1);
        let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        vectors.push(start.iter().map(|z| z / start_norm).collect());
        let mut alpha = Vec::with_capacity(dim);
        let mut beta: Vec<f64> = Vec::with_capacity(dim);
        let mut beta_next = 0.0;
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..dim {
            apply(&vectors[j], &mut w);
            let a = dot(&vectors[j], &w).re;
            // Full reorthogonalisation against the whole basis.
            for _pass in 0..2 {
                for v in &vectors {
                    let c = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            alpha.push(a);
            let b = norm(&w);
            if b <= 1e-13 * scale.max(1.0) {
                beta_next = 0.0;
                break;
            }
            if j + 1 == dim {
                beta_next = b;
                break;
            }
            beta.push(b);
            vectors.push(w.iter().map(|z| z / b).collect());
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        vectors.truncate(m);
        Self {
            vectors,
            tri: SymmetricEigen::new(t),
            beta_next,
        }
    }

    /// Coefficients of `e^{-iTτ} e_1` in the Lanczos basis.
    fn coefficients(&self, tau: f64) -> Vec<Complex64> {
        let s = &self.tri.eigenvectors;
        let m = s.nrows();
        let phases: Vec<Complex64> = self
            .tri
            .eigenvalues
            .iter()
            .zip(s.row(0).iter())
            .map(|(&theta, &s0)| Complex64::from_polar(s0, -theta * tau))
            .collect();
        (0..m)
            .map(|i| (0..m).map(|l| s[(i, l)] * phases[l]).sum())
            .collect()
    }
}

/// `e^{-iHt}ψ` by restarted Lanczos. Each restart accepts the largest step
/// `τ = remaining / 2^k` whose residual estimate `β_m |[e^{-iTτ}e_1]_m|`
/// stays within `tolerance`.
pub(crate) fn expm_krylov(
    apply: &dyn Fn(&[Complex64], &mut [Complex64]),
    psi: &[Complex64],
    t: f64,
    norm_bound: f64,
    settings: &KrylovSettings,
) -> Result<Vec<Complex64>> {
    let mut state = psi.to_vec();
    if t == 0.0 {
        return Ok(state);
    }
    let mut remaining = t;
    let mut substeps = 0usize;
    while remaining != 0.0 {
        if substeps >= settings.max_substeps {
            return Err(Error::NonConvergence(format!(
                "{substeps} substeps used with {remaining} of {t} left"
            )));
        }
        let nrm = norm(&state);
        if nrm == 0.0 {
            return Ok(state);
        }
        let basis = LanczosBasis::build(apply, &state, nrm, settings.dim, norm_bound);
        let mut tau = remaining;
        let mut halvings = 0;
        let coeffs = loop {
            let c = basis.coefficients(tau);
            let err = nrm * basis.beta_next * c.last().map_or(0.0, |z| z.norm());
            if err <= settings.tolerance {
                break c;
            }
            halvings += 1;
            if halvings > settings.max_halvings {
                return Err(Error::NonConvergence(format!(
                    "residual estimate {err:e} above {:e} after {halvings} halvings",
                    settings.tolerance
                )));
            }
            tau *= 0.5;
        };
        let mut next = vec![Complex64::new(0.0, 0.0); state.len()];
        for (v, c) in basis.vectors.iter().zip(&coeffs) {
            let c = c * nrm;
            for (o, vi) in next.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
        state = next;
        remaining -= tau;
        // Guard against a remainder that is pure rounding residue.
        if remaining.abs() <= t.abs() * 1e-15 {
            remaining = 0.0;
        }
        substeps += 1;
    }
    Ok(state)
}
