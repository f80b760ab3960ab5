//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the page knows the layout.
//! The plain functions underneath are ordinary Rust and are tested natively.

use wasm_bindgen::prelude::*;

use qmcmc::chain::build_transition_matrix;
use qmcmc::quantum::{grover_closed_form, quantum_kernel_structured, resonance_field, MixerSpec, PropagatorConfig};
use qmcmc::spectral::{grover_gap_closed_form, spectral_gap, uniform_gap_closed_form, GapRoute};
use qmcmc::{gibbs_measure, MarkedStateHamiltonian, ProposalKernel};

/// Largest N for which the page may ask for a simulated gap.
pub const SIMULATED_MAX_SPINS: usize = 8;

/// `[t_0, closed_0, t_1, closed_1, ...]` over `points` times in `[0, t_max]`.
/// When `n ≤ 8` each closed value is followed by the gap of the simulated
/// chain, so the stride becomes 3.
pub fn grover_gap_curve(
    n: usize,
    alpha: f64,
    beta: f64,
    h: f64,
    t_max: f64,
    points: usize,
) -> qmcmc::Result<Vec<f64>> {
    let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha)?;
    let measure = gibbs_measure(&h_c, beta)?;
    let simulate = n <= SIMULATED_MAX_SPINS;
    let cfg = PropagatorConfig::default();
    let mut out = Vec::with_capacity(points * 3);
    for i in 0..points {
        let t = if points > 1 { t_max * i as f64 / (points - 1) as f64 } else { t_max };
        out.push(t);
        out.push(grover_gap_closed_form(n, alpha, beta, h, t));
        if simulate {
            let kernel = ProposalKernel::Structured(quantum_kernel_structured(&h_c, &MixerSpec::grover(h), t, &cfg)?);
            let p = build_transition_matrix(&kernel, &measure)?;
            out.push(spectral_gap(&p, GapRoute::Auto, 0.01)?.delta);
        }
    }
    Ok(out)
}

/// Row-major `betas.len() × (n_max - n_min + 1)` table of `π(k)`.
pub fn marked_mass_table(n_min: usize, n_max: usize, alpha: f64, betas: &[f64]) -> qmcmc::Result<Vec<f64>> {
    let mut out = Vec::new();
    for &beta in betas {
        for n in n_min..=n_max {
            let h_c = MarkedStateHamiltonian::with_default_mark(n, alpha)?;
            out.push(gibbs_measure(&h_c, beta)?.prob(h_c.marked()));
        }
    }
    Ok(out)
}

/// `[N, uniform, resonant Grover, off-resonant Grover]` per N. The resonant
/// value uses half a Rabi period; the off-resonant one a fixed `h = α`, `t`.
pub fn gap_scaling_table(n_min: usize, n_max: usize, alpha: f64, beta: f64, t: f64) -> qmcmc::Result<Vec<f64>> {
    let mut out = Vec::new();
    for n in n_min..=n_max {
        let h_res = resonance_field(alpha, n);
        let gamma = grover_closed_form(n, alpha, h_res, 0.0)?.gamma;
        let t_res = std::f64::consts::PI / (2.0 * gamma);
        out.extend([
            n as f64,
            uniform_gap_closed_form(n, alpha, beta),
            grover_gap_closed_form(n, alpha, beta, h_res, t_res),
            grover_gap_closed_form(n, alpha, beta, alpha, t),
        ]);
    }
    Ok(out)
}

fn js(r: qmcmc::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = groverGapCurve)]
pub fn grover_gap_curve_js(n: usize, alpha: f64, beta: f64, h: f64, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(grover_gap_curve(n, alpha, beta, h, t_max, points))
}

#[wasm_bindgen(js_name = markedMassTable)]
pub fn marked_mass_table_js(n_min: usize, n_max: usize, alpha: f64, betas: Vec<f64>) -> Result<Vec<f64>, JsError> {
    js(marked_mass_table(n_min, n_max, alpha, &betas))
}

#[wasm_bindgen(js_name = gapScalingTable)]
pub fn gap_scaling_table_js(n_min: usize, n_max: usize, alpha: f64, beta: f64, t: f64) -> Result<Vec<f64>, JsError> {
    js(gap_scaling_table(n_min, n_max, alpha, beta, t))
}
