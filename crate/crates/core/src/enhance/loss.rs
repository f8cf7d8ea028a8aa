use std::f64::consts::LN_10;

use crate::error::Result;
use crate::metrics::si_sdr_parts;

/// SI-SDR of `estimate` against `reference` (dB) and its gradient with respect to `estimate`.
///
/// With projection `p` and residual `e = ŝ − p`, the value is
/// `10·log10‖p‖² − 10·log10‖e‖²` and the gradient is
/// `(20 / ln 10)·(p/‖p‖² − e/‖e‖²)`. Where the ratio is clamped the gradient is zero.
pub fn si_sdr_value_and_grad(estimate: &[f64], reference: &[f64]) -> Result<(f64, Vec<f64>)> {
    let parts = si_sdr_parts(estimate, reference)?;
    if parts.clamped {
        return Ok((parts.value, vec![0.0; estimate.len()]));
    }
    let c = 20.0 / LN_10;
    let grad = parts
        .projection
        .iter()
        .zip(&parts.residual)
        .map(|(p, e)| c * (p / parts.projection_energy - e / parts.residual_energy))
        .collect();
    Ok((parts.value, grad))
}
