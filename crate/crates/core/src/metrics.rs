//! Restoration quality metrics for a denoised channel pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::phase::{pythagorean_deviation, reconstruct, PhasePair, WrappedPhase};
use crate::synth::snr_db;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub mse_real: f64,
    pub mse_im: f64,
    pub iqi_real: f64,
    pub iqi_im: f64,
    /// SNR of the noisy input against the reference, dB.
    pub snr_db: f64,
    pub pyth_mean: f64,
    pub pyth_max: f64,
}

/// Mean squared difference.
pub fn mse(a: &Field2D, b: &Field2D) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let sum: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// `1 - sum (y - y_hat)^2 / sum y^2` with `y` the reference.
///
/// This is the error-energy form, not the Wang–Bovik universal quality
/// index; it is not symmetric in its arguments.
pub fn iqi(result: &Field2D, reference: &Field2D) -> Result<Option<f64>> {
    reference.ensure_same_shape(result)?;
    let energy = reference.sum_of_squares();
    if energy == 0.0 {
        return Ok(None);
    }
    let err: f64 = reference
        .as_slice()
        .iter()
        .zip(result.as_slice())
        .map(|(y, r)| (y - r) * (y - r))
        .sum();
    Ok(Some(1.0 - err / energy))
}

pub fn compute_metrics(result: &PhasePair, reference: &PhasePair, noisy: &WrappedPhase) -> Result<MetricsRecord> {
    result.ensure_same_shape(reference)?;
    reference.real().ensure_same_shape(noisy.field())?;
    let iqi_real = iqi(result.real(), reference.real())?.ok_or(Error::ZeroReference { channel: "real" })?;
    let iqi_im = iqi(result.im(), reference.im())?.ok_or(Error::ZeroReference { channel: "imaginary" })?;
    let clean = reconstruct(reference)?;
    let dev = pythagorean_deviation(result);
    Ok(MetricsRecord {
        mse_real: mse(result.real(), reference.real())?,
        mse_im: mse(result.im(), reference.im())?,
        iqi_real,
        iqi_im,
        snr_db: snr_db(&clean, noisy)?,
        pyth_mean: dev.mean(),
        pyth_max: dev.max(),
    })
}
