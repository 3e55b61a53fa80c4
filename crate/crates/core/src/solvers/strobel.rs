use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::phase::PhasePair;

/// Linear smoother applied to each channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StrobelFilter {
    /// 3x3 box average.
    #[default]
    Mean3,
    /// Separable Gaussian truncated at `ceil(3 sigma)`.
    Gaussian { sigma: f64 },
}

fn clamp_read(f: &Field2D, i: isize, j: isize) -> f64 {
    let r = i.clamp(0, f.rows() as isize - 1) as usize;
    let c = j.clamp(0, f.cols() as isize - 1) as usize;
    f.get(r, c)
}

fn mean3(f: &Field2D) -> Field2D {
    let (m, n) = f.shape();
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m as isize {
        for j in 0..n as isize {
            let mut acc = 0.0;
            for di in -1..=1 {
                for dj in -1..=1 {
                    acc += clamp_read(f, i + di, j + dj);
                }
            }
            out.push(acc / 9.0);
        }
    }
    Field2D::from_parts(m, n, out)
}

fn gaussian(f: &Field2D, sigma: f64) -> Field2D {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    let (m, n) = f.shape();
    let mut tmp = Vec::with_capacity(m * n);
    for i in 0..m as isize {
        for j in 0..n as isize {
            tmp.push((-radius..=radius).zip(&weights).map(|(k, w)| w * clamp_read(f, i + k, j)).sum::<f64>());
        }
    }
    let tmp = Field2D::from_parts(m, n, tmp);
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m as isize {
        for j in 0..n as isize {
            out.push((-radius..=radius).zip(&weights).map(|(k, w)| w * clamp_read(&tmp, i, j + k)).sum::<f64>());
        }
    }
    Field2D::from_parts(m, n, out)
}

/// Applies `filter` to a single field with replicate borders.
pub fn smooth_field(f: &Field2D, filter: StrobelFilter) -> Result<Field2D> {
    match filter {
        StrobelFilter::Mean3 => Ok(mean3(f)),
        StrobelFilter::Gaussian { sigma } if sigma.is_finite() && sigma > 0.0 => Ok(gaussian(f, sigma)),
        StrobelFilter::Gaussian { sigma } => Err(Error::InvalidParameter(format!(
            "gaussian sigma must be positive, got {sigma}"
        ))),
    }
}

/// Smooths both channels independently; no coupling, no renormalisation.
pub fn strobel_denoise(data: &PhasePair, filter: StrobelFilter) -> Result<PhasePair> {
    PhasePair::new(smooth_field(data.real(), filter)?, smooth_field(data.im(), filter)?)
}
