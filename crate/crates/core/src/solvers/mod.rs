//! Denoisers for a noisy channel pair.
//!
//! * [`fixed_point_denoise`]: lagged-diffusivity fixed point, one linear
//!   system per channel and outer iteration, relaxed with Gauss–Seidel.
//! * [`gradient_descent_denoise`]: explicit descent on the same energy.
//! * [`strobel_denoise`]: independent linear smoothing of each channel.

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyBreakdown, ModelParams};
use crate::error::{Error, Result};

mod fixed_point;
mod gradient_descent;
mod strobel;

pub use fixed_point::{fixed_point_denoise, fixed_point_step};
pub use gradient_descent::{default_step, gradient_descent_denoise};
pub use strobel::{smooth_field, strobel_denoise, StrobelFilter};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub params: ModelParams,
    /// Stop once `||u^{k+1} - u^k|| / ||u^k||` drops below this.
    pub epsilon: f64,
    pub max_outer: usize,
    /// Gauss–Seidel sweeps between diffusivity refreshes.
    pub gs_sweeps_per_outer: usize,
    pub record_energy: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            epsilon: 1e-7,
            max_outer: 20_000,
            gs_sweeps_per_outer: 1,
            record_energy: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be at least 1".into()));
        }
        if self.gs_sweeps_per_outer == 0 {
            return Err(Error::InvalidParameter("gs_sweeps_per_outer must be at least 1".into()));
        }
        Ok(())
    }
}

/// Convergence trace of an iterative solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub outer_iterations: usize,
    /// One entry per outer iteration.
    pub relative_changes: Vec<f64>,
    /// Energy at the initial iterate followed by one entry per outer
    /// iteration; present only when requested.
    pub energies: Option<Vec<EnergyBreakdown>>,
    /// Smallest diagonal-dominance margin seen over all outer iterations
    /// (fixed-point solver only).
    pub min_dominance_margin: Option<f64>,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub(crate) fn new(record_energy: bool) -> Self {
        Self {
            converged: false,
            outer_iterations: 0,
            relative_changes: Vec::new(),
            energies: record_energy.then(Vec::new),
            min_dominance_margin: None,
            wall_time_s: 0.0,
        }
    }

    pub fn final_relative_change(&self) -> Option<f64> {
        self.relative_changes.last().copied()
    }
}

/// `||a - b|| / ||b||` over both channels.
pub(crate) fn relative_change(new_re: &[f64], new_im: &[f64], old_re: &[f64], old_im: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut base = 0.0;
    for (a, b) in new_re.iter().zip(old_re).chain(new_im.iter().zip(old_im)) {
        diff += (a - b) * (a - b);
        base += b * b;
    }
    if base == 0.0 {
        return if diff == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (diff / base).sqrt()
}

pub(crate) fn first_non_finite(values: &[f64]) -> Option<usize> {
    values.iter().position(|v| !v.is_finite())
}
