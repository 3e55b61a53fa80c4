//! On-disk run report, convergence trace and comparison table.

use std::path::Path;

use anyhow::{Context, Result};
use phasetv::experiment::Method;
use phasetv::{MetricsRecord, SolveConfig, SolveReport, StrobelFilter};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub iteration: usize,
    pub reason: String,
}

/// Everything not reproducible bit-for-bit lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub solve: SolveConfig,
    pub tau: Option<f64>,
    pub filter: Option<StrobelFilter>,
    pub normalize_amplitude: bool,
    /// `None` for the direct method.
    pub converged: Option<bool>,
    pub outer_iterations: Option<usize>,
    pub final_relative_change: Option<f64>,
    pub min_dominance_margin: Option<f64>,
    pub diverged: Option<Divergence>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(method: Method, solve: &SolveConfig, normalize_amplitude: bool) -> Self {
        let (tau, filter) = match method {
            Method::GradientDescent { tau } => (tau, None),
            Method::Strobel { filter } => (None, Some(filter)),
            Method::FixedPoint => (None, None),
        };
        Self {
            method: method.name().to_string(),
            solve: *solve,
            tau,
            filter,
            normalize_amplitude,
            converged: None,
            outer_iterations: None,
            final_relative_change: None,
            min_dominance_margin: None,
            diverged: None,
            timing: Timing { wall_time_s: 0.0 },
        }
    }

    pub fn absorb(&mut self, report: &SolveReport) {
        self.converged = Some(report.converged);
        self.outer_iterations = Some(report.outer_iterations);
        self.final_relative_change = report.final_relative_change();
        self.min_dominance_margin = report.min_dominance_margin;
        self.timing.wall_time_s = report.wall_time_s;
    }
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iter: usize,
    rel_change: Option<f64>,
    energy_total: f64,
    energy_fit_real: f64,
    energy_fit_im: f64,
    energy_pyth: f64,
    energy_tv_real: f64,
    energy_tv_im: f64,
}

/// One row per iterate; row 0 is the starting point and has no relative change.
pub fn write_trace(path: &Path, report: &SolveReport) -> Result<()> {
    let energies = report.energies.as_deref().unwrap_or_default();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (k, e) in energies.iter().enumerate() {
        w.serialize(TraceRow {
            iter: k,
            rel_change: k.checked_sub(1).and_then(|p| report.relative_changes.get(p).copied()),
            energy_total: e.total,
            energy_fit_real: e.fit_real,
            energy_fit_im: e.fit_im,
            energy_pyth: e.pythagoras,
            energy_tv_real: e.tv_real,
            energy_tv_im: e.tv_im,
        })?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub method: String,
    pub mse_real: f64,
    pub mse_im: f64,
    pub iqi_real: f64,
    pub iqi_im: f64,
    pub pyth_mean: f64,
    pub pyth_max: f64,
    pub iterations: Option<usize>,
    pub wall_time: f64,
}

impl CompareRow {
    pub fn new(report: &RunReport, metrics: &MetricsRecord) -> Self {
        Self {
            method: report.method.clone(),
            mse_real: metrics.mse_real,
            mse_im: metrics.mse_im,
            iqi_real: metrics.iqi_real,
            iqi_im: metrics.iqi_im,
            pyth_mean: metrics.pyth_mean,
            pyth_max: metrics.pyth_max,
            iterations: report.outer_iterations,
            wall_time: report.timing.wall_time_s,
        }
    }
}
