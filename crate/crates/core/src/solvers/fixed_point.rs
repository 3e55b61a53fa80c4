use web_time::Instant;

use super::{first_non_finite, relative_change, SolveConfig, SolveReport};
use crate::energy::{check_diagonal_dominance, evaluate, ModelParams};
use crate::error::{Error, Result};
use crate::grid::{grad_magnitudes, Field2D};
use crate::phase::PhasePair;

/// Neighbour weights `1 / sqrt(|grad w|^2 + beta)` at the four stencil
/// positions, frozen for one outer iteration.
struct Diffusivities {
    east: Vec<f64>,
    west: Vec<f64>,
    north: Vec<f64>,
    south: Vec<f64>,
}

impl Diffusivities {
    fn new(w: &Field2D, beta: f64) -> Self {
        let g = grad_magnitudes(w);
        let inv = |f: &Field2D| f.as_slice().iter().map(|v| 1.0 / (v * v + beta).sqrt()).collect();
        Self {
            east: inv(&g.east),
            west: inv(&g.west),
            north: inv(&g.north),
            south: inv(&g.south),
        }
    }
}

/// Frozen linear system of one channel: per pixel
/// `(base + sum c) u - sum c u_nb = rhs`.
struct ChannelSystem {
    coef: Diffusivities,
    base: Vec<f64>,
    rhs: Vec<f64>,
}

impl ChannelSystem {
    fn new(own: &Field2D, other: &Field2D, data: &Field2D, lambda: f64, params: &ModelParams) -> Self {
        let l3 = params.lambda3;
        let (u, v, d) = (own.as_slice(), other.as_slice(), data.as_slice());
        Self {
            coef: Diffusivities::new(own, params.beta),
            base: u.iter().zip(v).map(|(a, b)| lambda + 2.0 * l3 * (a * a + b * b)).collect(),
            rhs: u.iter().zip(d).map(|(a, f)| lambda * f + 2.0 * l3 * a).collect(),
        }
    }

    /// One lexicographic Gauss–Seidel sweep in place. West and south
    /// neighbours already hold this sweep's values; ghost reads fall back
    /// on the pixel's own current value.
    fn sweep(&self, u: &mut [f64], rows: usize, cols: usize) {
        for i in 0..rows {
            for j in 0..cols {
                let p = i * cols + j;
                let at = |r: usize, c: usize| r * cols + c;
                let east = if i + 1 < rows { u[at(i + 1, j)] } else { u[p] };
                let west = if i > 0 { u[at(i - 1, j)] } else { u[p] };
                let north = if j + 1 < cols { u[at(i, j + 1)] } else { u[p] };
                let south = if j > 0 { u[at(i, j - 1)] } else { u[p] };
                let c = &self.coef;
                let num = c.east[p] * east + c.west[p] * west + c.north[p] * north + c.south[p] * south + self.rhs[p];
                let den = self.base[p] + c.east[p] + c.west[p] + c.north[p] + c.south[p];
                u[p] = num / den;
            }
        }
    }
}

fn relax(current: &PhasePair, data: &PhasePair, params: &ModelParams, sweeps: usize) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = current.shape();
    let sys_re = ChannelSystem::new(current.real(), current.im(), data.real(), params.lambda1, params);
    let sys_im = ChannelSystem::new(current.im(), current.real(), data.im(), params.lambda2, params);
    let mut re = current.real().as_slice().to_vec();
    let mut im = current.im().as_slice().to_vec();
    for _ in 0..sweeps {
        sys_re.sweep(&mut re, m, n);
        sys_im.sweep(&mut im, m, n);
    }
    (re, im)
}

/// One outer iteration: freeze diffusivities and coupling at `current`,
/// then relax both channel systems with `sweeps` Gauss–Seidel passes.
pub fn fixed_point_step(current: &PhasePair, data: &PhasePair, params: &ModelParams, sweeps: usize) -> Result<PhasePair> {
    current.ensure_same_shape(data)?;
    params.validate()?;
    let (m, n) = current.shape();
    let (re, im) = relax(current, data, params, sweeps);
    PhasePair::new(Field2D::new(m, n, re)?, Field2D::new(m, n, im)?)
}

/// Lagged-diffusivity fixed-point denoiser started from `u^0 = data`.
pub fn fixed_point_denoise(data: &PhasePair, config: &SolveConfig) -> Result<(PhasePair, SolveReport)> {
    config.validate()?;
    data.real().ensure_same_shape(data.im())?;
    let started = Instant::now();
    let params = &config.params;
    let (m, n) = data.shape();
    let mut report = SolveReport::new(config.record_energy);
    let mut current = data.clone();
    if let Some(e) = report.energies.as_mut() {
        e.push(evaluate(&current, data, params)?);
    }
    let mut min_margin = f64::INFINITY;

    for k in 1..=config.max_outer {
        min_margin = min_margin.min(check_diagonal_dominance(&current, params)?.margin);
        report.min_dominance_margin = Some(min_margin);

        let (re, im) = relax(&current, data, params, config.gs_sweeps_per_outer);
        if let Some(bad) = first_non_finite(&re).or_else(|| first_non_finite(&im)) {
            report.wall_time_s = started.elapsed().as_secs_f64();
            return Err(Error::Diverged {
                method: "fixed-point",
                iteration: k,
                reason: format!("non-finite value at pixel ({}, {})", bad / n, bad % n),
                partial: Box::new(report),
            });
        }

        let rel = relative_change(&re, &im, current.real().as_slice(), current.im().as_slice());
        current = PhasePair::new(Field2D::new(m, n, re)?, Field2D::new(m, n, im)?)?;
        report.relative_changes.push(rel);
        report.outer_iterations = k;
        if let Some(e) = report.energies.as_mut() {
            e.push(evaluate(&current, data, params)?);
        }
        if rel < config.epsilon {
            report.converged = true;
            break;
        }
    }
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok((current, report))
}
