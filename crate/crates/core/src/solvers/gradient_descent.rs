use web_time::Instant;

use super::{first_non_finite, relative_change, SolveConfig, SolveReport};
use crate::energy::{evaluate, gradient, ModelParams};
use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::phase::PhasePair;

/// Consecutive steps with >10% energy growth tolerated before giving up.
const GROWTH_STREAK: usize = 5;
const GROWTH_FACTOR: f64 = 1.1;
/// Iterates this large are treated as overflow before squaring them can
/// produce infinities inside the stencils.
const BLOW_UP: f64 = 1e100;

/// Conservative explicit step `0.9 / L` with
/// `L = max(l1, l2) + 6 l3 s_max^2 + 8 / sqrt(beta)`, where `s_max` is the
/// largest `re^2 + im^2` of `start`.
pub fn default_step(start: &PhasePair, params: &ModelParams) -> f64 {
    let s_max = start
        .real()
        .as_slice()
        .iter()
        .zip(start.im().as_slice())
        .map(|(x, y)| x * x + y * y)
        .fold(0.0, f64::max);
    let bound = params.lambda1.max(params.lambda2) + 2.0 * params.lambda3 * 3.0 * s_max * s_max + 8.0 / params.beta.sqrt();
    0.9 / bound
}

/// Explicit iteration `u <- u - tau * grad F(u)` from `u^0 = data`.
pub fn gradient_descent_denoise(data: &PhasePair, config: &SolveConfig, tau: f64) -> Result<(PhasePair, SolveReport)> {
    config.validate()?;
    data.real().ensure_same_shape(data.im())?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!("step size tau must be positive, got {tau}")));
    }
    let started = Instant::now();
    let params = &config.params;
    let (m, n) = data.shape();
    let mut report = SolveReport::new(config.record_energy);
    let mut current = data.clone();
    let mut energy = evaluate(&current, data, params)?;
    if let Some(e) = report.energies.as_mut() {
        e.push(energy);
    }
    let mut growth_streak = 0;

    for k in 1..=config.max_outer {
        let overflow = |report: &mut SolveReport| {
            report.wall_time_s = started.elapsed().as_secs_f64();
            Error::Diverged {
                method: "gradient-descent",
                iteration: k,
                reason: format!("arithmetic overflow; try a smaller tau than {tau:e}"),
                partial: Box::new(report.clone()),
            }
        };
        let g = match gradient(&current, data, params) {
            Err(Error::NonFinite { .. }) => return Err(overflow(&mut report)),
            other => other?,
        };
        let step = |u: &Field2D, d: &Field2D| -> Vec<f64> {
            u.as_slice().iter().zip(d.as_slice()).map(|(a, b)| a - tau * b).collect()
        };
        let re = step(current.real(), g.real());
        let im = step(current.im(), g.im());

        let diverged = |reason: String, report: SolveReport| Error::Diverged {
            method: "gradient-descent",
            iteration: k,
            reason: format!("{reason}; try a smaller tau than {tau:e}"),
            partial: Box::new(report),
        };
        let blown = |v: &[f64]| first_non_finite(v).or_else(|| v.iter().position(|x| x.abs() > BLOW_UP));
        if let Some(bad) = blown(&re).or_else(|| blown(&im)) {
            report.wall_time_s = started.elapsed().as_secs_f64();
            return Err(diverged(format!("value overflow at pixel ({}, {})", bad / n, bad % n), report));
        }

        let rel = relative_change(&re, &im, current.real().as_slice(), current.im().as_slice());
        current = PhasePair::new(Field2D::new(m, n, re)?, Field2D::new(m, n, im)?)?;
        let next = evaluate(&current, data, params)?;
        if !next.total.is_finite() {
            return Err(overflow(&mut report));
        }
        report.relative_changes.push(rel);
        report.outer_iterations = k;
        if let Some(e) = report.energies.as_mut() {
            e.push(next);
        }

        if next.total > GROWTH_FACTOR * energy.total {
            growth_streak += 1;
            if growth_streak >= GROWTH_STREAK {
                report.wall_time_s = started.elapsed().as_secs_f64();
                return Err(diverged(
                    format!("energy grew by more than 10% for {GROWTH_STREAK} consecutive steps"),
                    report,
                ));
            }
        } else {
            growth_streak = 0;
        }
        energy = next;

        if rel < config.epsilon {
            report.converged = true;
            break;
        }
    }
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok((current, report))
}
