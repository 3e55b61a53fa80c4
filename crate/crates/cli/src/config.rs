//! `--config` files and flag overrides.

use std::path::Path;

use anyhow::Result;
use phasetv::experiment::{read_json, Method};
use phasetv::synth::{NoiseSpec, SceneKind, SceneSpec};
use phasetv::{SolveConfig, StrobelFilter};
use serde::Deserialize;

use crate::commands::UsageError;
use crate::{DenoiseArgs, FilterArg, GenerateArgs, MethodArg, SceneArg};

/// Any subset of an experiment file. Unknown keys (such as `output_dir`)
/// are ignored so a full experiment file can be passed to any subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct PartialConfig {
    pub scene: Option<SceneSpec>,
    pub noise: Option<NoiseSpec>,
    pub solver: Option<Method>,
    pub solve: Option<SolveConfig>,
}

pub fn load(path: Option<&Path>) -> Result<PartialConfig> {
    Ok(match path {
        Some(p) => read_json(p)?,
        None => PartialConfig::default(),
    })
}

pub fn generation(args: &GenerateArgs) -> Result<(SceneSpec, NoiseSpec)> {
    let file = load(args.config.as_deref())?;
    let mut scene = file.scene.unwrap_or_default();
    match (args.scene, &args.expr) {
        (Some(SceneArg::Ramp), _) => scene.kind = SceneKind::RampWithVerticalJump,
        (Some(SceneArg::Gaussian), _) => scene.kind = SceneKind::GaussianPeak,
        (Some(SceneArg::Custom), Some(e)) => scene.kind = SceneKind::CustomExpression { expression: e.clone() },
        (Some(SceneArg::Custom), None) => return Err(UsageError("--scene custom needs --expr".into()).into()),
        (None, Some(e)) => scene.kind = SceneKind::CustomExpression { expression: e.clone() },
        (None, None) => {}
    }
    if let Some(v) = args.rows {
        scene.rows = v;
    }
    if let Some(v) = args.cols {
        scene.cols = v;
    }
    if let Some(v) = args.phase_range {
        scene.phase_range = v;
    }
    if let Some(v) = args.jump_height {
        scene.jump_height = v;
    }
    let target_snr_db = args
        .snr_db
        .or(file.noise.map(|n| n.target_snr_db))
        .ok_or_else(|| UsageError("--snr-db is required (or a noise section in --config)".into()))?;
    let seed = args.seed.or(file.noise.map(|n| n.seed)).unwrap_or(0);
    if args.seed.is_some() {
        scene.seed = seed;
    }
    Ok((scene, NoiseSpec { target_snr_db, seed }))
}

pub fn solving(args: &DenoiseArgs) -> Result<(Method, SolveConfig)> {
    let file = load(args.config.as_deref())?;
    let mut method = file.solver.unwrap_or(Method::FixedPoint);
    match args.method {
        Some(MethodArg::FixedPoint) => method = Method::FixedPoint,
        Some(MethodArg::GradientDescent) if !matches!(method, Method::GradientDescent { .. }) => {
            method = Method::GradientDescent { tau: None }
        }
        Some(MethodArg::Strobel) if !matches!(method, Method::Strobel { .. }) => {
            method = Method::Strobel { filter: StrobelFilter::Mean3 }
        }
        _ => {}
    }
    match &mut method {
        Method::GradientDescent { tau } => {
            if args.tau.is_some() {
                *tau = args.tau;
            }
        }
        Method::Strobel { filter } => {
            let sigma = args.sigma.or(match filter {
                StrobelFilter::Gaussian { sigma } => Some(*sigma),
                StrobelFilter::Mean3 => None,
            });
            match (args.filter, sigma) {
                (Some(FilterArg::Mean3), _) => *filter = StrobelFilter::Mean3,
                (Some(FilterArg::Gaussian), Some(s)) => *filter = StrobelFilter::Gaussian { sigma: s },
                (Some(FilterArg::Gaussian), None) => {
                    return Err(UsageError("--filter gaussian needs --sigma".into()).into())
                }
                (None, Some(s)) if args.sigma.is_some() => *filter = StrobelFilter::Gaussian { sigma: s },
                (None, _) => {}
            }
        }
        Method::FixedPoint => {}
    }
    if args.tau.is_some() && !matches!(method, Method::GradientDescent { .. }) {
        return Err(UsageError("--tau only applies to --method gradient-descent".into()).into());
    }
    if (args.filter.is_some() || args.sigma.is_some()) && !matches!(method, Method::Strobel { .. }) {
        return Err(UsageError("--filter/--sigma only apply to --method strobel".into()).into());
    }

    let mut solve = file.solve.unwrap_or_default();
    let p = &mut solve.params;
    for (flag, slot) in [
        (args.lambda1, &mut p.lambda1),
        (args.lambda2, &mut p.lambda2),
        (args.lambda3, &mut p.lambda3),
        (args.beta, &mut p.beta),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(v) = args.epsilon {
        solve.epsilon = v;
    }
    if let Some(v) = args.max_outer {
        solve.max_outer = v;
    }
    if let Some(v) = args.sweeps {
        solve.gs_sweeps_per_outer = v;
    }
    Ok((method, solve))
}
