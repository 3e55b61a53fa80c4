//! Glue for the end-to-end workflow: synthetic problem generation, method
//! dispatch and the on-disk layout of problem and run directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::io::{read_field, write_field};
use crate::phase::{decompose, wrap, PhasePair, WrappedPhase};
use crate::solvers::{
    default_step, fixed_point_denoise, gradient_descent_denoise, strobel_denoise, SolveConfig, SolveReport,
    StrobelFilter,
};
use crate::synth::{add_noise, generate_scene, NoiseSpec, SceneSpec};

/// File names inside problem and run directories.
pub mod files {
    pub const ABSOLUTE_PHASE: &str = "absolute_phase.phf";
    pub const CLEAN_PHASE: &str = "clean_phase.phf";
    pub const CLEAN_REAL: &str = "clean_real.phf";
    pub const CLEAN_IM: &str = "clean_im.phf";
    pub const NOISY_PHASE: &str = "noisy_phase.phf";
    pub const NOISY_REAL: &str = "noisy_real.phf";
    pub const NOISY_IM: &str = "noisy_im.phf";
    pub const PROBLEM_JSON: &str = "problem.json";

    pub const RESULT_REAL: &str = "result_real.phf";
    pub const RESULT_IM: &str = "result_im.phf";
    pub const RESULT_PHASE: &str = "result_phase.phf";
    pub const PYTH_DEVIATION: &str = "pyth_deviation.phf";
    pub const TRACE_CSV: &str = "trace.csv";
    pub const REPORT_JSON: &str = "report.json";
    pub const METRICS_JSON: &str = "metrics.json";
}

/// A generated ground truth with its noisy observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub scene: SceneSpec,
    pub noise: NoiseSpec,
    pub absolute: Field2D,
    pub clean: WrappedPhase,
    pub noisy: WrappedPhase,
    pub achieved_snr_db: f64,
}

impl Problem {
    pub fn generate(scene: &SceneSpec, noise: &NoiseSpec) -> Result<Problem> {
        let absolute = generate_scene(scene)?;
        let clean = wrap(&absolute);
        let (noisy, achieved_snr_db) = add_noise(&clean, noise)?;
        Ok(Problem {
            scene: scene.clone(),
            noise: *noise,
            absolute,
            clean,
            noisy,
            achieved_snr_db,
        })
    }

    pub fn clean_pair(&self) -> PhasePair {
        decompose(&self.clean)
    }

    pub fn noisy_pair(&self) -> PhasePair {
        decompose(&self.noisy)
    }
}

/// Metadata written next to a generated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub scene: SceneSpec,
    pub noise: NoiseSpec,
    pub achieved_snr_db: f64,
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes every field of `problem` plus `problem.json` into `dir`.
pub fn write_problem(dir: &Path, problem: &Problem) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let clean = problem.clean_pair();
    let noisy = problem.noisy_pair();
    let outputs: [(&str, &Field2D); 7] = [
        (files::ABSOLUTE_PHASE, &problem.absolute),
        (files::CLEAN_PHASE, problem.clean.field()),
        (files::CLEAN_REAL, clean.real()),
        (files::CLEAN_IM, clean.im()),
        (files::NOISY_PHASE, problem.noisy.field()),
        (files::NOISY_REAL, noisy.real()),
        (files::NOISY_IM, noisy.im()),
    ];
    for (name, field) in outputs {
        write_field(&dir.join(name), field)?;
    }
    let info = ProblemInfo {
        scene: problem.scene.clone(),
        noise: problem.noise,
        achieved_snr_db: problem.achieved_snr_db,
    };
    write_json(&dir.join(files::PROBLEM_JSON), &info)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serialises");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn read_pair(dir: &Path, real: &str, im: &str) -> Result<PhasePair> {
    PhasePair::new(read_field(&dir.join(real))?, read_field(&dir.join(im))?)
}

pub fn read_phase(path: &Path) -> Result<WrappedPhase> {
    WrappedPhase::new(read_field(path)?)
}

/// The denoiser to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Method {
    FixedPoint,
    /// `tau: None` selects [`default_step`].
    GradientDescent {
        #[serde(default)]
        tau: Option<f64>,
    },
    Strobel {
        #[serde(default)]
        filter: StrobelFilter,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::FixedPoint => "fixed-point",
            Method::GradientDescent { .. } => "gradient-descent",
            Method::Strobel { .. } => "strobel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Denoised {
    pub pair: PhasePair,
    /// Absent for the direct (non-iterative) method.
    pub report: Option<SolveReport>,
    /// Step size actually used by gradient descent.
    pub tau: Option<f64>,
}

pub fn denoise(data: &PhasePair, method: Method, config: &SolveConfig) -> Result<Denoised> {
    match method {
        Method::FixedPoint => {
            let (pair, report) = fixed_point_denoise(data, config)?;
            Ok(Denoised { pair, report: Some(report), tau: None })
        }
        Method::GradientDescent { tau } => {
            let tau = tau.unwrap_or_else(|| default_step(data, &config.params));
            let (pair, report) = gradient_descent_denoise(data, config, tau)?;
            Ok(Denoised { pair, report: Some(report), tau: Some(tau) })
        }
        Method::Strobel { filter } => Ok(Denoised {
            pair: strobel_denoise(data, filter)?,
            report: None,
            tau: None,
        }),
    }
}

/// Everything needed for one generate-denoise-evaluate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scene: SceneSpec,
    pub noise: NoiseSpec,
    pub solver: Method,
    #[serde(default)]
    pub solve: SolveConfig,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.solve.validate()?;
        if let Method::GradientDescent { tau: Some(t) } = self.solver {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!("tau must be positive, got {t}")));
            }
        }
        Ok(())
    }
}
