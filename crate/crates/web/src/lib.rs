//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page generates a noisy ramp-with-step phase map, denoises it with a
//! chosen method and shows the wrapped phase next to the map of
//! `|re^2 + im^2 - 1|`. Images cross the boundary as RGBA bytes ready for
//! `ImageData`.

use std::f64::consts::PI;

use phasetv::experiment::{self, Method, Problem};
use phasetv::metrics::compute_metrics;
use phasetv::phase::{pythagorean_deviation, reconstruct};
use phasetv::synth::{NoiseSpec, SceneSpec};
use phasetv::{Field2D, ModelParams, SolveConfig, StrobelFilter};
use wasm_bindgen::prelude::*;

/// Grey RGBA pixels for `field`, mapping `[lo, hi]` onto black..white.
pub fn to_rgba(field: &Field2D, lo: f64, hi: f64) -> Vec<u8> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = Vec::with_capacity(4 * field.len());
    for &v in field.as_slice() {
        let g = (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8;
        out.extend_from_slice(&[g, g, g, 255]);
    }
    out
}

fn phase_rgba(field: &Field2D) -> Vec<u8> {
    to_rgba(field, -PI, PI)
}

pub fn parse_method(name: &str, sigma: f64) -> Result<Method, String> {
    match name {
        "fixed-point" => Ok(Method::FixedPoint),
        "gradient-descent" => Ok(Method::GradientDescent { tau: None }),
        "strobel-mean3" => Ok(Method::Strobel { filter: StrobelFilter::Mean3 }),
        "strobel-gaussian" => Ok(Method::Strobel { filter: StrobelFilter::Gaussian { sigma } }),
        other => Err(format!("unknown method {other:?}")),
    }
}

/// A generated problem kept alive between calls from the page.
#[wasm_bindgen]
pub struct Scene {
    problem: Problem,
}

impl Scene {
    pub fn build(size: usize, fringes: f64, snr_db: f64, seed: u32) -> Result<Scene, String> {
        let scene = SceneSpec {
            rows: size,
            cols: size,
            phase_range: 2.0 * PI * fringes,
            ..Default::default()
        };
        let noise = NoiseSpec { target_snr_db: snr_db, seed: seed as u64 };
        let problem = Problem::generate(&scene, &noise).map_err(|e| e.to_string())?;
        Ok(Scene { problem })
    }

    pub fn run(&self, method: &str, lambda3: f64, beta: f64, max_outer: usize, sigma: f64) -> Result<Denoised, String> {
        let method = parse_method(method, sigma)?;
        let config = SolveConfig {
            params: ModelParams { lambda3, beta, ..Default::default() },
            max_outer,
            ..Default::default()
        };
        let data = self.problem.noisy_pair();
        let out = experiment::denoise(&data, method, &config).map_err(|e| e.to_string())?;
        let psi = reconstruct(&out.pair).map_err(|e| e.to_string())?;
        let dev = pythagorean_deviation(&out.pair);
        let m = compute_metrics(&out.pair, &self.problem.clean_pair(), &self.problem.noisy).map_err(|e| e.to_string())?;
        let (iterations, converged) = match &out.report {
            Some(r) => (r.outer_iterations, r.converged),
            None => (0, true),
        };
        Ok(Denoised {
            phase: phase_rgba(psi.field()),
            deviation: to_rgba(&dev, 0.0, dev.max().max(1e-12)),
            deviation_max: dev.max(),
            iterations,
            converged,
            mse_real: m.mse_real,
            mse_im: m.mse_im,
            iqi_real: m.iqi_real,
            iqi_im: m.iqi_im,
            pyth_mean: m.pyth_mean,
        })
    }
}

#[wasm_bindgen]
impl Scene {
    /// Ramp with `fringes` wraps top to bottom and a step of pi down the middle.
    #[wasm_bindgen(constructor)]
    pub fn new(size: usize, fringes: f64, snr_db: f64, seed: u32) -> Result<Scene, JsError> {
        Scene::build(size, fringes, snr_db, seed).map_err(|e| JsError::new(&e))
    }

    pub fn size(&self) -> usize {
        self.problem.scene.rows
    }

    #[wasm_bindgen(js_name = achievedSnrDb)]
    pub fn achieved_snr_db(&self) -> f64 {
        self.problem.achieved_snr_db
    }

    #[wasm_bindgen(js_name = cleanRgba)]
    pub fn clean_rgba(&self) -> Vec<u8> {
        phase_rgba(self.problem.clean.field())
    }

    #[wasm_bindgen(js_name = noisyRgba)]
    pub fn noisy_rgba(&self) -> Vec<u8> {
        phase_rgba(self.problem.noisy.field())
    }

    /// `method` is one of `fixed-point`, `gradient-descent`, `strobel-mean3`
    /// or `strobel-gaussian` (which uses `sigma`).
    pub fn denoise(&self, method: &str, lambda3: f64, beta: f64, max_outer: usize, sigma: f64) -> Result<Denoised, JsError> {
        self.run(method, lambda3, beta, max_outer, sigma).map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen(getter_with_clone)]
pub struct Denoised {
    pub phase: Vec<u8>,
    /// Scaled so the largest deviation is white.
    pub deviation: Vec<u8>,
    #[wasm_bindgen(js_name = deviationMax)]
    pub deviation_max: f64,
    pub iterations: usize,
    pub converged: bool,
    #[wasm_bindgen(js_name = mseReal)]
    pub mse_real: f64,
    #[wasm_bindgen(js_name = mseIm)]
    pub mse_im: f64,
    #[wasm_bindgen(js_name = iqiReal)]
    pub iqi_real: f64,
    #[wasm_bindgen(js_name = iqiIm)]
    pub iqi_im: f64,
    #[wasm_bindgen(js_name = pythMean)]
    pub pyth_mean: f64,
}
