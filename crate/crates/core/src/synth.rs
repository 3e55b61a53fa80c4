//! Synthetic absolute-phase scenes and SNR-calibrated additive phase noise.

use std::f64::consts::PI;

use evalexpr::{ContextWithMutableVariables, HashMapContext, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::phase::{wrap, wrapped_difference, WrappedPhase};

/// Smallest side accepted for generated scenes.
pub const MIN_SCENE_SIDE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SceneKind {
    /// Linear ramp down the rows plus a step of `jump_height` across the
    /// middle column.
    RampWithVerticalJump,
    /// Isotropic Gaussian bump centred in the grid.
    GaussianPeak,
    /// `phi(i, j)` given as an arithmetic expression in `i`, `j`, `rows`,
    /// `cols`, `phase_range`, `jump_height` and `pi`, e.g.
    /// `phase_range * math::sin(j / cols * pi)`.
    CustomExpression { expression: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(flatten)]
    pub kind: SceneKind,
    pub rows: usize,
    pub cols: usize,
    /// Peak-to-peak extent of the smooth part of `phi`, radians.
    pub phase_range: f64,
    /// Height of the vertical step, radians.
    pub jump_height: f64,
    /// Carried for provenance; the built-in scenes are deterministic.
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            kind: SceneKind::RampWithVerticalJump,
            rows: 128,
            cols: 128,
            phase_range: 6.0 * PI,
            jump_height: PI,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows < MIN_SCENE_SIDE || self.cols < MIN_SCENE_SIDE {
            return Err(Error::InvalidParameter(format!(
                "scenes need at least {MIN_SCENE_SIDE}x{MIN_SCENE_SIDE} pixels, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.phase_range.is_finite() || !self.jump_height.is_finite() {
            return Err(Error::InvalidParameter("phase_range and jump_height must be finite".into()));
        }
        Ok(())
    }

    /// First column on the far side of the step.
    pub fn jump_column(&self) -> usize {
        self.cols / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub target_snr_db: f64,
    pub seed: u64,
}

/// Absolute phase `phi` for `spec`, in radians.
pub fn generate_scene(spec: &SceneSpec) -> Result<Field2D> {
    spec.validate()?;
    let (m, n) = (spec.rows, spec.cols);
    match &spec.kind {
        SceneKind::RampWithVerticalJump => {
            let mid = spec.jump_column();
            Field2D::from_fn(m, n, |i, j| {
                let step = if j >= mid { spec.jump_height } else { 0.0 };
                spec.phase_range * (i as f64 / (m - 1) as f64) + step
            })
        }
        SceneKind::GaussianPeak => {
            let (ci, cj) = ((m - 1) as f64 / 2.0, (n - 1) as f64 / 2.0);
            let sigma = m.min(n) as f64 / 6.0;
            Field2D::from_fn(m, n, |i, j| {
                let r2 = (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
                spec.phase_range * (-r2 / (2.0 * sigma * sigma)).exp()
            })
        }
        SceneKind::CustomExpression { expression } => custom_scene(spec, expression),
    }
}

fn custom_scene(spec: &SceneSpec, expression: &str) -> Result<Field2D> {
    let expr_err = |e: evalexpr::EvalexprError| Error::Expression(format!("{expression:?}: {e}"));
    let tree = evalexpr::build_operator_tree(expression).map_err(expr_err)?;
    let mut ctx = HashMapContext::new();
    let consts = [
        ("rows", spec.rows as f64),
        ("cols", spec.cols as f64),
        ("phase_range", spec.phase_range),
        ("jump_height", spec.jump_height),
        ("pi", PI),
    ];
    for (name, v) in consts {
        ctx.set_value(name.into(), Value::Float(v)).map_err(expr_err)?;
    }
    let mut data = Vec::with_capacity(spec.rows * spec.cols);
    for i in 0..spec.rows {
        for j in 0..spec.cols {
            ctx.set_value("i".into(), Value::Float(i as f64)).map_err(expr_err)?;
            ctx.set_value("j".into(), Value::Float(j as f64)).map_err(expr_err)?;
            data.push(tree.eval_number_with_context(&ctx).map_err(expr_err)?);
        }
    }
    Field2D::new(spec.rows, spec.cols, data)
}

/// `10 log10(sum psi^2 / sum wrap(noisy - psi)^2)`.
pub fn snr_db(clean: &WrappedPhase, noisy: &WrappedPhase) -> Result<f64> {
    let signal = clean.field().sum_of_squares();
    let noise = wrapped_difference(noisy, clean)?.sum_of_squares();
    Ok(10.0 * (signal / noise).log10())
}

/// Adds i.i.d. Gaussian phase noise rescaled to hit `spec.target_snr_db` on
/// the realised sample, then re-wraps. Returns the noisy phase and the SNR
/// measured on it.
pub fn add_noise(psi: &WrappedPhase, spec: &NoiseSpec) -> Result<(WrappedPhase, f64)> {
    if !spec.target_snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target SNR must be finite, got {}",
            spec.target_snr_db
        )));
    }
    let signal = psi.field().sum_of_squares();
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws: Vec<f64> = (0..psi.field().len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let drawn_power: f64 = draws.iter().map(|z| z * z).sum();
    let scale = (signal / (drawn_power * 10f64.powf(spec.target_snr_db / 10.0))).sqrt();
    let (m, n) = psi.shape();
    let summed = Field2D::new(
        m,
        n,
        psi.field().as_slice().iter().zip(&draws).map(|(p, z)| p + scale * z).collect(),
    )?;
    let noisy = wrap(&summed);
    let achieved = snr_db(psi, &noisy)?;
    Ok((noisy, achieved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::wrap;
    use proptest::prelude::*;

    fn ramp(rows: usize, cols: usize, range: f64, jump: f64) -> SceneSpec {
        SceneSpec {
            kind: SceneKind::RampWithVerticalJump,
            rows,
            cols,
            phase_range: range,
            jump_height: jump,
            seed: 0,
        }
    }

    #[test]
    fn flat_ramp_is_a_pure_step() {
        let phi = generate_scene(&ramp(16, 20, 0.0, PI)).unwrap();
        for i in 0..16 {
            for j in 0..20 {
                assert_eq!(phi.get(i, j), if j >= 10 { PI } else { 0.0 });
            }
        }
    }

    #[test]
    fn six_pi_ramp_has_three_fringes() {
        let phi = generate_scene(&ramp(64, 64, 6.0 * PI, 0.0)).unwrap();
        let psi = wrap(&phi);
        for j in [0, 31, 63] {
            let jumps = (1..64)
                .filter(|&i| (psi.field().get(i, j) - psi.field().get(i - 1, j)).abs() > PI)
                .count();
            assert_eq!(jumps, 3, "column {j}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [SceneKind::RampWithVerticalJump, SceneKind::GaussianPeak] {
            let spec = SceneSpec { kind, ..Default::default() };
            assert_eq!(generate_scene(&spec).unwrap(), generate_scene(&spec).unwrap());
        }
    }

    #[test]
    fn gaussian_peak_is_centred() {
        let spec = SceneSpec { kind: SceneKind::GaussianPeak, rows: 33, cols: 33, phase_range: 10.0, ..Default::default() };
        let phi = generate_scene(&spec).unwrap();
        assert_eq!(phi.get(16, 16), 10.0);
        assert_eq!(phi.get(0, 16), phi.get(32, 16));
        assert!(phi.get(0, 0) < phi.get(8, 8));
    }

    #[test]
    fn custom_expression_scene() {
        let spec = SceneSpec {
            kind: SceneKind::CustomExpression { expression: "phase_range * i / (rows - 1) + 0.5 * j".into() },
            rows: 16,
            cols: 16,
            phase_range: 3.0,
            ..Default::default()
        };
        let phi = generate_scene(&spec).unwrap();
        assert!((phi.get(15, 2) - 4.0).abs() < 1e-12);
        let bad = SceneSpec { kind: SceneKind::CustomExpression { expression: "i +".into() }, ..spec };
        assert!(matches!(generate_scene(&bad), Err(Error::Expression(_))));
    }

    #[test]
    fn small_scenes_are_rejected() {
        assert!(generate_scene(&ramp(8, 64, 1.0, 1.0)).is_err());
    }

    #[test]
    fn vanishing_noise_leaves_phase_untouched() {
        // A scene that avoids the +-pi cut so rounding cannot flip a branch.
        let spec = SceneSpec { kind: SceneKind::GaussianPeak, phase_range: 2.5, ..Default::default() };
        let psi = wrap(&generate_scene(&spec).unwrap());
        let (noisy, _) = add_noise(&psi, &NoiseSpec { target_snr_db: 300.0, seed: 1 }).unwrap();
        let diff = noisy.field().zip_map(psi.field(), |a, b| a - b).unwrap().norm_l2();
        assert!(diff <= 1e-12 * psi.field().norm_l2());
    }

    #[test]
    fn zero_signal_cannot_be_calibrated() {
        let psi = WrappedPhase::new(Field2D::zeros(16, 16).unwrap()).unwrap();
        assert!(matches!(add_noise(&psi, &NoiseSpec { target_snr_db: 40.0, seed: 0 }), Err(Error::ZeroSignal)));
    }

    #[test]
    fn seeds_change_noise_but_not_snr() {
        let psi = wrap(&generate_scene(&SceneSpec::default()).unwrap());
        let (a, sa) = add_noise(&psi, &NoiseSpec { target_snr_db: 43.34, seed: 1 }).unwrap();
        let (b, sb) = add_noise(&psi, &NoiseSpec { target_snr_db: 43.34, seed: 2 }).unwrap();
        assert_ne!(a, b);
        // Independent recomputation of the power ratio.
        for (noisy, reported) in [(&a, sa), (&b, sb)] {
            let mut sig = 0.0;
            let mut noi = 0.0;
            for (p, q) in psi.field().as_slice().iter().zip(noisy.field().as_slice()) {
                let mut d = q - p;
                if d > PI {
                    d -= 2.0 * PI;
                } else if d <= -PI {
                    d += 2.0 * PI;
                }
                sig += p * p;
                noi += d * d;
            }
            let snr = 10.0 * (sig / noi).log10();
            assert!((snr - reported).abs() < 1e-9);
            assert!((snr - 43.34).abs() <= 0.1);
        }
        assert!((sa - sb).abs() <= 0.1);
        let (a2, _) = add_noise(&psi, &NoiseSpec { target_snr_db: 43.34, seed: 1 }).unwrap();
        assert_eq!(a, a2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn snr_calibration_holds(target in 20.0f64..100.0, seed in any::<u64>(), range in 1.0f64..30.0) {
            let spec = SceneSpec { rows: 24, cols: 24, phase_range: range, ..Default::default() };
            let psi = wrap(&generate_scene(&spec).unwrap());
            let (_, achieved) = add_noise(&psi, &NoiseSpec { target_snr_db: target, seed }).unwrap();
            prop_assert!((achieved - target).abs() <= 0.1, "{} vs {}", achieved, target);
        }
    }
}
