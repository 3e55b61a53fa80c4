//! The discrete energy of a channel pair, its exact gradient and the
//! diagonal-dominance certificate for the lagged-diffusivity linear systems.
//!
//! ```text
//! F(u) = l1/2 sum (u_re - d_re)^2 + l2/2 sum (u_im - d_im)^2
//!      + l3/2 sum (u_re^2 + u_im^2 - 1)^2
//!      + sum sqrt(|D+ u_re|^2 + beta) + sum sqrt(|D+ u_im|^2 + beta)
//! ```
//!
//! `D+` is the forward difference with replicate ghosts, so the TV gradient
//! is exactly `-curvature(u, beta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{curvature, grad_magnitudes, Field2D};
use crate::phase::PhasePair;

/// Fidelity weights, coupling weight and TV smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub beta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            lambda1: 2.5,
            lambda2: 2.5,
            lambda3: 5.0,
            beta: 0.001,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.lambda1) || !ok(self.lambda2) {
            return Err(Error::InvalidParameter(format!(
                "lambda1 and lambda2 must be positive, got {} and {}",
                self.lambda1, self.lambda2
            )));
        }
        if !(self.lambda3.is_finite() && self.lambda3 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda3 must be non-negative, got {}",
                self.lambda3
            )));
        }
        if !ok(self.beta) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn min_fidelity(&self) -> f64 {
        self.lambda1.min(self.lambda2)
    }
}

/// The five terms of the energy and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub fit_real: f64,
    pub fit_im: f64,
    pub pythagoras: f64,
    pub tv_real: f64,
    pub tv_im: f64,
    pub total: f64,
}

fn check_inputs(pair: &PhasePair, data: &PhasePair, params: &ModelParams) -> Result<()> {
    params.validate()?;
    pair.ensure_same_shape(data)
}

/// `sum sqrt(|D+ w|^2 + beta)` over all pixels.
pub fn smoothed_tv(w: &Field2D, beta: f64) -> f64 {
    grad_magnitudes(w)
        .east
        .as_slice()
        .iter()
        .map(|g| (g * g + beta).sqrt())
        .sum()
}

pub fn evaluate(pair: &PhasePair, data: &PhasePair, params: &ModelParams) -> Result<EnergyBreakdown> {
    check_inputs(pair, data, params)?;
    let sq_dist = |a: &Field2D, b: &Field2D| -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };
    let fit_real = 0.5 * params.lambda1 * sq_dist(pair.real(), data.real());
    let fit_im = 0.5 * params.lambda2 * sq_dist(pair.im(), data.im());
    let pythagoras = 0.5
        * params.lambda3
        * pair
            .real()
            .as_slice()
            .iter()
            .zip(pair.im().as_slice())
            .map(|(x, y)| {
                let r = x * x + y * y - 1.0;
                r * r
            })
            .sum::<f64>();
    let tv_real = smoothed_tv(pair.real(), params.beta);
    let tv_im = smoothed_tv(pair.im(), params.beta);
    Ok(EnergyBreakdown {
        fit_real,
        fit_im,
        pythagoras,
        tv_real,
        tv_im,
        total: fit_real + fit_im + pythagoras + tv_real + tv_im,
    })
}

/// Exact gradient of [`evaluate`] with respect to both channels.
pub fn gradient(pair: &PhasePair, data: &PhasePair, params: &ModelParams) -> Result<PhasePair> {
    check_inputs(pair, data, params)?;
    let k_re = curvature(pair.real(), params.beta)?;
    let k_im = curvature(pair.im(), params.beta)?;
    let (m, n) = pair.shape();
    let mut g_re = Vec::with_capacity(m * n);
    let mut g_im = Vec::with_capacity(m * n);
    for p in 0..m * n {
        let x = pair.real().as_slice()[p];
        let y = pair.im().as_slice()[p];
        let coupling = 2.0 * params.lambda3 * (x * x + y * y - 1.0);
        g_re.push(-k_re.as_slice()[p] + params.lambda1 * (x - data.real().as_slice()[p]) + coupling * x);
        g_im.push(-k_im.as_slice()[p] + params.lambda2 * (y - data.im().as_slice()[p]) + coupling * y);
    }
    PhasePair::new(Field2D::new(m, n, g_re)?, Field2D::new(m, n, g_im)?)
}

/// How the coupling term enters the diagonal of the lagged linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    /// Diagonal `l + 2 l3 (re^2 + im^2)`, with `2 l3 u^k` moved to the right-hand side.
    Shifted,
    /// Diagonal `l + 2 l3 (re^2 + im^2 - 1)`; may lose dominance inside the unit circle.
    Unshifted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceCertificate {
    /// True iff every row of both channel systems is strictly diagonally dominant.
    pub dominant: bool,
    /// Minimum over pixels and channels of `diagonal - sum |off-diagonal|`.
    pub margin: f64,
}

/// Dominance of the shifted fixed-point systems frozen at `pair`.
pub fn check_diagonal_dominance(pair: &PhasePair, params: &ModelParams) -> Result<DominanceCertificate> {
    check_diagonal_dominance_for(pair, params, Linearization::Shifted)
}

pub fn check_diagonal_dominance_for(
    pair: &PhasePair,
    params: &ModelParams,
    scheme: Linearization,
) -> Result<DominanceCertificate> {
    params.validate()?;
    let beta = params.beta;
    let mut margin = f64::INFINITY;
    for (channel, lambda) in [(pair.real(), params.lambda1), (pair.im(), params.lambda2)] {
        let g = grad_magnitudes(channel);
        for p in 0..channel.len() {
            let x = pair.real().as_slice()[p];
            let y = pair.im().as_slice()[p];
            let s = x * x + y * y;
            let shift = match scheme {
                Linearization::Shifted => 2.0 * params.lambda3 * s,
                Linearization::Unshifted => 2.0 * params.lambda3 * (s - 1.0),
            };
            let off: f64 = [&g.east, &g.west, &g.north, &g.south]
                .iter()
                .map(|f| 1.0 / (f.as_slice()[p].powi(2) + beta).sqrt())
                .sum();
            let diag = lambda + shift + off;
            margin = margin.min(diag - off);
        }
    }
    Ok(DominanceCertificate {
        dominant: margin > 0.0,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{decompose, WrappedPhase};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pair(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> PhasePair {
        let re = Field2D::from_fn(rows, cols, |_, _| rng.gen_range(-1.2..1.2)).unwrap();
        let im = Field2D::from_fn(rows, cols, |_, _| rng.gen_range(-1.2..1.2)).unwrap();
        PhasePair::new(re, im).unwrap()
    }

    fn constant_pair(rows: usize, cols: usize, re: f64, im: f64) -> PhasePair {
        PhasePair::new(Field2D::filled(rows, cols, re).unwrap(), Field2D::filled(rows, cols, im).unwrap()).unwrap()
    }

    fn reference_params() -> ModelParams {
        ModelParams::default()
    }

    // Five sums written directly against nested vectors.
    fn energy_oracle(u: &PhasePair, d: &PhasePair, p: &ModelParams) -> f64 {
        let (m, n) = u.shape();
        let r = |f: &Field2D, i: usize, j: usize| f.get(i.min(m - 1), j.min(n - 1));
        let mut total = 0.0;
        for i in 0..m {
            for j in 0..n {
                let (x, y) = (u.real().get(i, j), u.im().get(i, j));
                total += 0.5 * p.lambda1 * (x - d.real().get(i, j)).powi(2);
                total += 0.5 * p.lambda2 * (y - d.im().get(i, j)).powi(2);
                total += 0.5 * p.lambda3 * (x * x + y * y - 1.0).powi(2);
                for f in [u.real(), u.im()] {
                    let dx = r(f, i + 1, j) - f.get(i, j);
                    let dy = r(f, i, j + 1) - f.get(i, j);
                    total += (dx * dx + dy * dy + p.beta).sqrt();
                }
            }
        }
        total
    }

    fn perturb(pair: &PhasePair, channel: usize, k: usize, h: f64) -> PhasePair {
        let (mut re, mut im) = (pair.real().as_slice().to_vec(), pair.im().as_slice().to_vec());
        if channel == 0 {
            re[k] += h;
        } else {
            im[k] += h;
        }
        let (m, n) = pair.shape();
        PhasePair::new(Field2D::new(m, n, re).unwrap(), Field2D::new(m, n, im).unwrap()).unwrap()
    }

    fn max_fd_rel_error(u: &PhasePair, d: &PhasePair, p: &ModelParams) -> f64 {
        let g = gradient(u, d, p).unwrap();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for channel in 0..2 {
            let analytic = if channel == 0 { g.real() } else { g.im() };
            for k in 0..u.real().len() {
                let fp = evaluate(&perturb(u, channel, k, h), d, p).unwrap().total;
                let fm = evaluate(&perturb(u, channel, k, -h), d, p).unwrap().total;
                let fd = (fp - fm) / (2.0 * h);
                let a = analytic.as_slice()[k];
                worst = worst.max((a - fd).abs() / a.abs().max(1.0));
            }
        }
        worst
    }

    #[test]
    fn exact_fit_on_unit_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = WrappedPhase::new(Field2D::from_fn(6, 6, |_, _| rng.gen_range(-3.0..3.0)).unwrap()).unwrap();
        let pair = decompose(&psi);
        let params = ModelParams { lambda3: 17.0, ..reference_params() };
        let e = evaluate(&pair, &pair, &params).unwrap();
        assert_eq!(e.fit_real, 0.0);
        assert_eq!(e.fit_im, 0.0);
        assert!(e.pythagoras < 1e-28);
        assert!((e.total - (e.tv_real + e.tv_im)).abs() < 1e-12);
    }

    #[test]
    fn constant_pair_energy_is_pure_tv_floor() {
        let pair = constant_pair(10, 10, 1.0, 0.0);
        let e = evaluate(&pair, &pair, &reference_params()).unwrap();
        let expect = 100.0 * 2.0 * 0.001f64.sqrt();
        assert!((e.total - expect).abs() < 1e-12);
        assert!((e.total - 6.32456).abs() < 1e-5);
    }

    #[test]
    fn evaluate_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_pair(5, 5, &mut rng);
        let d = random_pair(5, 5, &mut rng);
        let p = reference_params();
        let e = evaluate(&u, &d, &p).unwrap();
        let o = energy_oracle(&u, &d, &p);
        assert!((e.total - o).abs() <= 1e-12 * o.abs());
        let parts = e.fit_real + e.fit_im + e.pythagoras + e.tv_real + e.tv_im;
        assert!((parts - e.total).abs() <= 1e-12 * e.total.abs());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = constant_pair(3, 3, 1.0, 0.0);
        let b = constant_pair(3, 4, 1.0, 0.0);
        assert!(matches!(evaluate(&a, &b, &reference_params()), Err(Error::ShapeMismatch { .. })));
        assert!(gradient(&a, &b, &reference_params()).is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let a = constant_pair(3, 3, 1.0, 0.0);
        for p in [
            ModelParams { lambda1: 0.0, ..reference_params() },
            ModelParams { lambda3: -1.0, ..reference_params() },
            ModelParams { beta: 0.0, ..reference_params() },
        ] {
            assert!(evaluate(&a, &a, &p).is_err());
        }
    }

    #[test]
    fn gradient_vanishes_at_constant_unit_pair() {
        let pair = constant_pair(5, 4, 0.6, 0.8);
        let g = gradient(&pair, &pair, &reference_params()).unwrap();
        assert!(g.real().as_slice().iter().all(|v| v.abs() < 1e-14));
        assert!(g.im().as_slice().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn pure_fidelity_gradient() {
        let eps = 1e-3;
        let u = constant_pair(4, 4, 1.0 + eps, 0.0);
        let d = constant_pair(4, 4, 1.0, 0.0);
        let p = ModelParams { lambda1: 1.0, lambda2: 1.0, lambda3: 0.0, beta: 0.001 };
        let g = gradient(&u, &d, &p).unwrap();
        for v in g.real().as_slice() {
            assert!((v - eps).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_pair(6, 6, &mut rng);
        let d = random_pair(6, 6, &mut rng);
        let err = max_fd_rel_error(&u, &d, &reference_params());
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn dominance_with_reference_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_pair(6, 6, &mut rng);
        let c = check_diagonal_dominance(&u, &reference_params()).unwrap();
        assert!(c.dominant);
        assert!(c.margin >= 2.5);
    }

    #[test]
    fn dominance_degrades_with_tiny_lambda() {
        let u = constant_pair(4, 4, 0.0, 0.0);
        let p = ModelParams { lambda1: 1e-12, lambda2: 1e-12, lambda3: 0.0, beta: 0.001 };
        let c = check_diagonal_dominance(&u, &p).unwrap();
        assert!(c.dominant);
        assert!((c.margin - 1e-12).abs() < 1e-13, "{}", c.margin);
    }

    #[test]
    fn unshifted_scheme_loses_dominance_inside_unit_circle() {
        let u = constant_pair(5, 5, 0.1, 0.1);
        let p = ModelParams { lambda1: 1.0, lambda2: 1.0, lambda3: 1.0, beta: 0.001 };
        let shifted = check_diagonal_dominance_for(&u, &p, Linearization::Shifted).unwrap();
        let unshifted = check_diagonal_dominance_for(&u, &p, Linearization::Unshifted).unwrap();
        assert!(shifted.dominant);
        assert!((shifted.margin - (1.0 + 2.0 * 0.02)).abs() < 1e-12);
        assert!(!unshifted.dominant);
        assert!((unshifted.margin - (1.0 + 2.0 * (0.02 - 1.0))).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gradient_consistency(seed in any::<u64>(), rows in 2usize..=8, cols in 2usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_pair(rows, cols, &mut rng);
            let d = random_pair(rows, cols, &mut rng);
            prop_assert!(max_fd_rel_error(&u, &d, &reference_params()) < 1e-5);
        }

        #[test]
        fn transpose_symmetry(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_pair(5, 7, &mut rng);
            let d = random_pair(5, 7, &mut rng);
            let t = |p: &PhasePair| PhasePair::new(p.real().transpose(), p.im().transpose()).unwrap();
            let a = evaluate(&u, &d, &reference_params()).unwrap().total;
            let b = evaluate(&t(&u), &t(&d), &reference_params()).unwrap().total;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }

        #[test]
        fn pythagoras_rotation_invariant(seed in any::<u64>(), theta in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_pair(4, 5, &mut rng);
            let (c, s) = (theta.cos(), theta.sin());
            let rot = PhasePair::new(
                u.real().zip_map(u.im(), |x, y| x * c - y * s).unwrap(),
                u.real().zip_map(u.im(), |x, y| x * s + y * c).unwrap(),
            ).unwrap();
            let p = reference_params();
            let a = evaluate(&u, &u, &p).unwrap().pythagoras;
            let b = evaluate(&rot, &u, &p).unwrap().pythagoras;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn convex_without_coupling(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_pair(5, 5, &mut rng);
            let b = random_pair(5, 5, &mut rng);
            let d = random_pair(5, 5, &mut rng);
            let p = ModelParams { lambda3: 0.0, ..reference_params() };
            let fa = evaluate(&a, &d, &p).unwrap().total;
            let fb = evaluate(&b, &d, &p).unwrap().total;
            for k in 0..=10 {
                let t = k as f64 / 10.0;
                let mix = PhasePair::new(
                    a.real().zip_map(b.real(), |x, y| t * x + (1.0 - t) * y).unwrap(),
                    a.im().zip_map(b.im(), |x, y| t * x + (1.0 - t) * y).unwrap(),
                ).unwrap();
                let fm = evaluate(&mix, &d, &p).unwrap().total;
                prop_assert!(fm <= t * fa + (1.0 - t) * fb + 1e-10);
            }
        }
    }
}
