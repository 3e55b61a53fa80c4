//! Wrapped phase, the cosine/sine channel pair and conversions between them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Field2D;

/// Quadrant-aware arctangent returning values in `(-pi, pi]`.
///
/// `std`'s `atan2` already follows the branch table for `x != 0`; the sign
/// of zero is normalised so that the negative real axis maps to `+pi`.
/// Returns `None` at the origin.
pub fn arctan2(y: f64, x: f64) -> Option<f64> {
    if x == 0.0 && y == 0.0 {
        return None;
    }
    // (+0.0).atan2(-1) == pi but (-0.0).atan2(-1) == -pi.
    let y = if y == 0.0 { 0.0 } else { y };
    let a = y.atan2(x);
    // A tiny negative y against x < 0 can round onto -pi itself.
    Some(if a == -PI { PI } else { a })
}

/// Reduces an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_angle(phi: f64) -> f64 {
    // sin^2 + cos^2 = 1, so the undefined branch is unreachable for finite phi.
    arctan2(phi.sin(), phi.cos()).unwrap_or(0.0)
}

/// A phase field with every value in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WrappedPhase(Field2D);

impl WrappedPhase {
    /// Validates that every value lies in `(-pi, pi]`.
    pub fn new(psi: Field2D) -> Result<Self> {
        let cols = psi.cols();
        if let Some(k) = psi.as_slice().iter().position(|&v| !(v > -PI && v <= PI)) {
            return Err(Error::OutOfPhaseRange {
                row: k / cols,
                col: k % cols,
                value: psi.as_slice()[k],
            });
        }
        Ok(Self(psi))
    }

    pub fn field(&self) -> &Field2D {
        &self.0
    }

    pub fn into_field(self) -> Field2D {
        self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
}

/// The `(cos psi, sin psi)` channel pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePair {
    pub(crate) real: Field2D,
    pub(crate) im: Field2D,
}

impl PhasePair {
    pub fn new(real: Field2D, im: Field2D) -> Result<Self> {
        real.ensure_same_shape(&im)?;
        Ok(Self { real, im })
    }

    pub fn real(&self) -> &Field2D {
        &self.real
    }

    pub fn im(&self) -> &Field2D {
        &self.im
    }

    pub fn into_parts(self) -> (Field2D, Field2D) {
        (self.real, self.im)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.real.shape()
    }

    pub fn ensure_same_shape(&self, other: &PhasePair) -> Result<()> {
        self.real.ensure_same_shape(&other.real)
    }

    /// Multiplies both channels by `c`.
    pub fn scaled(&self, c: f64) -> Result<PhasePair> {
        PhasePair::new(self.real.map(|v| c * v)?, self.im.map(|v| c * v)?)
    }

    /// Joint Euclidean norm over both channels.
    pub fn norm_l2(&self) -> f64 {
        (self.real.sum_of_squares() + self.im.sum_of_squares()).sqrt()
    }

    /// Divides each pixel by its amplitude `sqrt(re^2 + im^2)`.
    pub fn normalized(&self) -> Result<PhasePair> {
        let (m, n) = self.shape();
        let mut re = Vec::with_capacity(m * n);
        let mut im = Vec::with_capacity(m * n);
        for (k, (&x, &y)) in self.real.as_slice().iter().zip(self.im.as_slice()).enumerate() {
            let a = x.hypot(y);
            if a == 0.0 {
                return Err(Error::UndefinedPhase { row: k / n, col: k % n });
            }
            re.push(x / a);
            im.push(y / a);
        }
        PhasePair::new(Field2D::new(m, n, re)?, Field2D::new(m, n, im)?)
    }
}

/// `psi = arctan2(sin phi, cos phi)` pointwise.
pub fn wrap(phi: &Field2D) -> WrappedPhase {
    WrappedPhase(Field2D::from_parts(
        phi.rows(),
        phi.cols(),
        phi.as_slice().iter().map(|&v| wrap_angle(v)).collect(),
    ))
}

pub fn decompose(psi: &WrappedPhase) -> PhasePair {
    let f = psi.field();
    PhasePair {
        real: Field2D::from_parts(f.rows(), f.cols(), f.as_slice().iter().map(|v| v.cos()).collect()),
        im: Field2D::from_parts(f.rows(), f.cols(), f.as_slice().iter().map(|v| v.sin()).collect()),
    }
}

/// Recovers the wrapped phase from a (not necessarily normalised) pair.
pub fn reconstruct(pair: &PhasePair) -> Result<WrappedPhase> {
    let (m, n) = pair.shape();
    let mut out = Vec::with_capacity(m * n);
    for (k, (&x, &y)) in pair.real.as_slice().iter().zip(pair.im.as_slice()).enumerate() {
        match arctan2(y, x) {
            Some(v) => out.push(v),
            None => return Err(Error::UndefinedPhase { row: k / n, col: k % n }),
        }
    }
    Ok(WrappedPhase(Field2D::from_parts(m, n, out)))
}

/// `|re^2 + im^2 - 1|` pointwise.
pub fn pythagorean_deviation(pair: &PhasePair) -> Field2D {
    let (m, n) = pair.shape();
    Field2D::from_parts(
        m,
        n,
        pair.real
            .as_slice()
            .iter()
            .zip(pair.im.as_slice())
            .map(|(x, y)| (x * x + y * y - 1.0).abs())
            .collect(),
    )
}

/// Difference `a - b` of two wrapped phases reduced into `(-pi, pi]`.
pub fn wrapped_difference(a: &WrappedPhase, b: &WrappedPhase) -> Result<Field2D> {
    a.field().zip_map(b.field(), |x, y| wrap_angle(x - y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Branch table of the two-argument arctangent, written out case by case.
    fn arctan2_oracle(y: f64, x: f64) -> f64 {
        if x > 0.0 {
            (y / x).atan()
        } else if x < 0.0 && y >= 0.0 {
            (y / x).atan() + PI
        } else if x < 0.0 {
            (y / x).atan() - PI
        } else if y > 0.0 {
            PI / 2.0
        } else {
            -PI / 2.0
        }
    }

    fn random_psi(rows: usize, cols: usize, seed: u64) -> WrappedPhase {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        WrappedPhase::new(Field2D::from_fn(rows, cols, |_, _| rng.gen_range(-3.0..3.0)).unwrap()).unwrap()
    }

    #[test]
    fn wrap_zero_and_odd_multiple_of_pi() {
        let phi = Field2D::zeros(3, 3).unwrap();
        assert!(wrap(&phi).field().as_slice().iter().all(|&v| v == 0.0));
        let mut phi = Field2D::zeros(3, 3).unwrap();
        phi.set(1, 1, 3.0 * PI).unwrap();
        let psi = wrap(&phi);
        assert!((psi.field().get(1, 1) - PI).abs() < 1e-12);
        assert!(psi.field().get(1, 1) > 0.0);
    }

    #[test]
    fn negative_real_axis_maps_to_plus_pi() {
        assert_eq!(arctan2(0.0, -1.0), Some(PI));
        assert_eq!(arctan2(-0.0, -1.0), Some(PI));
        assert_eq!(arctan2(0.0, 0.0), None);
        assert_eq!(arctan2(1.0, 0.0), Some(PI / 2.0));
        assert_eq!(arctan2(-1.0, 0.0), Some(-PI / 2.0));
        assert_eq!(arctan2(-1e-17, -1.0), Some(PI));
    }

    #[test]
    fn six_pi_ramp_wraps_to_three_tooth_sawtooth() {
        let n = 200;
        let phi = Field2D::from_fn(2, n, |_, j| 6.0 * PI * j as f64 / (n - 1) as f64).unwrap();
        let psi = wrap(&phi);
        for j in 0..n {
            let v = phi.get(0, j);
            let expect = arctan2_oracle(v.sin(), v.cos());
            assert!((psi.field().get(0, j) - expect).abs() < 1e-12);
        }
        let jumps: Vec<f64> = (1..n)
            .map(|j| psi.field().get(0, j) - psi.field().get(0, j - 1))
            .filter(|d| d.abs() > PI)
            .collect();
        // 0..6pi crosses the cut at pi, 3pi and 5pi.
        assert_eq!(jumps.len(), 3);
        for d in jumps {
            assert!((d.abs() - 2.0 * PI).abs() < 0.2, "{d}");
        }
    }

    #[test]
    fn ramp_to_four_pi_has_two_jumps_of_two_pi() {
        let n = 101;
        let phi = Field2D::from_fn(2, n, |_, j| 4.0 * PI * j as f64 / (n - 1) as f64 + 0.01).unwrap();
        let psi = wrap(&phi);
        let jumps: Vec<f64> = (1..n)
            .map(|j| psi.field().get(0, j) - psi.field().get(0, j - 1))
            .filter(|d| d.abs() > PI)
            .collect();
        assert_eq!(jumps.len(), 2);
        for d in jumps {
            assert!((d + 2.0 * PI).abs() < 0.2, "{d}");
        }
    }

    #[test]
    fn decompose_known_values() {
        let psi = WrappedPhase::new(Field2D::from_fn(2, 2, |i, _| if i == 0 { 0.0 } else { PI / 2.0 }).unwrap()).unwrap();
        let p = decompose(&psi);
        assert_eq!(p.real().get(0, 0), 1.0);
        assert_eq!(p.im().get(0, 0), 0.0);
        assert!(p.real().get(1, 0).abs() < 1e-15);
        assert_eq!(p.im().get(1, 0), 1.0);
    }

    #[test]
    fn reconstruct_examples() {
        let p = PhasePair::new(Field2D::filled(2, 2, -2.0).unwrap(), Field2D::zeros(2, 2).unwrap()).unwrap();
        assert!(reconstruct(&p).unwrap().field().as_slice().iter().all(|&v| v == PI));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let theta = Field2D::from_fn(4, 4, |_, _| rng.gen_range(-3.1..3.1)).unwrap();
        let p = PhasePair::new(theta.map(|t| 0.6 * t.cos()).unwrap(), theta.map(|t| 0.6 * t.sin()).unwrap()).unwrap();
        let back = reconstruct(&p).unwrap();
        for (a, b) in back.field().as_slice().iter().zip(theta.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_reports_undefined_pixel() {
        let mut re = Field2D::filled(3, 3, 1.0).unwrap();
        re.set(2, 1, 0.0).unwrap();
        let p = PhasePair::new(re, Field2D::zeros(3, 3).unwrap()).unwrap();
        assert!(matches!(reconstruct(&p), Err(Error::UndefinedPhase { row: 2, col: 1 })));
        assert!(p.normalized().is_err());
    }

    #[test]
    fn pythagorean_deviation_examples() {
        let z = PhasePair::new(Field2D::zeros(2, 3).unwrap(), Field2D::zeros(2, 3).unwrap()).unwrap();
        assert!(pythagorean_deviation(&z).as_slice().iter().all(|&v| v == 1.0));
        let p = PhasePair::new(Field2D::filled(2, 2, 1.1).unwrap(), Field2D::zeros(2, 2).unwrap()).unwrap();
        assert!((pythagorean_deviation(&p).get(0, 0) - 0.21).abs() < 1e-15);
        let d = pythagorean_deviation(&decompose(&random_psi(8, 8, 3)));
        assert!(d.max() <= 1e-14);
    }

    #[test]
    fn normalization_projects_to_unit_circle() {
        let p = PhasePair::new(Field2D::filled(2, 2, 3.0).unwrap(), Field2D::filled(2, 2, 4.0).unwrap()).unwrap();
        let q = p.normalized().unwrap();
        assert!((q.real().get(0, 0) - 0.6).abs() < 1e-15);
        assert!((q.im().get(1, 1) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn wrapped_phase_rejects_out_of_range() {
        assert!(WrappedPhase::new(Field2D::filled(2, 2, -PI).unwrap()).is_err());
        assert!(WrappedPhase::new(Field2D::filled(2, 2, PI).unwrap()).is_ok());
    }

    proptest! {
        #[test]
        fn round_trip_away_from_cut(seed in any::<u64>()) {
            let psi = random_psi(5, 6, seed);
            let back = reconstruct(&decompose(&psi)).unwrap();
            for (a, b) in back.field().as_slice().iter().zip(psi.field().as_slice()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(pythagorean_deviation(&decompose(&psi)).max() <= 1e-14);
        }

        #[test]
        fn reconstruct_scale_invariant(seed in any::<u64>(), c in 1e-3f64..1e3) {
            let p = decompose(&random_psi(4, 4, seed));
            let a = reconstruct(&p).unwrap();
            let b = reconstruct(&p.scaled(c).unwrap()).unwrap();
            for (x, y) in a.field().as_slice().iter().zip(b.field().as_slice()) {
                // atan2 is evaluated on the scaled arguments; exact up to rounding of the scaling.
                prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0));
            }
        }

        #[test]
        fn wrap_stays_in_half_open_interval(v in -1e3f64..1e3) {
            let w = wrap_angle(v);
            prop_assert!(w > -PI && w <= PI);
            let k = (v - w) / (2.0 * PI);
            prop_assert!((k - k.round()).abs() < 1e-9);
        }
    }
}
