//! Total-variation denoising of wrapped phase maps.
//!
//! A wrapped phase `psi` is carried as its channel pair `(cos psi, sin psi)`.
//! Both channels are denoised jointly by minimising
//!
//! ```text
//! l1/2 |u_re - d_re|^2 + l2/2 |u_im - d_im|^2 + l3/2 |u_re^2 + u_im^2 - 1|^2
//!     + TV_beta(u_re) + TV_beta(u_im)
//! ```
//!
//! where the third term keeps the pair on the unit circle so the phase
//! recovered by `arctan2` stays accurate. The main solver is a lagged
//! diffusivity fixed point relaxed with Gauss–Seidel; gradient descent and
//! separate linear smoothing of the channels are provided as baselines.
//!
//! ```
//! use phasetv::{experiment::Problem, solvers, synth, phase};
//!
//! let scene = synth::SceneSpec { rows: 32, cols: 32, ..Default::default() };
//! let noise = synth::NoiseSpec { target_snr_db: 40.0, seed: 1 };
//! let problem = Problem::generate(&scene, &noise).unwrap();
//! let (denoised, report) =
//!     solvers::fixed_point_denoise(&problem.noisy_pair(), &Default::default()).unwrap();
//! assert!(report.converged);
//! let psi = phase::reconstruct(&denoised).unwrap();
//! assert_eq!(psi.shape(), (32, 32));
//! ```

pub mod energy;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod phase;
pub mod solvers;
pub mod synth;

pub use energy::{EnergyBreakdown, ModelParams};
pub use error::{Error, Result};
pub use grid::{Field2D, GradMagnitudes};
pub use metrics::MetricsRecord;
pub use phase::{PhasePair, WrappedPhase};
pub use solvers::{SolveConfig, SolveReport, StrobelFilter};
