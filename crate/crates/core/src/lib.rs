//! Spectral Galerkin / exact-splitting solver for the stochastic complex
//! Ginzburg–Landau equation on the unit torus,
//!
//! ```text
//! du = [(1+iν)Δu + Ru − (1+iμ)|u|²u] dt + σ dW,
//! ```
//!
//! together with two comparison schemes and a Monte-Carlo harness that
//! measures strong convergence on refinement-coupled noise.
//!
//! Modules, bottom-up:
//!
//! * [`config`]: run parameters and the key-value config format.
//! * [`spectral`]: Fourier fields, projection, semigroup, norms, field I/O.
//! * [`flow`]: closed-form flow of the pointwise reaction ODE.
//! * [`rng`], [`noise`]: reproducible streams and exact per-mode increments.
//! * [`integrators`]: ESM, ExpSM and Tam steps and time loops.
//! * [`harness`]: coupled RMSE ladders and slope fits.
//! * [`validate`]: fast property suite backing `scgle validate`.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod harness;
pub mod integrators;
pub mod noise;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod validate;

pub use config::{InitialCondition, Method, ModelParams, NoiseKind, NoiseSpec, RunConfig};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{FourierTransform, GridField, SpectralField};
