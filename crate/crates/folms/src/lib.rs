//! Laboratory for joint channel / carrier-frequency-offset /
//! sampling-frequency-offset adaptive filtering.
//!
//! The crate simulates a time-varying baseband link (AR(1) channel,
//! three-state carrier and sampling clocks, measurement noise), runs the
//! FO-LMS estimator and its variable-step-size variant against it, evaluates
//! closed-form steady-state EMSE predictions, solves for optimal step sizes,
//! and drives Monte Carlo experiments from a TOML config via the `folms` CLI.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod seeds;
pub mod sigproc;
pub mod theory;
pub mod vss;
pub mod world;

pub use error::{Error, Result};
pub use estimator::{FilterState, RunOptions, RunTrace, StepSizes, WarmStart};
pub use sigproc::{DerivativeScheme, Interpolator, KnownSignal};
pub use theory::EmsePrediction;
pub use vss::{VssConfig, VssState};
pub use world::SystemParams;

pub type Complex = num_complex::Complex64;
