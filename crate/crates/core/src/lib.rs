//! Simulation and statistical verification toolkit for a two-particle
//! system: an inert particle subject to constant gravitational acceleration,
//! impinged from below by a reflected Brownian particle. The inert particle's
//! velocity grows with the collision local time and decays at rate `g`.
//!
//! - [`model`]: state types and the time-stepping integrator, including the
//!   exact zero-noise solution.
//! - [`analytic`]: closed-form laws (stationary density and marginals,
//!   Brownian supremum and hitting laws, Skorokhod functional) used as
//!   oracles.
//! - [`mc`]: ensemble driver, renewal-cycle decomposition, and the
//!   statistical estimators that confront simulation with the analytic laws.

pub mod analytic;
pub mod error;
pub mod mc;
pub mod model;
pub mod quad;
pub mod seed;

pub use error::{Error, Result};
pub use model::{GravParams, StepResult, SystemState, TimeSeries};
