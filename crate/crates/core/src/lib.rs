//! Double-stepsize extragradient solvers for stochastic saddle-point
//! problems, with a seeded benchmark harness.
//!
//! The crate is organised bottom-up:
//!
//! - [`problems`]: vector fields with known solution geometry.
//! - [`oracle`]: stochastic first-order oracles over a problem.
//! - [`schedules`]: power-law stepsize policies and their admissibility.
//! - [`solvers`]: one-step update rules and the trajectory runner.
//! - [`analysis`]: metrics, closed-form expectation recursions, rate fits.
//! - [`harness`]: configuration-driven experiments, figure tables and the
//!   acceptance suite behind the `dseg` CLI.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod schedules;
pub mod solvers;

pub use error::{Error, Result};
pub use problems::{ProblemInstance, ProblemKind, Vector};
