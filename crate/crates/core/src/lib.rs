//! Finite-volume solver for the discrete 3-wave kinetic equation
//!
//! ```text
//! d f_i / dt = S^(1)_i[f] + S^(2)_i[f] + S^(3)_i[f] - V_i[f]
//! ```
//!
//! on a uniform grid `x_i = i h`, with power-law kernels, together with the
//! closed-form moment bounds the scheme satisfies and an executable
//! verification harness that checks them along simulated trajectories.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod collision;
pub mod error;
pub mod integrator;
pub mod model;
pub mod state;
pub mod verify;

pub use collision::{Execution, OperatorOutput};
pub use integrator::{Method, MlPair, SimConfig, Trajectory};
pub use config::{parse_config, ConfigError, RunConfig};
pub use error::{Error, ParamViolation, Result};
pub use model::{Kernel, Model, ModelParams, PowerTables, TruncationMode};
pub use state::{InitialDataSpec, Sampling, State};
pub use verify::{CheckEntry, Status, VerificationReport, VerifySettings};
