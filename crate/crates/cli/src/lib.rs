//! Monte-Carlo experiments on top of `damsim`: sum-rate sweeps over
//! transmit power, path count or array size, SCA convergence traces and an
//! invariant checker.

pub mod config;
pub mod convergence;
pub mod error;
pub mod format;
pub mod seed;
pub mod sweep;
pub mod validate;

pub use config::ExperimentConfig;
pub use convergence::{run_convergence_trace, ConvergenceReport, ConvergenceTrace};
pub use error::{CliError, Result};
pub use seed::trial_seed;
pub use sweep::{run_sweep, SweepPoint, SweepResult, SweepSpec, SweepVar};
pub use validate::{run_validate, ValidationReport};
