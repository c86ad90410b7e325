//! Power allocation: water-filling, the closed-form ZF split, and the SCA
//! procedure for path-based RZF with its convex subproblem.

mod alloc;
pub mod ipm;
mod sca;
mod sinr_data;
mod taylor;
mod waterfill;

pub use alloc::{asymptotic_mrt_alloc, zf_power_alloc, ZfAllocation};
pub use sca::{
    rzf_sca, rzf_sca_beamformers, solve_sca_subproblem, LocalPoint, ScaOutcome, ScaSettings,
    ScaState, SubproblemSolution,
};
pub use sinr_data::{build_rzf_sinr_data, realify, SinrData, UeSinrData};
pub use taylor::{quadratic_over_linear, sca_taylor_bound, TaylorBound};
pub use waterfill::{waterfilling, WaterfillingResult};
