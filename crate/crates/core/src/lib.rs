//! Delay-alignment modulation (DAM) for multi-user massive MIMO over
//! time-dispersive channels.
//!
//! The transmitter pre-delays one beamformed copy of each UE's stream per
//! channel path so that every path arrives at the same symbol time. This
//! crate provides the channel model, the delay-difference grouping behind
//! the analytic SINR, path-based MRT/ZF/RZF beamformers with their power
//! optimizers, a strongest-path baseline and a sample-level simulation used
//! as an independent reference.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the usual double-precision choice.

pub mod baseline;
pub mod beamformers;
pub mod channel;
pub mod dam;
pub mod error;
pub mod linalg;
pub mod power;
pub mod scalar;
pub mod schemes;

pub use baseline::{baseline_beamformers, baseline_sinr, select_strongest, StrongestPathSelection};
pub use beamformers::{
    assemble_zf, default_rzf_epsilon, mrt, mrt_asymptotic, rzf_directions, zf_directions,
    RzfDirections, ZfDirections,
};
pub use channel::{
    array_response, asymptotic_correlation, generate_scenario, ScenarioChannel, ScenarioConfig,
};
pub use dam::{
    analytic_sinr, build_grouping, compensate_delays, simulate_time_domain, BeamformerSet,
    DelayGrouping, DelaySchedule, RateReport, Scheme, SymbolAlphabet, Transmission,
};
pub use error::{DamError, Result};
pub use power::{
    asymptotic_mrt_alloc, rzf_sca, sca_taylor_bound, solve_sca_subproblem, waterfilling,
    zf_power_alloc, ScaOutcome, ScaSettings,
};
pub use scalar::Real;
pub use schemes::{design_scheme, Design};

pub type ScenarioConfig64 = ScenarioConfig<f64>;
pub type ScenarioChannel64 = ScenarioChannel<f64>;
pub type BeamformerSet64 = BeamformerSet<f64>;
pub type RateReport64 = RateReport<f64>;
pub type ScaSettings64 = ScaSettings<f64>;
pub type Design64 = Design<f64>;

pub type ScenarioConfig32 = ScenarioConfig<f32>;
pub type ScenarioChannel32 = ScenarioChannel<f32>;
pub type BeamformerSet32 = BeamformerSet<f32>;
pub type RateReport32 = RateReport<f32>;
