//! Delay pre-compensation, delay-difference grouping, analytic SINR and the
//! time-domain reference simulation.

mod delay;
mod grouping;
mod oracle;
mod sinr;

pub use delay::{compensate_delays, DelaySchedule};
pub use grouping::{build_grouping, DelayGrouping, PairGrouping};
pub use oracle::{simulate_time_domain, Stream, SymbolAlphabet, Transmission};
pub use sinr::{
    analytic_sinr, interference_terms, sum_rate, transmit_power, BeamformerSet, RateReport, Scheme,
    SinrForm, Terms, UeReport,
};
