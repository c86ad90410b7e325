//! One entry point per scheme: build the beamformers, optimize the powers
//! and evaluate the analytic rates.

use crate::baseline::{
    baseline_beamformers, baseline_rzf_sca, baseline_sinr, baseline_transmission, select_strongest,
    StrongestPathSelection,
};
use crate::beamformers::{
    assemble_zf, default_rzf_epsilon, mrt, mrt_asymptotic, rzf_directions, zf_directions,
};
use crate::channel::ScenarioChannel;
use crate::dam::{
    analytic_sinr, compensate_delays, BeamformerSet, DelayGrouping, RateReport, Scheme,
    Transmission,
};
use crate::error::Result;
use crate::power::{
    asymptotic_mrt_alloc, rzf_sca_beamformers, zf_power_alloc, ScaOutcome, ScaSettings,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Design<T: Real> {
    pub beamformers: BeamformerSet<T>,
    pub report: RateReport<T>,
    /// Present for the RZF schemes.
    pub sca: Option<ScaOutcome<T>>,
    /// Present for the strongest-path schemes.
    pub selection: Option<StrongestPathSelection<T>>,
}

impl<T: Real> Design<T> {
    pub fn sum_rate(&self) -> T {
        self.report.sum_rate()
    }

    /// What the transmitter actually sends, for the time-domain simulation.
    pub fn transmission(&self, channel: &ScenarioChannel<T>) -> Result<Transmission<T>> {
        match &self.selection {
            Some(sel) => baseline_transmission(&self.beamformers, sel, channel),
            None => Transmission::dam(&self.beamformers, &compensate_delays(channel), channel),
        }
    }
}

pub fn design_scheme<T: Real>(
    channel: &ScenarioChannel<T>,
    grouping: &DelayGrouping,
    scheme: Scheme,
    total_power: T,
    noise_power: T,
    settings: &ScaSettings<T>,
) -> Result<Design<T>> {
    let dam = |beamformers: BeamformerSet<T>, sca: Option<ScaOutcome<T>>| -> Result<Design<T>> {
        let report = analytic_sinr(&beamformers, grouping, channel, noise_power)?;
        Ok(Design {
            beamformers,
            report,
            sca,
            selection: None,
        })
    };
    match scheme {
        Scheme::DamMrt => dam(mrt(channel, total_power), None),
        Scheme::DamMrtWaterfilled => {
            let wf = asymptotic_mrt_alloc(channel, total_power, noise_power)?;
            dam(mrt_asymptotic(channel, &wf.powers)?, None)
        }
        Scheme::DamZf => {
            let dirs = zf_directions(channel)?;
            let alloc = zf_power_alloc(&dirs, total_power, noise_power)?;
            dam(assemble_zf(&dirs, &alloc.v, total_power)?, None)
        }
        Scheme::DamRzf => {
            let eps = default_rzf_epsilon(channel.total_paths(), noise_power, total_power);
            let dirs = rzf_directions(channel, eps)?;
            let (f, outcome) =
                rzf_sca_beamformers(channel, grouping, &dirs, total_power, noise_power, settings)?;
            dam(f, Some(outcome))
        }
        Scheme::SpMrt | Scheme::SpZf | Scheme::SpRzf => {
            let selection = select_strongest(channel);
            let (beamformers, sca) = if scheme == Scheme::SpRzf {
                let (f, o) =
                    baseline_rzf_sca(channel, &selection, total_power, noise_power, settings)?;
                (f, Some(o))
            } else {
                let f = baseline_beamformers(
                    channel,
                    &selection,
                    scheme,
                    total_power,
                    noise_power,
                    settings,
                )?;
                (f, None)
            };
            let report = baseline_sinr(&beamformers, &selection, channel, noise_power)?;
            Ok(Design {
                beamformers,
                report,
                sca,
                selection: Some(selection),
            })
        }
    }
}
