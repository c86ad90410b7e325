//! Strongest-path benchmark: each UE is served through its strongest tap
//! only, with no delay pre-compensation. Every other tap still reaches the
//! receivers and shows up as ISI or IUI.

use nalgebra::Complex;

use crate::beamformers::{default_rzf_epsilon, rzf_from_matrix, zf_from_matrix, RzfDirections};
use crate::channel::ScenarioChannel;
use crate::dam::{BeamformerSet, RateReport, Scheme, Stream, Transmission, UeReport};
use crate::error::{DamError, Result};
use crate::power::{
    realify, rzf_sca, waterfilling, zf_power_alloc, ScaOutcome, ScaSettings, SinrData, UeSinrData,
};
use crate::scalar::{inner, norm_sqr, scale, CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct StrongestPathSelection<T: Real> {
    /// `l*_k`.
    pub indices: Vec<usize>,
    /// `h_{k,l*}`.
    pub channels: Vec<CVector<T>>,
}

impl<T: Real> StrongestPathSelection<T> {
    pub fn num_ues(&self) -> usize {
        self.indices.len()
    }

    /// `H_*`, one column per UE.
    pub fn matrix(&self) -> CMatrix<T> {
        CMatrix::<T>::from_columns(&self.channels)
    }

    /// Each UE locks to the delay of its strongest path.
    pub fn lock_delays(&self, channel: &ScenarioChannel<T>) -> Vec<usize> {
        self.indices
            .iter()
            .zip(&channel.ues)
            .map(|(&l, u)| u.delay(l))
            .collect()
    }
}

/// `argmax_l ‖h_kl‖` per UE; the lowest index wins ties.
pub fn select_strongest<T: Real>(channel: &ScenarioChannel<T>) -> StrongestPathSelection<T> {
    let mut indices = Vec::with_capacity(channel.num_ues());
    let mut channels = Vec::with_capacity(channel.num_ues());
    for ue in &channel.ues {
        let mut best = 0;
        let mut best_norm = norm_sqr(&ue.vectors[0]);
        for (l, h) in ue.vectors.iter().enumerate().skip(1) {
            let n = norm_sqr(h);
            if n > best_norm {
                best = l;
                best_norm = n;
            }
        }
        indices.push(best);
        channels.push(ue.vectors[best].clone());
    }
    StrongestPathSelection { indices, channels }
}

fn check_single_stream<T: Real>(f: &BeamformerSet<T>, channel: &ScenarioChannel<T>) -> Result<()> {
    if f.vectors.len() != channel.num_ues()
        || f.vectors
            .iter()
            .any(|v| v.len() != 1 || v[0].len() != channel.num_antennas)
    {
        return Err(DamError::DimensionMismatch(
            "strongest-path beamformers need one vector per UE".into(),
        ));
    }
    Ok(())
}

/// Desired power from the strongest tap at the lock delay; every other tap
/// of the own channel is ISI and every tap of another UE's channel is IUI.
pub fn baseline_sinr<T: Real>(
    f: &BeamformerSet<T>,
    selection: &StrongestPathSelection<T>,
    channel: &ScenarioChannel<T>,
    noise_power: T,
) -> Result<RateReport<T>> {
    if !(noise_power > T::zero()) {
        return Err(DamError::NonPositiveNoise(noise_power.as_f64()));
    }
    check_single_stream(f, channel)?;
    if selection.num_ues() != channel.num_ues() {
        return Err(DamError::DimensionMismatch("selection vs channel".into()));
    }
    let ues = channel
        .ues
        .iter()
        .enumerate()
        .map(|(k, ue)| {
            let mut desired = T::zero();
            let mut isi = T::zero();
            let mut iui = T::zero();
            for (kr, fk) in f.vectors.iter().enumerate() {
                for (l, h) in ue.vectors.iter().enumerate() {
                    let p = inner(h, &fk[0]).norm_sqr();
                    if kr != k {
                        iui += p;
                    } else if l == selection.indices[k] {
                        desired += p;
                    } else {
                        isi += p;
                    }
                }
            }
            UeReport::from_powers(desired, isi, iui, noise_power)
        })
        .collect();
    Ok(RateReport { ues })
}

/// Undelayed transmission of one stream per UE.
pub fn baseline_transmission<T: Real>(
    f: &BeamformerSet<T>,
    selection: &StrongestPathSelection<T>,
    channel: &ScenarioChannel<T>,
) -> Result<Transmission<T>> {
    check_single_stream(f, channel)?;
    Ok(Transmission {
        streams: f
            .vectors
            .iter()
            .enumerate()
            .map(|(k, v)| Stream {
                ue: k,
                vector: v[0].clone(),
                delay: 0,
            })
            .collect(),
        lock_delays: selection.lock_delays(channel),
    })
}

/// SINR data over the per-UE amplitudes for fixed unit directions `d_k`.
pub fn baseline_sinr_data<T: Real>(
    channel: &ScenarioChannel<T>,
    selection: &StrongestPathSelection<T>,
    directions: &[CVector<T>],
) -> Result<SinrData<T>> {
    if directions.len() != channel.num_ues() || selection.num_ues() != channel.num_ues() {
        return Err(DamError::DimensionMismatch("directions vs channel".into()));
    }
    let one = |z: Complex<T>| CVector::<T>::from_element(1, z);
    let ues = channel
        .ues
        .iter()
        .enumerate()
        .map(|(k, ue)| {
            let star = selection.indices[k];
            let desired = realify(&[one(inner(&ue.vectors[star], &directions[k]))], 1);
            let isi: Vec<CVector<T>> = ue
                .vectors
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != star)
                .map(|(_, h)| one(inner(h, &directions[k])))
                .collect();
            let iui = (0..channel.num_ues())
                .filter(|&kr| kr != k)
                .map(|kr| {
                    let comps: Vec<CVector<T>> = ue
                        .vectors
                        .iter()
                        .map(|h| one(inner(h, &directions[kr])))
                        .collect();
                    (kr, realify(&comps, 1))
                })
                .collect();
            UeSinrData {
                desired,
                isi: realify(&isi, 1),
                iui,
            }
        })
        .collect();
    Ok(SinrData { ues })
}

/// RZF over `H_*` with `ε = K σ² / P`.
pub fn baseline_rzf_directions<T: Real>(
    selection: &StrongestPathSelection<T>,
    total_power: T,
    noise_power: T,
) -> Result<RzfDirections<T>> {
    let kk = selection.num_ues();
    rzf_from_matrix(
        &selection.matrix(),
        vec![1; kk],
        default_rzf_epsilon(kk, noise_power, total_power),
    )
}

/// Baseline RZF with SCA-optimized powers.
pub fn baseline_rzf_sca<T: Real>(
    channel: &ScenarioChannel<T>,
    selection: &StrongestPathSelection<T>,
    total_power: T,
    noise_power: T,
    settings: &ScaSettings<T>,
) -> Result<(BeamformerSet<T>, ScaOutcome<T>)> {
    let dirs = baseline_rzf_directions(selection, total_power, noise_power)?;
    let units: Vec<CVector<T>> = dirs.unit_directions().into_iter().flatten().collect();
    let data = baseline_sinr_data(channel, selection, &units)?;
    let outcome = rzf_sca(&data, total_power, noise_power, settings)?;
    let f = dirs.assemble(&outcome.amplitudes(), Scheme::SpRzf)?;
    Ok((f, outcome))
}

/// MRT, ZF or RZF on the strongest paths.
pub fn baseline_beamformers<T: Real>(
    channel: &ScenarioChannel<T>,
    selection: &StrongestPathSelection<T>,
    scheme: Scheme,
    total_power: T,
    noise_power: T,
    settings: &ScaSettings<T>,
) -> Result<BeamformerSet<T>> {
    match scheme {
        Scheme::SpMrt => {
            let gains: Vec<T> = selection.channels.iter().map(norm_sqr).collect();
            let wf = waterfilling(&gains, total_power, noise_power)?;
            let vectors = selection
                .channels
                .iter()
                .zip(&wf.powers)
                .zip(&gains)
                .map(|((h, &p), &g)| vec![scale(h, (p / g).sqrt())])
                .collect();
            Ok(BeamformerSet { scheme, vectors })
        }
        Scheme::SpZf => {
            let dirs = zf_from_matrix(&selection.matrix(), vec![1; selection.num_ues()])?;
            let alloc = zf_power_alloc(&dirs, total_power, noise_power)?;
            let vectors = dirs
                .per_ue()
                .into_iter()
                .zip(&alloc.v)
                .map(|(w, v)| vec![scale(&w[0], v[0].sqrt())])
                .collect();
            Ok(BeamformerSet { scheme, vectors })
        }
        Scheme::SpRzf => {
            baseline_rzf_sca(channel, selection, total_power, noise_power, settings).map(|r| r.0)
        }
        other => Err(DamError::InvalidConfig(format!(
            "{other} is not a strongest-path scheme"
        ))),
    }
}
