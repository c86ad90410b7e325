use std::fmt;
use std::str::FromStr;

use nalgebra::Complex;

use crate::channel::ScenarioChannel;
use crate::dam::grouping::DelayGrouping;
use crate::error::{DamError, Result};
use crate::scalar::{inner, norm_sqr, CVector, Real};

/// Transmission scheme a beamformer set was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Path-based MRT normalized by `‖H‖_F`.
    DamMrt,
    /// Path-based MRT with per-UE water-filled power.
    DamMrtWaterfilled,
    DamZf,
    DamRzf,
    SpMrt,
    SpZf,
    SpRzf,
}

impl Scheme {
    /// The six schemes compared in sweeps.
    pub const SWEEP: [Scheme; 6] = [
        Scheme::DamMrt,
        Scheme::DamZf,
        Scheme::DamRzf,
        Scheme::SpMrt,
        Scheme::SpZf,
        Scheme::SpRzf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DamMrt => "DAM-MRT",
            Scheme::DamMrtWaterfilled => "DAM-MRT-WF",
            Scheme::DamZf => "DAM-ZF",
            Scheme::DamRzf => "DAM-RZF",
            Scheme::SpMrt => "SP-MRT",
            Scheme::SpZf => "SP-ZF",
            Scheme::SpRzf => "SP-RZF",
        }
    }

    /// Strongest-path baseline schemes transmit one undelayed stream per UE.
    pub fn is_strongest_path(self) -> bool {
        matches!(self, Scheme::SpMrt | Scheme::SpZf | Scheme::SpRzf)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = DamError;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Scheme::DamMrt,
            Scheme::DamMrtWaterfilled,
            Scheme::DamZf,
            Scheme::DamRzf,
            Scheme::SpMrt,
            Scheme::SpZf,
            Scheme::SpRzf,
        ];
        all.into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| DamError::InvalidConfig(format!("unknown scheme '{s}'")))
    }
}

/// Transmit vectors per UE: one per path for DAM, one per UE for the
/// strongest-path baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet<T: Real> {
    pub scheme: Scheme,
    pub vectors: Vec<Vec<CVector<T>>>,
}

impl<T: Real> BeamformerSet<T> {
    /// `f̄_k`.
    pub fn stacked(&self, k: usize) -> CVector<T> {
        let vs = &self.vectors[k];
        let m = vs[0].len();
        CVector::<T>::from_fn(m * vs.len(), |i, _| vs[i / m][i % m])
    }

    pub fn ue_power(&self, k: usize) -> T {
        self.vectors[k]
            .iter()
            .fold(T::zero(), |acc, f| acc + norm_sqr(f))
    }

    fn check_dam_shape(&self, channel: &ScenarioChannel<T>) -> Result<()> {
        if self.vectors.len() != channel.num_ues() {
            return Err(DamError::DimensionMismatch(format!(
                "{} UEs in beamformer set, {} in channel",
                self.vectors.len(),
                channel.num_ues()
            )));
        }
        for (k, (fs, ue)) in self.vectors.iter().zip(&channel.ues).enumerate() {
            if fs.len() != ue.num_paths() {
                return Err(DamError::DimensionMismatch(format!(
                    "UE {k}: {} beamformers for {} paths",
                    fs.len(),
                    ue.num_paths()
                )));
            }
            if fs.iter().any(|f| f.len() != channel.num_antennas) {
                return Err(DamError::DimensionMismatch(format!(
                    "UE {k}: beamformer length differs from {} antennas",
                    channel.num_antennas
                )));
            }
        }
        Ok(())
    }
}

/// `Σ_k Σ_l ‖f_kl‖²`.
pub fn transmit_power<T: Real>(f: &BeamformerSet<T>) -> T {
    (0..f.vectors.len()).fold(T::zero(), |acc, k| acc + f.ue_power(k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeReport<T: Real> {
    pub desired: T,
    pub isi: T,
    pub iui: T,
    pub noise: T,
    pub sinr: T,
    /// `log2(1 + sinr)` in bps/Hz.
    pub rate: T,
}

impl<T: Real> UeReport<T> {
    pub fn from_powers(desired: T, isi: T, iui: T, noise: T) -> Self {
        let sinr = desired / (isi + iui + noise);
        UeReport {
            desired,
            isi,
            iui,
            noise,
            sinr,
            rate: (T::one() + sinr).log2(),
        }
    }

    /// `(ISI + IUI) / desired`.
    pub fn interference_ratio(&self) -> T {
        (self.isi + self.iui) / self.desired
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport<T: Real> {
    pub ues: Vec<UeReport<T>>,
}

impl<T: Real> RateReport<T> {
    pub fn sum_rate(&self) -> T {
        sum_rate(self)
    }
}

/// `Σ_k log2(1 + γ_k)`.
pub fn sum_rate<T: Real>(report: &RateReport<T>) -> T {
    report
        .ues
        .iter()
        .fold(T::zero(), |acc, u| acc + (T::one() + u.sinr).log2())
}

/// Desired, ISI and IUI powers of one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms<T: Real> {
    pub desired: T,
    pub isi: T,
    pub iui: T,
}

/// The three equivalent ways of writing the SINR terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrForm {
    /// Per-path sums over the sparse delay bins.
    PerPath,
    /// Stacked vectors `ḡ_{kk'}[i]^H f̄_{k'}` over every offset.
    Stacked,
    /// Matrix norms `‖G_{kk'}^H f̄_{k'}‖²`.
    Matrix,
}

/// Desired/ISI/IUI powers for every UE of a DAM beamformer set.
pub fn interference_terms<T: Real>(
    f: &BeamformerSet<T>,
    grouping: &DelayGrouping,
    channel: &ScenarioChannel<T>,
    form: SinrForm,
) -> Result<Vec<Terms<T>>> {
    f.check_dam_shape(channel)?;
    if grouping.num_ues() != channel.num_ues() {
        return Err(DamError::DimensionMismatch(
            "grouping built for another channel".into(),
        ));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let stacked: Vec<CVector<T>> = match form {
        SinrForm::PerPath => Vec::new(),
        _ => (0..channel.num_ues()).map(|k| f.stacked(k)).collect(),
    };
    let mut out = Vec::with_capacity(channel.num_ues());
    for (k, ue) in channel.ues.iter().enumerate() {
        let desired = match form {
            SinrForm::PerPath => ue
                .vectors
                .iter()
                .zip(&f.vectors[k])
                .fold(zero, |acc, (h, fv)| acc + inner(h, fv))
                .norm_sqr(),
            _ => inner(&ue.stacked(), &stacked[k]).norm_sqr(),
        };
        let mut isi = T::zero();
        let mut iui = T::zero();
        for k_ref in 0..channel.num_ues() {
            let pair = grouping.pair(k, k_ref);
            let power = match form {
                SinrForm::PerPath => pair
                    .nonzero_bins()
                    .filter(|(i, _)| !(pair.is_self_pair() && *i == 0))
                    .map(|(_, slots)| {
                        slots
                            .iter()
                            .enumerate()
                            .filter_map(|(lr, s)| {
                                s.map(|l| inner(&ue.vectors[l], &f.vectors[k_ref][lr]))
                            })
                            .fold(zero, |a, b| a + b)
                            .norm_sqr()
                    })
                    .fold(T::zero(), |a, b| a + b),
                SinrForm::Stacked => pair
                    .column_offsets()
                    .into_iter()
                    .map(|i| inner(&pair.g_stacked(channel, i), &stacked[k_ref]).norm_sqr())
                    .fold(T::zero(), |a, b| a + b),
                SinrForm::Matrix => {
                    let g = pair.g_matrix(channel);
                    (g.adjoint() * &stacked[k_ref])
                        .iter()
                        .fold(T::zero(), |a, z| a + z.norm_sqr())
                }
            };
            if k_ref == k {
                isi += power;
            } else {
                iui += power;
            }
        }
        out.push(Terms { desired, isi, iui });
    }
    Ok(out)
}

/// Per-UE SINR decomposition of a DAM beamformer set.
pub fn analytic_sinr<T: Real>(
    f: &BeamformerSet<T>,
    grouping: &DelayGrouping,
    channel: &ScenarioChannel<T>,
    noise_power: T,
) -> Result<RateReport<T>> {
    if !(noise_power > T::zero()) {
        return Err(DamError::NonPositiveNoise(noise_power.as_f64()));
    }
    let terms = interference_terms(f, grouping, channel, SinrForm::PerPath)?;
    Ok(RateReport {
        ues: terms
            .into_iter()
            .map(|t| UeReport::from_powers(t.desired, t.isi, t.iui, noise_power))
            .collect(),
    })
}
