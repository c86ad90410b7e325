//! Random multi-user multipath channels seen from a half-wavelength ULA.
//!
//! Each UE `k` has `L_k` resolvable paths. Path `l` contributes the tap
//! `h_kl = alpha_kl a(theta_kl)` at integer symbol delay `n_kl`. Gains are
//! circularly-symmetric complex Gaussian with variance `pathloss / L_k`, so
//! the mean energy of a UE's path set does not depend on how many paths it has.

use nalgebra::Complex;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{DamError, Result};
use crate::scalar::{inner, norm_sqr, CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T: Real> {
    pub num_antennas: usize,
    pub paths_per_ue: Vec<usize>,
    /// Total transmit power budget in watts.
    pub transmit_power: T,
    /// Receiver noise power in watts.
    pub noise_power: T,
    /// Delays are drawn from `0..=max_delay` symbol periods.
    pub max_delay: usize,
    /// Angle-of-departure interval in degrees.
    pub aod_range_deg: (T, T),
    /// Linear large-scale power gain applied to every path.
    pub pathloss: T,
    pub rng_seed: u64,
}

impl<T: Real> ScenarioConfig<T> {
    pub fn num_ues(&self) -> usize {
        self.paths_per_ue.len()
    }

    pub fn total_paths(&self) -> usize {
        self.paths_per_ue.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return Err(DamError::InvalidConfig(
                "num_antennas must be at least 1".into(),
            ));
        }
        if self.paths_per_ue.is_empty() {
            return Err(DamError::InvalidConfig(
                "at least one UE is required".into(),
            ));
        }
        if self.paths_per_ue.contains(&0) {
            return Err(DamError::InvalidConfig(
                "every UE needs at least one path".into(),
            ));
        }
        if !(self.transmit_power > T::zero()) {
            return Err(DamError::InvalidConfig(format!(
                "transmit power must be positive, got {:e}",
                self.transmit_power
            )));
        }
        if !(self.noise_power > T::zero()) {
            return Err(DamError::NonPositiveNoise(self.noise_power.as_f64()));
        }
        if !(self.pathloss > T::zero()) {
            return Err(DamError::InvalidConfig(
                "pathloss factor must be positive".into(),
            ));
        }
        if !(self.aod_range_deg.0 <= self.aod_range_deg.1) {
            return Err(DamError::InvalidConfig("empty AoD interval".into()));
        }
        let widest = *self.paths_per_ue.iter().max().unwrap_or(&0);
        if self.max_delay + 1 < widest {
            return Err(DamError::DelayRangeTooNarrow {
                paths: widest,
                max_delay: self.max_delay,
            });
        }
        Ok(())
    }

    /// RNG seeded from `rng_seed`.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

/// Angular and gain parameters of a path generated from the ULA model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry<T: Real> {
    pub gain: Complex<T>,
    /// Radians.
    pub aod: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathParams<T: Real> {
    /// Delay in symbol periods.
    pub delay: usize,
    /// `None` for channels assembled from arbitrary tap vectors.
    pub geometry: Option<PathGeometry<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeChannel<T: Real> {
    pub paths: Vec<PathParams<T>>,
    pub vectors: Vec<CVector<T>>,
    pub n_min: usize,
    pub n_max: usize,
}

impl<T: Real> UeChannel<T> {
    fn new(paths: Vec<PathParams<T>>, vectors: Vec<CVector<T>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(DamError::InvalidConfig("UE without paths".into()));
        }
        let mut delays: Vec<usize> = paths.iter().map(|p| p.delay).collect();
        delays.sort_unstable();
        if delays.windows(2).any(|w| w[0] == w[1]) {
            return Err(DamError::InvalidConfig(
                "path delays of one UE must be pairwise distinct".into(),
            ));
        }
        Ok(UeChannel {
            n_min: delays[0],
            n_max: delays[delays.len() - 1],
            paths,
            vectors,
        })
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn delay(&self, l: usize) -> usize {
        self.paths[l].delay
    }

    /// `h̄_k`: the path vectors stacked into one `M_t L_k` vector.
    pub fn stacked(&self) -> CVector<T> {
        let m = self.vectors[0].len();
        CVector::<T>::from_fn(m * self.vectors.len(), |i, _| self.vectors[i / m][i % m])
    }

    /// `‖h̄_k‖²`.
    pub fn energy(&self) -> T {
        self.vectors
            .iter()
            .fold(T::zero(), |acc, v| acc + norm_sqr(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioChannel<T: Real> {
    pub num_antennas: usize,
    pub ues: Vec<UeChannel<T>>,
    /// All path vectors as columns, UE-major and path-minor.
    pub h: CMatrix<T>,
}

impl<T: Real> ScenarioChannel<T> {
    /// Builds a channel from explicit taps: per UE, a list of `(vector, delay)`.
    pub fn from_taps(ues: Vec<Vec<(CVector<T>, usize)>>) -> Result<Self> {
        let mut built = Vec::with_capacity(ues.len());
        for taps in ues {
            let (vectors, paths): (Vec<_>, Vec<_>) = taps
                .into_iter()
                .map(|(v, delay)| {
                    (
                        v,
                        PathParams {
                            delay,
                            geometry: None,
                        },
                    )
                })
                .unzip();
            built.push(UeChannel::new(paths, vectors)?);
        }
        Self::assemble(built)
    }

    /// Builds a channel from path parameters through the ULA response.
    pub fn from_paths(num_antennas: usize, ues: Vec<Vec<PathParams<T>>>) -> Result<Self> {
        let mut built = Vec::with_capacity(ues.len());
        for paths in ues {
            let vectors = paths
                .iter()
                .map(|p| {
                    let g = p
                        .geometry
                        .ok_or_else(|| DamError::InvalidConfig("path without gain/AoD".into()))?;
                    Ok(array_response(g.aod, num_antennas).map(|z| z * g.gain))
                })
                .collect::<Result<Vec<_>>>()?;
            built.push(UeChannel::new(paths, vectors)?);
        }
        Self::assemble(built)
    }

    fn assemble(ues: Vec<UeChannel<T>>) -> Result<Self> {
        if ues.is_empty() {
            return Err(DamError::InvalidConfig("channel without UEs".into()));
        }
        let m = ues[0].vectors[0].len();
        if m == 0 || ues.iter().flat_map(|u| &u.vectors).any(|v| v.len() != m) {
            return Err(DamError::DimensionMismatch(
                "all path vectors must have the same nonzero length".into(),
            ));
        }
        let cols: Vec<&CVector<T>> = ues.iter().flat_map(|u| u.vectors.iter()).collect();
        let h = CMatrix::<T>::from_fn(m, cols.len(), |i, j| cols[j][i]);
        Ok(ScenarioChannel {
            num_antennas: m,
            ues,
            h,
        })
    }

    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    /// `L_tot`.
    pub fn total_paths(&self) -> usize {
        self.ues.iter().map(|u| u.num_paths()).sum()
    }

    pub fn paths_per_ue(&self) -> Vec<usize> {
        self.ues.iter().map(|u| u.num_paths()).collect()
    }

    /// Column of `H` holding path `l` of UE `k`.
    pub fn column_index(&self, k: usize, l: usize) -> usize {
        self.ues[..k].iter().map(|u| u.num_paths()).sum::<usize>() + l
    }

    pub fn path_vector(&self, k: usize, l: usize) -> &CVector<T> {
        &self.ues[k].vectors[l]
    }

    /// `‖H‖_F²`.
    pub fn frobenius_sqr(&self) -> T {
        self.ues.iter().fold(T::zero(), |acc, u| acc + u.energy())
    }
}

/// ULA response `a(θ)` with half-wavelength spacing: entry `m` is
/// `exp(-j π m cos θ)`.
pub fn array_response<T: Real>(theta: T, num_antennas: usize) -> CVector<T> {
    let phase = T::pi() * theta.cos();
    CVector::<T>::from_fn(num_antennas, |m, _| {
        let arg = -phase * T::count(m);
        Complex::new(arg.cos(), arg.sin())
    })
}

/// Draws a channel realization. Per UE the delays are sampled without
/// replacement, then the AoDs, then the gains.
pub fn generate_scenario<T: Real, R: Rng + ?Sized>(
    config: &ScenarioConfig<T>,
    rng: &mut R,
) -> Result<ScenarioChannel<T>> {
    config.validate()?;
    let (lo, hi) = (
        config.aod_range_deg.0.as_f64().to_radians(),
        config.aod_range_deg.1.as_f64().to_radians(),
    );
    let pathloss = config.pathloss.as_f64();
    let mut ues = Vec::with_capacity(config.num_ues());
    for &num_paths in &config.paths_per_ue {
        let delays = sample(rng, config.max_delay + 1, num_paths).into_vec();
        let aods: Vec<f64> = (0..num_paths)
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        let std = (pathloss / (2.0 * num_paths as f64)).sqrt();
        let paths = delays
            .into_iter()
            .zip(aods)
            .map(|(delay, aod)| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                PathParams {
                    delay,
                    geometry: Some(PathGeometry {
                        gain: Complex::new(T::lit(std * re), T::lit(std * im)),
                        aod: T::lit(aod),
                    }),
                }
            })
            .collect();
        ues.push(paths);
    }
    ScenarioChannel::from_paths(config.num_antennas, ues)
}

/// `|a^H b| / (‖a‖ ‖b‖)`.
pub fn asymptotic_correlation<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(DamError::DimensionMismatch(format!(
            "correlation of vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = norm_sqr(a).sqrt();
    let nb = norm_sqr(b).sqrt();
    if na == T::zero() || nb == T::zero() {
        return Err(DamError::ZeroNorm("asymptotic_correlation"));
    }
    Ok(inner(a, b).norm_sqr().sqrt() / (na * nb))
}
