//! Real-valued form of the SINR terms for a fixed set of unit transmit
//! directions, as a function of the non-negative path amplitudes.
//!
//! Each interference or desired component is a complex linear form `a^T u`
//! in the real amplitudes `a`. Writing `U = [Re u, Im u]` gives
//! `|a^T u|² = ‖a^T U‖²`, and a sum of components stacks their `U`
//! blocks side by side.

use nalgebra::{DMatrix, DVector};

use crate::beamformers::RzfDirections;
use crate::channel::ScenarioChannel;
use crate::dam::DelayGrouping;
use crate::error::{DamError, Result};
use crate::scalar::{inner, CVector, Real};

/// Stacks complex vectors of length `n` into the `n x 2c` real matrix
/// `[Re u_1, Im u_1, …, Re u_c, Im u_c]`.
pub fn realify<T: Real>(components: &[CVector<T>], n: usize) -> DMatrix<T> {
    let mut out = DMatrix::<T>::zeros(n, 2 * components.len());
    for (c, u) in components.iter().enumerate() {
        for (i, z) in u.iter().enumerate() {
            out[(i, 2 * c)] = z.re;
            out[(i, 2 * c + 1)] = z.im;
        }
    }
    out
}

/// `‖a^T M‖²`.
fn form_power<T: Real>(a: &DVector<T>, m: &DMatrix<T>) -> T {
    (m.transpose() * a).norm_squared()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeSinrData<T: Real> {
    /// `U_k`, `L_k x 2`.
    pub desired: DMatrix<T>,
    /// `Ū_k`, `L_k x 2·(ISI components)`.
    pub isi: DMatrix<T>,
    /// Per interfering UE `k'`: `L_{k'} x 2·(IUI components)`.
    pub iui: Vec<(usize, DMatrix<T>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrData<T: Real> {
    pub ues: Vec<UeSinrData<T>>,
}

impl<T: Real> SinrData<T> {
    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    /// Amplitude-vector length of every UE.
    pub fn streams_per_ue(&self) -> Vec<usize> {
        self.ues.iter().map(|u| u.desired.nrows()).collect()
    }

    pub fn total_streams(&self) -> usize {
        self.streams_per_ue().iter().sum()
    }

    fn check(&self, a: &[DVector<T>]) -> Result<()> {
        let ok = a.len() == self.ues.len()
            && a.iter()
                .zip(&self.ues)
                .all(|(ak, u)| ak.len() == u.desired.nrows());
        if ok {
            Ok(())
        } else {
            Err(DamError::DimensionMismatch(
                "amplitudes vs SINR data".into(),
            ))
        }
    }

    pub fn p_ds(&self, k: usize, a_k: &DVector<T>) -> T {
        form_power(a_k, &self.ues[k].desired)
    }

    pub fn p_isi(&self, k: usize, a_k: &DVector<T>) -> T {
        form_power(a_k, &self.ues[k].isi)
    }

    pub fn p_iui(&self, k: usize, a: &[DVector<T>]) -> T {
        self.ues[k]
            .iui
            .iter()
            .fold(T::zero(), |acc, (kr, m)| acc + form_power(&a[*kr], m))
    }

    /// Exact SINR of every UE.
    pub fn sinr(&self, a: &[DVector<T>], noise_power: T) -> Result<Vec<T>> {
        self.check(a)?;
        Ok((0..self.ues.len())
            .map(|k| self.p_ds(k, &a[k]) / (self.p_isi(k, &a[k]) + self.p_iui(k, a) + noise_power))
            .collect())
    }

    pub fn sum_rate(&self, a: &[DVector<T>], noise_power: T) -> Result<T> {
        Ok(self
            .sinr(a, noise_power)?
            .into_iter()
            .fold(T::zero(), |acc, g| acc + (T::one() + g).log2()))
    }

    /// Interference quadratic form of UE `k` over the flattened amplitude
    /// vector: `P_ISI + P_IUI = a^T A_k a`.
    pub fn interference_matrix(&self, k: usize) -> DMatrix<T> {
        let sizes = self.streams_per_ue();
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect();
        let n = sizes.iter().sum();
        let mut a = DMatrix::<T>::zeros(n, n);
        let mut add = |kr: usize, m: &DMatrix<T>| {
            let block = m * m.transpose();
            let o = offsets[kr];
            let mut view = a.view_mut((o, o), (sizes[kr], sizes[kr]));
            view += block;
        };
        add(k, &self.ues[k].isi);
        for (kr, m) in &self.ues[k].iui {
            add(*kr, m);
        }
        a
    }
}

/// Builds `U_k`, `Ū_k` and the IUI blocks for path-based RZF from the
/// delay-difference grouping and the normalized RZF directions.
pub fn build_rzf_sinr_data<T: Real>(
    channel: &ScenarioChannel<T>,
    grouping: &DelayGrouping,
    directions: &RzfDirections<T>,
) -> Result<SinrData<T>> {
    if directions.paths_per_ue != channel.paths_per_ue()
        || directions.raw.nrows() != channel.num_antennas
    {
        return Err(DamError::DimensionMismatch(
            "RZF directions vs channel".into(),
        ));
    }
    if grouping.num_ues() != channel.num_ues() {
        return Err(DamError::DimensionMismatch("grouping vs channel".into()));
    }
    let dirs = directions.unit_directions();
    let zero = nalgebra::Complex::new(T::zero(), T::zero());
    let mut ues = Vec::with_capacity(channel.num_ues());
    for (k, ue) in channel.ues.iter().enumerate() {
        let lk = ue.num_paths();
        let u: CVector<T> = CVector::<T>::from_fn(lk, |l, _| inner(&ue.vectors[l], &dirs[k][l]));
        let bin_vector = |k_ref: usize, slots: &[Option<usize>]| -> CVector<T> {
            CVector::<T>::from_fn(slots.len(), |lr, _| match slots[lr] {
                Some(l) => inner(&ue.vectors[l], &dirs[k_ref][lr]),
                None => zero,
            })
        };
        let self_pair = grouping.pair(k, k);
        let isi: Vec<CVector<T>> = self_pair
            .nonzero_bins()
            .filter(|(i, _)| *i != 0)
            .map(|(_, slots)| bin_vector(k, slots))
            .collect();
        let mut iui = Vec::new();
        for k_ref in (0..channel.num_ues()).filter(|&x| x != k) {
            let comps: Vec<CVector<T>> = grouping
                .pair(k, k_ref)
                .nonzero_bins()
                .map(|(_, slots)| bin_vector(k_ref, slots))
                .collect();
            iui.push((k_ref, realify(&comps, channel.ues[k_ref].num_paths())));
        }
        ues.push(UeSinrData {
            desired: realify(&[u], lk),
            isi: realify(&isi, lk),
            iui,
        });
    }
    Ok(SinrData { ues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformers::{default_rzf_epsilon, rzf_directions};
    use crate::channel::{generate_scenario, ScenarioConfig};
    use crate::dam::{build_grouping, interference_terms, Scheme, SinrForm};
    use rand::{Rng, SeedableRng};

    #[test]
    fn real_form_matches_complex_terms() {
        for seed in 0..10 {
            let cfg = ScenarioConfig {
                num_antennas: 16,
                paths_per_ue: vec![3, 2],
                transmit_power: 1.0,
                noise_power: 1e-2,
                max_delay: 12,
                aod_range_deg: (-90.0, 90.0),
                pathloss: 1.0,
                rng_seed: seed,
            };
            let ch = generate_scenario(&cfg, &mut cfg.rng()).unwrap();
            let g = build_grouping(&ch);
            let eps = default_rzf_epsilon(5, 1e-2, 1.0);
            let dirs = rzf_directions(&ch, eps).unwrap();
            let data = build_rzf_sinr_data(&ch, &g, &dirs).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<DVector<f64>> = data
                .streams_per_ue()
                .iter()
                .map(|&n| DVector::from_fn(n, |_, _| rng.random::<f64>()))
                .collect();
            let amps: Vec<Vec<f64>> = a.iter().map(|v| v.iter().copied().collect()).collect();
            let f = dirs.assemble(&amps, Scheme::DamRzf).unwrap();
            let terms = interference_terms(&f, &g, &ch, SinrForm::PerPath).unwrap();
            for k in 0..2 {
                let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
                assert!(rel(data.p_ds(k, &a[k]), terms[k].desired) < 1e-10);
                assert!(rel(data.p_isi(k, &a[k]), terms[k].isi) < 1e-10);
                assert!(rel(data.p_iui(k, &a), terms[k].iui) < 1e-10);
                let flat = DVector::from_iterator(5, a.iter().flat_map(|v| v.iter().copied()));
                let quad = (flat.transpose() * data.interference_matrix(k) * &flat)[(0, 0)];
                assert!(rel(quad, terms[k].isi + terms[k].iui) < 1e-10);
            }
        }
    }

    #[test]
    fn single_path_shapes() {
        let h = CVector::from_fn(4, |i, _| nalgebra::Complex::new(1.0, i as f64));
        let ch = ScenarioChannel::from_taps(vec![vec![(h, 2)]]).unwrap();
        let dirs = rzf_directions(&ch, 0.1).unwrap();
        let data = build_rzf_sinr_data(&ch, &build_grouping(&ch), &dirs).unwrap();
        assert_eq!(data.ues[0].desired.shape(), (1, 2));
        assert_eq!(data.ues[0].isi.ncols(), 0);
        let zero = [DVector::zeros(1)];
        assert_eq!(data.sinr(&zero, 1.0).unwrap(), vec![0.0]);
        let u = data.ues[0].desired.row(0);
        let a = [DVector::from_element(1, 1.5)];
        assert!((data.p_ds(0, &a[0]) - 2.25 * (u[0] * u[0] + u[1] * u[1])).abs() < 1e-12);
    }
}
