//! Path-based MRT, ZF and RZF transmit directions.

use nalgebra::Complex;

use crate::channel::ScenarioChannel;
use crate::dam::{BeamformerSet, Scheme};
use crate::error::{DamError, Result};
use crate::linalg::{ridge_right_inverse, right_pinv_of_adjoint};
use crate::scalar::{norm_sqr, scale, CMatrix, CVector, Real};

/// `H` declared rank deficient below this fraction of the largest `|R_jj|`.
pub const ZF_RANK_TOLERANCE: f64 = 1e-10;

/// Splits the columns of a `M x Σ n_k` matrix into per-UE groups.
fn split_columns<T: Real>(m: &CMatrix<T>, groups: &[usize]) -> Vec<Vec<CVector<T>>> {
    let mut out = Vec::with_capacity(groups.len());
    let mut c = 0;
    for &n in groups {
        out.push((0..n).map(|j| m.column(c + j).into_owned()).collect());
        c += n;
    }
    out
}

/// `f_kl = √P h_kl / ‖H‖_F`: uses the full budget with power proportional to
/// path energy.
pub fn mrt<T: Real>(channel: &ScenarioChannel<T>, total_power: T) -> BeamformerSet<T> {
    let s = (total_power / channel.frobenius_sqr()).sqrt();
    BeamformerSet {
        scheme: Scheme::DamMrt,
        vectors: channel
            .ues
            .iter()
            .map(|u| u.vectors.iter().map(|h| scale(h, s)).collect())
            .collect(),
    }
}

/// `f_kl = √p_k h_kl / ‖h̄_k‖`, so UE `k` radiates exactly `p_k`.
pub fn mrt_asymptotic<T: Real>(
    channel: &ScenarioChannel<T>,
    ue_powers: &[T],
) -> Result<BeamformerSet<T>> {
    if ue_powers.len() != channel.num_ues() {
        return Err(DamError::DimensionMismatch(format!(
            "{} powers for {} UEs",
            ue_powers.len(),
            channel.num_ues()
        )));
    }
    if let Some(p) = ue_powers.iter().find(|p| **p < T::zero()) {
        return Err(DamError::NegativePower(p.as_f64()));
    }
    let vectors = channel
        .ues
        .iter()
        .zip(ue_powers)
        .map(|(u, &p)| {
            let xi = (p / u.energy()).sqrt();
            u.vectors.iter().map(|h| scale(h, xi)).collect()
        })
        .collect();
    Ok(BeamformerSet {
        scheme: Scheme::DamMrtWaterfilled,
        vectors,
    })
}

/// Zero-forcing directions `W = H (H^H H)^{-1}`, so that `H^H W = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfDirections<T: Real> {
    pub w: CMatrix<T>,
    pub paths_per_ue: Vec<usize>,
}

impl<T: Real> ZfDirections<T> {
    /// Direction vectors grouped per UE.
    pub fn per_ue(&self) -> Vec<Vec<CVector<T>>> {
        split_columns(&self.w, &self.paths_per_ue)
    }

    /// `‖w_kl‖²` grouped per UE.
    pub fn column_norms_sqr(&self) -> Vec<Vec<T>> {
        self.per_ue()
            .iter()
            .map(|ws| ws.iter().map(norm_sqr).collect())
            .collect()
    }
}

pub(crate) fn zf_from_matrix<T: Real>(
    h: &CMatrix<T>,
    groups: Vec<usize>,
) -> Result<ZfDirections<T>> {
    let (antennas, columns) = h.shape();
    right_pinv_of_adjoint(h, T::lit(ZF_RANK_TOLERANCE))
        .map(|w| ZfDirections {
            w,
            paths_per_ue: groups,
        })
        .map_err(|rank| DamError::ZfInfeasible {
            antennas,
            columns,
            rank,
        })
}

/// Requires `M_t ≥ L_tot` and a full column rank `H`.
pub fn zf_directions<T: Real>(channel: &ScenarioChannel<T>) -> Result<ZfDirections<T>> {
    zf_from_matrix(&channel.h, channel.paths_per_ue())
}

/// `f_kl = √v_kl w_kl`. Fails if `Σ v_kl ‖w_kl‖²` exceeds the budget.
pub fn assemble_zf<T: Real>(
    directions: &ZfDirections<T>,
    v: &[Vec<T>],
    total_power: T,
) -> Result<BeamformerSet<T>> {
    let ws = directions.per_ue();
    if v.len() != ws.len() || v.iter().zip(&ws).any(|(a, b)| a.len() != b.len()) {
        return Err(DamError::DimensionMismatch(
            "power coefficients vs ZF directions".into(),
        ));
    }
    let mut used = T::zero();
    for (vk, wk) in v.iter().zip(&ws) {
        for (&vkl, w) in vk.iter().zip(wk) {
            if vkl < T::zero() {
                return Err(DamError::NegativePower(vkl.as_f64()));
            }
            used += vkl * norm_sqr(w);
        }
    }
    if used > total_power * (T::one() + T::lit(1e-9)) {
        return Err(DamError::PowerViolation {
            requested: used.as_f64(),
            budget: total_power.as_f64(),
        });
    }
    Ok(BeamformerSet {
        scheme: Scheme::DamZf,
        vectors: v
            .iter()
            .zip(ws)
            .map(|(vk, wk)| {
                vk.iter()
                    .zip(wk)
                    .map(|(&x, w)| scale(&w, x.sqrt()))
                    .collect()
            })
            .collect(),
    })
}

/// `ε = L σ² / P` for `L` regularized columns.
pub fn default_rzf_epsilon<T: Real>(columns: usize, noise_power: T, total_power: T) -> T {
    T::count(columns) * noise_power / total_power
}

/// Regularized zero-forcing directions `F̃ = H (H^H H + ε I)^{-1}` and their
/// normalized columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RzfDirections<T: Real> {
    pub epsilon: T,
    pub raw: CMatrix<T>,
    pub paths_per_ue: Vec<usize>,
}

impl<T: Real> RzfDirections<T> {
    /// `f̃_kl / ‖f̃_kl‖` grouped per UE.
    pub fn unit_directions(&self) -> Vec<Vec<CVector<T>>> {
        split_columns(&self.raw, &self.paths_per_ue)
            .into_iter()
            .map(|fs| {
                fs.into_iter()
                    .map(|f| {
                        let n = norm_sqr(&f).sqrt();
                        scale(&f, T::one() / n)
                    })
                    .collect()
            })
            .collect()
    }

    /// `f_kl = a_kl f̃_kl / ‖f̃_kl‖` for amplitudes `a_kl = √p_kl`.
    pub fn assemble(&self, amplitudes: &[Vec<T>], scheme: Scheme) -> Result<BeamformerSet<T>> {
        let dirs = self.unit_directions();
        if amplitudes.len() != dirs.len()
            || amplitudes
                .iter()
                .zip(&dirs)
                .any(|(a, d)| a.len() != d.len())
        {
            return Err(DamError::DimensionMismatch(
                "amplitudes vs RZF directions".into(),
            ));
        }
        Ok(BeamformerSet {
            scheme,
            vectors: amplitudes
                .iter()
                .zip(dirs)
                .map(|(ak, dk)| ak.iter().zip(dk).map(|(&a, d)| scale(&d, a)).collect())
                .collect(),
        })
    }
}

pub(crate) fn rzf_from_matrix<T: Real>(
    h: &CMatrix<T>,
    groups: Vec<usize>,
    epsilon: T,
) -> Result<RzfDirections<T>> {
    let (m, n) = h.shape();
    if epsilon < T::zero() || (epsilon == T::zero() && m < n) {
        return Err(DamError::SingularGram);
    }
    let raw = ridge_right_inverse(h, epsilon).ok_or(DamError::SingularGram)?;
    if raw
        .column_iter()
        .any(|c| c.iter().all(|z| *z == Complex::new(T::zero(), T::zero())))
    {
        return Err(DamError::ZeroNorm("RZF direction"));
    }
    Ok(RzfDirections {
        epsilon,
        raw,
        paths_per_ue: groups,
    })
}

pub fn rzf_directions<T: Real>(
    channel: &ScenarioChannel<T>,
    epsilon: T,
) -> Result<RzfDirections<T>> {
    rzf_from_matrix(&channel.h, channel.paths_per_ue(), epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_scenario, ScenarioConfig};
    use crate::dam::transmit_power;
    use crate::scalar::inner;

    fn config(m: usize, paths: Vec<usize>, seed: u64) -> ScenarioConfig<f64> {
        ScenarioConfig {
            num_antennas: m,
            paths_per_ue: paths,
            transmit_power: 1.0,
            noise_power: 1e-3,
            max_delay: 40,
            aod_range_deg: (-90.0, 90.0),
            pathloss: 1.0,
            rng_seed: seed,
        }
    }

    fn subspace_angle(a: &CVector<f64>, b: &CVector<f64>) -> f64 {
        let c = inner(a, b).norm() / (norm_sqr(a) * norm_sqr(b)).sqrt();
        c.min(1.0).acos()
    }

    #[test]
    fn mrt_uses_full_power() {
        for seed in 0..5 {
            let c = config(32, vec![3, 4], seed);
            let ch = generate_scenario(&c, &mut c.rng()).unwrap();
            let f = mrt(&ch, 2.5);
            assert!((transmit_power(&f) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotic_mrt_per_ue_power() {
        let c = config(16, vec![2, 3], 4);
        let ch = generate_scenario(&c, &mut c.rng()).unwrap();
        let f = mrt_asymptotic(&ch, &[0.7, 0.3]).unwrap();
        assert!((f.ue_power(0) - 0.7).abs() < 1e-12);
        assert!((f.ue_power(1) - 0.3).abs() < 1e-12);
        let g = mrt_asymptotic(&ch, &[1.0, 0.0]).unwrap();
        assert!(g.vectors[1].iter().all(|v| norm_sqr(v) == 0.0));
        assert!(matches!(
            mrt_asymptotic(&ch, &[1.0, -0.1]),
            Err(DamError::NegativePower(_))
        ));
    }

    #[test]
    fn zf_nulls_every_cross_term() {
        let c = config(128, vec![5, 5], 9);
        let ch = generate_scenario(&c, &mut c.rng()).unwrap();
        let zf = zf_directions(&ch).unwrap();
        let prod = ch.h.adjoint() * &zf.w;
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - Complex::new(expect, 0.0)).norm() < 1e-9);
                if i != j {
                    let hi = ch.h.column(i).norm();
                    let wj = zf.w.column(j).norm();
                    assert!(prod[(i, j)].norm() < 1e-9 * hi * wj);
                }
            }
        }
    }

    #[test]
    fn zf_of_orthogonal_columns() {
        let e = |j: usize, s: f64| {
            CVector::from_fn(4, move |i, _| {
                Complex::new(if i == j { s } else { 0.0 }, 0.0)
            })
        };
        let ch = ScenarioChannel::from_taps(vec![
            vec![(e(0, 2.0), 0), (e(2, 0.5), 1)],
            vec![(e(1, 3.0), 0)],
        ])
        .unwrap();
        let zf = zf_directions(&ch).unwrap();
        for (k, ws) in zf.per_ue().iter().enumerate() {
            for (l, w) in ws.iter().enumerate() {
                let h = ch.path_vector(k, l);
                let expect = scale(h, 1.0 / norm_sqr(h));
                assert!((w - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zf_infeasible_with_too_few_antennas() {
        let c = config(9, vec![5, 5], 1);
        let ch = generate_scenario(&c, &mut c.rng()).unwrap();
        assert!(matches!(
            zf_directions(&ch),
            Err(DamError::ZfInfeasible {
                antennas: 9,
                columns: 10,
                ..
            })
        ));
    }

    #[test]
    fn assemble_zf_power_checks() {
        let c = config(16, vec![1], 2);
        let ch = generate_scenario(&c, &mut c.rng()).unwrap();
        let zf = zf_directions(&ch).unwrap();
        let w2 = zf.column_norms_sqr()[0][0];
        let f = assemble_zf(&zf, &[vec![0.0]], 1.0).unwrap();
        assert_eq!(transmit_power(&f), 0.0);
        let f = assemble_zf(&zf, &[vec![1.0 / w2]], 1.0).unwrap();
        assert!((transmit_power(&f) - 1.0).abs() < 1e-12);
        assert!(matches!(
            assemble_zf(&zf, &[vec![2.0 / w2]], 1.0),
            Err(DamError::PowerViolation { .. })
        ));
    }

    #[test]
    fn rzf_limits() {
        let c = config(64, vec![3, 3], 5);
        let ch = generate_scenario(&c, &mut c.rng()).unwrap();
        let hn = ch.frobenius_sqr();
        let zf = zf_directions(&ch).unwrap().per_ue();
        let small = rzf_directions(&ch, 1e-12 * hn).unwrap().unit_directions();
        let large = rzf_directions(&ch, 1e12 * hn).unwrap().unit_directions();
        for k in 0..2 {
            for l in 0..3 {
                assert!(subspace_angle(&small[k][l], &zf[k][l]) < 1e-6);
                assert!(subspace_angle(&large[k][l], ch.path_vector(k, l)) < 1e-6);
            }
        }
    }

    #[test]
    fn default_epsilon_scales_with_paths() {
        let sigma2 = crate::scalar::dbm_to_watts(-93.0);
        let p = crate::scalar::dbm_to_watts(30.0);
        let eps = default_rzf_epsilon(10, sigma2, p);
        assert!((eps - 5.0119e-12).abs() < 1e-15, "{eps}");
    }
}
