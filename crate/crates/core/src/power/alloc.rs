use crate::beamformers::ZfDirections;
use crate::channel::ScenarioChannel;
use crate::error::{DamError, Result};
use crate::power::waterfill::{waterfilling, WaterfillingResult};
use crate::scalar::Real;

/// Optimal ZF power coefficients and the per-UE budgets behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfAllocation<T: Real> {
    /// `v_kl` with `f_kl = √v_kl w_kl`.
    pub v: Vec<Vec<T>>,
    /// Water-filled `P_k`.
    pub ue_powers: Vec<T>,
    /// `‖q_k‖² = Σ_l 1/‖w_kl‖²`, the effective gain of UE `k`.
    pub ue_gains: Vec<T>,
}

impl<T: Real> ZfAllocation<T> {
    /// `γ_k = (Σ_l √v_kl)² / σ²`.
    pub fn sinr(&self, noise_power: T) -> Vec<T> {
        self.v
            .iter()
            .map(|vk| {
                let s = vk.iter().fold(T::zero(), |a, &x| a + x.sqrt());
                s * s / noise_power
            })
            .collect()
    }
}

/// Per UE, the best split of a budget `P_k` across paths is
/// `t_k ∝ q_k` with `q_kl = 1/‖w_kl‖`; the budgets `P_k` are then
/// water-filled over the gains `‖q_k‖²`.
pub fn zf_power_alloc<T: Real>(
    directions: &ZfDirections<T>,
    total_power: T,
    noise_power: T,
) -> Result<ZfAllocation<T>> {
    let norms = directions.column_norms_sqr();
    if norms.iter().flatten().any(|n| !(*n > T::zero())) {
        return Err(DamError::ZeroNorm("ZF direction"));
    }
    // q_kl² = 1/‖w_kl‖²
    let q_sqr: Vec<Vec<T>> = norms
        .iter()
        .map(|nk| nk.iter().map(|&n| T::one() / n).collect())
        .collect();
    let gains: Vec<T> = q_sqr
        .iter()
        .map(|qk| qk.iter().fold(T::zero(), |a, &b| a + b))
        .collect();
    let wf = waterfilling(&gains, total_power, noise_power)?;
    // t_kl = √P_k q_kl / ‖q_k‖, v_kl = t_kl² / ‖w_kl‖² = P_k q_kl⁴ / ‖q_k‖²
    let v = q_sqr
        .iter()
        .zip(&gains)
        .zip(&wf.powers)
        .map(|((qk, &g), &pk)| qk.iter().map(|&q2| pk * q2 * q2 / g).collect())
        .collect();
    Ok(ZfAllocation {
        v,
        ue_powers: wf.powers,
        ue_gains: gains,
    })
}

/// Water-filling over `‖h̄_k‖²`, the asymptotic MRT gains.
pub fn asymptotic_mrt_alloc<T: Real>(
    channel: &ScenarioChannel<T>,
    total_power: T,
    noise_power: T,
) -> Result<WaterfillingResult<T>> {
    let gains: Vec<T> = channel.ues.iter().map(|u| u.energy()).collect();
    waterfilling(&gains, total_power, noise_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformers::zf_directions;
    use crate::scalar::{norm_sqr, CVector};
    use nalgebra::Complex;

    fn unit(m: usize, j: usize, s: f64) -> CVector<f64> {
        CVector::from_fn(m, |i, _| Complex::new(if i == j { s } else { 0.0 }, 0.0))
    }

    #[test]
    fn single_path_gets_everything() {
        let h = CVector::from_fn(8, |i, _| Complex::new(1.0, 0.1 * i as f64));
        let ch = ScenarioChannel::from_taps(vec![vec![(h, 0)]]).unwrap();
        let zf = zf_directions(&ch).unwrap();
        let a = zf_power_alloc(&zf, 2.0, 0.1).unwrap();
        let w2 = norm_sqr(&zf.per_ue()[0][0]);
        assert!((a.v[0][0] - 2.0 / w2).abs() < 1e-12 * a.v[0][0]);
    }

    #[test]
    fn symmetric_ues_split_evenly() {
        let ch = ScenarioChannel::from_taps(vec![
            vec![(unit(4, 0, 1.0), 0), (unit(4, 1, 2.0), 3)],
            vec![(unit(4, 2, 2.0), 1), (unit(4, 3, 1.0), 2)],
        ])
        .unwrap();
        let a = zf_power_alloc(&zf_directions(&ch).unwrap(), 1.0, 0.01).unwrap();
        assert!((a.ue_powers[0] - 0.5).abs() < 1e-14);
        assert!((a.ue_powers[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn equal_energy_equal_split() {
        let ch = ScenarioChannel::from_taps(vec![
            vec![(unit(3, 0, 1.0), 0)],
            vec![(unit(3, 1, 1.0), 0)],
        ])
        .unwrap();
        let wf = asymptotic_mrt_alloc(&ch, 1.0, 1.0).unwrap();
        assert_eq!(wf.powers, vec![0.5, 0.5]);
        let one = ScenarioChannel::from_taps(vec![vec![(unit(3, 0, 1.0), 0)]]).unwrap();
        assert_eq!(
            asymptotic_mrt_alloc(&one, 3.0, 1.0).unwrap().powers,
            vec![3.0]
        );
    }
}
