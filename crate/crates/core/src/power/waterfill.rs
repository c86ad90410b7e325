use crate::error::{DamError, Result};
use crate::scalar::Real;

/// Power split over parallel channels maximizing `Σ log2(1 + p_i g_i / σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillingResult<T: Real> {
    pub powers: Vec<T>,
    /// Water level `μ`: `p_i = max(0, μ - σ²/g_i)`.
    pub water_level: T,
    pub active: Vec<bool>,
}

impl<T: Real> WaterfillingResult<T> {
    /// Largest violation of the KKT conditions, relative to the budget.
    pub fn kkt_residual(&self, gains: &[T], total_power: T, noise_power: T) -> T {
        let sum = self.powers.iter().fold(T::zero(), |a, b| a + *b);
        let mut worst = (sum - total_power).abs();
        for ((&p, &g), &on) in self.powers.iter().zip(gains).zip(&self.active) {
            let floor = noise_power / g;
            let target = (self.water_level - floor).max(T::zero());
            worst = worst.max((p - target).abs());
            if p < T::zero() {
                worst = worst.max(-p);
            }
            if !on {
                worst = worst.max((self.water_level - floor).max(T::zero()));
            }
        }
        worst / total_power
    }

    /// `Σ log2(1 + p_i g_i / σ²)`.
    pub fn rate(&self, gains: &[T], noise_power: T) -> T {
        self.powers
            .iter()
            .zip(gains)
            .fold(T::zero(), |acc, (&p, &g)| {
                acc + (T::one() + p * g / noise_power).log2()
            })
    }
}

pub fn waterfilling<T: Real>(
    gains: &[T],
    total_power: T,
    noise_power: T,
) -> Result<WaterfillingResult<T>> {
    if gains.is_empty() {
        return Err(DamError::EmptyGains);
    }
    if let Some(g) = gains.iter().find(|g| !(**g > T::zero())) {
        return Err(DamError::NonPositiveGain(g.as_f64()));
    }
    if !(total_power > T::zero()) {
        return Err(DamError::InvalidConfig(
            "water-filling needs a positive budget".into(),
        ));
    }
    if !(noise_power > T::zero()) {
        return Err(DamError::NonPositiveNoise(noise_power.as_f64()));
    }

    let floors: Vec<T> = gains.iter().map(|&g| noise_power / g).collect();
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| floors[a].partial_cmp(&floors[b]).expect("finite floors"));

    // The strongest n channels are active for the largest n whose level
    // clears the n-th floor.
    let mut level = total_power + floors[order[0]];
    let mut prefix = T::zero();
    for (n, &idx) in order.iter().enumerate() {
        prefix += floors[idx];
        let candidate = (total_power + prefix) / T::count(n + 1);
        if candidate > floors[idx] {
            level = candidate;
        } else {
            break;
        }
    }

    let powers: Vec<T> = floors.iter().map(|&b| (level - b).max(T::zero())).collect();
    let active = powers.iter().map(|&p| p > T::zero()).collect();
    Ok(WaterfillingResult {
        powers,
        water_level: level,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_gains_split_evenly() {
        let r = waterfilling(&[2.0f64, 2.0], 3.0, 0.5).unwrap();
        assert!((r.powers[0] - 1.5).abs() < 1e-15);
        assert!((r.powers[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn textbook_example() {
        let r = waterfilling(&[4.0f64, 1.0], 1.0, 1.0).unwrap();
        assert!((r.powers[0] - 0.875).abs() < 1e-15);
        assert!((r.powers[1] - 0.125).abs() < 1e-15);
        assert!((r.water_level - 1.125).abs() < 1e-15);
    }

    #[test]
    fn tiny_budget_goes_to_best_channel() {
        let r = waterfilling(&[1.0f64, 3.0, 2.0], 1e-6, 1.0).unwrap();
        assert_eq!(r.active, vec![false, true, false]);
        assert!((r.powers[1] - 1e-6).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            waterfilling::<f64>(&[], 1.0, 1.0).unwrap_err(),
            DamError::EmptyGains
        );
        assert!(matches!(
            waterfilling(&[1.0, 0.0], 1.0, 1.0),
            Err(DamError::NonPositiveGain(_))
        ));
    }

    #[test]
    fn single_precision() {
        let r = waterfilling(&[4.0f32, 1.0], 1.0, 1.0).unwrap();
        assert!((r.powers[0] - 0.875).abs() < 1e-6);
    }
}
