use crate::channel::ScenarioChannel;
use crate::scalar::Real;

/// Per-path transmit delays `κ_kl = n_{k,max} - n_kl`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelaySchedule {
    pub kappa: Vec<Vec<usize>>,
}

impl DelaySchedule {
    pub fn get(&self, k: usize, l: usize) -> usize {
        self.kappa[k][l]
    }

    /// All-zero schedule with the given number of streams per UE.
    pub fn zeros(streams_per_ue: &[usize]) -> Self {
        DelaySchedule {
            kappa: streams_per_ue.iter().map(|&n| vec![0; n]).collect(),
        }
    }
}

pub fn compensate_delays<T: Real>(channel: &ScenarioChannel<T>) -> DelaySchedule {
    DelaySchedule {
        kappa: channel
            .ues
            .iter()
            .map(|ue| ue.paths.iter().map(|p| ue.n_max - p.delay).collect())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CVector;

    fn channel_with_delays(delays: &[usize]) -> ScenarioChannel<f64> {
        let taps = delays
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                (
                    CVector::from_element(2, nalgebra::Complex::new(1.0 + i as f64, 0.0)),
                    d,
                )
            })
            .collect();
        ScenarioChannel::from_taps(vec![taps]).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(
            compensate_delays(&channel_with_delays(&[3, 7, 5])).kappa,
            vec![vec![4, 0, 2]]
        );
        assert_eq!(
            compensate_delays(&channel_with_delays(&[9])).kappa,
            vec![vec![0]]
        );
        assert_eq!(
            compensate_delays(&channel_with_delays(&[0, 40])).kappa,
            vec![vec![40, 0]]
        );
    }

    #[test]
    fn exactly_one_zero_per_ue() {
        let s = compensate_delays(&channel_with_delays(&[12, 1, 30, 4]));
        assert_eq!(s.kappa[0].iter().filter(|&&x| x == 0).count(), 1);
    }
}
