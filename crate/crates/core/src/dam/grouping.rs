//! Interference terms regrouped by delay difference.
//!
//! For a UE pair `(k, k')` and offset `i`, the effective channel
//! `g_{kk'l'}[i]` equals `h_kl` when some path `l` of UE `k` satisfies
//! `n_kl - n_{k'l'} = i`, and zero otherwise. Delays of one UE are distinct,
//! so at most one such `l` exists. Only bins with at least one nonzero entry
//! are stored; dense stacked vectors and the matrices `G_{kk'}` are built on
//! request.

use std::collections::BTreeMap;

use nalgebra::Complex;

use crate::channel::ScenarioChannel;
use crate::scalar::{CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct PairGrouping {
    /// Receiving UE `k`.
    pub k: usize,
    /// Transmitting UE `k'` whose streams are grouped.
    pub k_ref: usize,
    pub delta_min: isize,
    pub delta_max: isize,
    /// `bins[i][l'] = Some(l)` when `n_kl - n_{k'l'} = i`.
    bins: BTreeMap<isize, Vec<Option<usize>>>,
}

impl PairGrouping {
    pub fn is_self_pair(&self) -> bool {
        self.k == self.k_ref
    }

    /// `Δ_span = Δ_max - Δ_min`.
    pub fn delta_span(&self) -> usize {
        (self.delta_max - self.delta_min) as usize
    }

    /// Offsets that index columns of `G_{kk'}`: every offset in
    /// `[Δ_min, Δ_max]`, minus `i = 0` for the self pair.
    pub fn column_offsets(&self) -> Vec<isize> {
        (self.delta_min..=self.delta_max)
            .filter(|&i| !(self.is_self_pair() && i == 0))
            .collect()
    }

    /// Nonzero bins in increasing offset order.
    pub fn nonzero_bins(&self) -> impl Iterator<Item = (isize, &[Option<usize>])> {
        self.bins.iter().map(|(i, v)| (*i, v.as_slice()))
    }

    /// Path of UE `k` feeding bin `i` for reference path `l'`, if any.
    pub fn source_path(&self, i: isize, l_ref: usize) -> Option<usize> {
        self.bins.get(&i).and_then(|v| v[l_ref])
    }

    pub fn g<'a, T: Real>(
        &self,
        channel: &'a ScenarioChannel<T>,
        i: isize,
        l_ref: usize,
    ) -> Option<&'a CVector<T>> {
        self.source_path(i, l_ref)
            .map(|l| channel.path_vector(self.k, l))
    }

    /// `ḡ_{kk'}[i]`, length `M_t L_{k'}`.
    pub fn g_stacked<T: Real>(&self, channel: &ScenarioChannel<T>, i: isize) -> CVector<T> {
        let m = channel.num_antennas;
        let l_ref = channel.ues[self.k_ref].num_paths();
        let mut out = CVector::<T>::from_element(m * l_ref, Complex::new(T::zero(), T::zero()));
        for lr in 0..l_ref {
            if let Some(v) = self.g(channel, i, lr) {
                out.rows_mut(lr * m, m).copy_from(v);
            }
        }
        out
    }

    /// Dense `G_{kk'}` with one column per entry of [`Self::column_offsets`].
    pub fn g_matrix<T: Real>(&self, channel: &ScenarioChannel<T>) -> CMatrix<T> {
        let offsets = self.column_offsets();
        let rows = channel.num_antennas * channel.ues[self.k_ref].num_paths();
        let mut g = CMatrix::<T>::zeros(rows, offsets.len());
        for (c, &i) in offsets.iter().enumerate() {
            g.set_column(c, &self.g_stacked(channel, i));
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayGrouping {
    num_ues: usize,
    pairs: Vec<PairGrouping>,
}

impl DelayGrouping {
    pub fn num_ues(&self) -> usize {
        self.num_ues
    }

    pub fn pair(&self, k: usize, k_ref: usize) -> &PairGrouping {
        &self.pairs[k * self.num_ues + k_ref]
    }

    pub fn pairs(&self) -> &[PairGrouping] {
        &self.pairs
    }
}

pub fn build_grouping<T: Real>(channel: &ScenarioChannel<T>) -> DelayGrouping {
    let num_ues = channel.num_ues();
    let mut pairs = Vec::with_capacity(num_ues * num_ues);
    for (k, ue) in channel.ues.iter().enumerate() {
        for (k_ref, ue_ref) in channel.ues.iter().enumerate() {
            let mut bins: BTreeMap<isize, Vec<Option<usize>>> = BTreeMap::new();
            for (l_ref, p_ref) in ue_ref.paths.iter().enumerate() {
                for (l, p) in ue.paths.iter().enumerate() {
                    let i = p.delay as isize - p_ref.delay as isize;
                    let slot = bins
                        .entry(i)
                        .or_insert_with(|| vec![None; ue_ref.num_paths()]);
                    debug_assert!(slot[l_ref].is_none(), "delays of a UE must be distinct");
                    slot[l_ref] = Some(l);
                }
            }
            pairs.push(PairGrouping {
                k,
                k_ref,
                delta_min: ue.n_min as isize - ue_ref.n_max as isize,
                delta_max: ue.n_max as isize - ue_ref.n_min as isize,
                bins,
            });
        }
    }
    DelayGrouping { num_ues, pairs }
}
