//! Sample-level reference simulation.
//!
//! Symbols are pushed through the transmit delays, the per-path
//! beamformers and the multipath convolution one sample at a time. The
//! received sequence of each UE is then regressed by least squares onto the
//! known symbol streams at every delay the convolution can produce, and the
//! fitted coefficients give the empirical desired, ISI and IUI powers.
//! Nothing here touches the delay-difference grouping.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::ScenarioChannel;
use crate::dam::delay::DelaySchedule;
use crate::dam::sinr::{BeamformerSet, RateReport, UeReport};
use crate::error::{DamError, Result};
use crate::scalar::{CVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolAlphabet {
    /// Unit-power circularly-symmetric complex Gaussian.
    #[default]
    Gaussian,
    /// Unit-power QPSK.
    Qpsk,
}

/// One transmitted stream: `vector · s_ue[n - delay]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream<T: Real> {
    pub ue: usize,
    pub vector: CVector<T>,
    pub delay: usize,
}

/// Everything the transmitter sends plus the delay each UE locks to.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission<T: Real> {
    pub streams: Vec<Stream<T>>,
    pub lock_delays: Vec<usize>,
}

impl<T: Real> Transmission<T> {
    /// DAM: every path beamformer carries its UE's stream delayed by `κ_kl`,
    /// and UE `k` locks to `n_{k,max}`.
    pub fn dam(
        f: &BeamformerSet<T>,
        schedule: &DelaySchedule,
        channel: &ScenarioChannel<T>,
    ) -> Result<Self> {
        if f.vectors.len() != schedule.kappa.len()
            || f.vectors
                .iter()
                .zip(&schedule.kappa)
                .any(|(a, b)| a.len() != b.len())
        {
            return Err(DamError::DimensionMismatch(
                "beamformer set and delay schedule disagree".into(),
            ));
        }
        let streams = f
            .vectors
            .iter()
            .enumerate()
            .flat_map(|(k, fs)| {
                fs.iter().enumerate().map(move |(l, v)| Stream {
                    ue: k,
                    vector: v.clone(),
                    delay: schedule.get(k, l),
                })
            })
            .collect();
        Ok(Transmission {
            streams,
            lock_delays: channel.ues.iter().map(|u| u.n_max).collect(),
        })
    }
}

fn draw_symbol<R: Rng + ?Sized>(alphabet: SymbolAlphabet, rng: &mut R) -> Complex<f64> {
    match alphabet {
        SymbolAlphabet::Gaussian => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
        SymbolAlphabet::Qpsk => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let re = if rng.random::<bool>() { s } else { -s };
            let im = if rng.random::<bool>() { s } else { -s };
            Complex::new(re, im)
        }
    }
}

/// Runs `num_symbols` received samples per UE and measures the power of
/// every symbol component. With `noise_power = 0` the run is noiseless and
/// the residual is pure numerical error.
pub fn simulate_time_domain<T: Real, R: Rng + ?Sized>(
    tx: &Transmission<T>,
    channel: &ScenarioChannel<T>,
    noise_power: T,
    num_symbols: usize,
    alphabet: SymbolAlphabet,
    rng: &mut R,
) -> Result<RateReport<T>> {
    let k_count = channel.num_ues();
    let m = channel.num_antennas;
    if tx.lock_delays.len() != k_count
        || tx
            .streams
            .iter()
            .any(|s| s.ue >= k_count || s.vector.len() != m)
    {
        return Err(DamError::DimensionMismatch(
            "transmission does not fit the channel".into(),
        ));
    }
    if num_symbols == 0 {
        return Err(DamError::InvalidConfig(
            "num_symbols must be positive".into(),
        ));
    }
    let n = num_symbols;
    let tx_span = tx.streams.iter().map(|s| s.delay).max().unwrap_or(0);
    let ch_span = channel.ues.iter().map(|u| u.n_max).max().unwrap_or(0);
    // Guard region so every observed sample sees steady-state symbols.
    let lead = tx_span + ch_span;

    // symbols[k][t] holds s_k[t - lead]
    let symbols: Vec<Vec<Complex<f64>>> = (0..k_count)
        .map(|_| (0..n + lead).map(|_| draw_symbol(alphabet, rng)).collect())
        .collect();

    let to64 = |z: &Complex<T>| Complex::new(z.re.as_f64(), z.im.as_f64());
    let streams: Vec<(usize, Vec<Complex<f64>>, usize)> = tx
        .streams
        .iter()
        .map(|s| (s.ue, s.vector.iter().map(to64).collect(), s.delay))
        .collect();

    // x[t] = Σ_s f_s s_{k(s)}[t - κ_s] for t in [-ch_span, n)
    let x_len = n + ch_span;
    let mut x = vec![Complex::new(0.0, 0.0); x_len * m];
    for t in 0..x_len {
        let row = &mut x[t * m..(t + 1) * m];
        for (ue, f, delay) in &streams {
            // time index t - ch_span - delay, shifted by lead
            let sym = symbols[*ue][t + tx_span - delay];
            for (xi, fi) in row.iter_mut().zip(f) {
                *xi += fi * sym;
            }
        }
    }

    let sigma = noise_power.as_f64();
    let mut ues = Vec::with_capacity(k_count);
    for (k, ue) in channel.ues.iter().enumerate() {
        let taps: Vec<(Vec<Complex<f64>>, usize)> = ue
            .vectors
            .iter()
            .zip(&ue.paths)
            .map(|(h, p)| (h.iter().map(|z| to64(z).conj()).collect(), p.delay))
            .collect();
        let mut y = vec![Complex::new(0.0, 0.0); n];
        for (t, yt) in y.iter_mut().enumerate() {
            for (hc, d) in &taps {
                let row = &x[(t + ch_span - d) * m..(t + ch_span - d + 1) * m];
                *yt += hc
                    .iter()
                    .zip(row)
                    .fold(Complex::new(0.0, 0.0), |a, (p, q)| a + p * q);
            }
            if sigma > 0.0 {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *yt += Complex::new(re, im) * (sigma / 2.0).sqrt();
            }
        }

        // Every (UE, delay) pair the convolution can produce at this receiver.
        let mut regressors: Vec<(usize, usize)> = Vec::new();
        for (ue_s, _, delay) in &streams {
            for (_, d) in &taps {
                regressors.push((*ue_s, d + delay));
            }
        }
        regressors.push((k, tx.lock_delays[k]));
        regressors.sort_unstable();
        regressors.dedup();

        let r = regressors.len();
        let column = |j: usize, t: usize| {
            let (u, d) = regressors[j];
            symbols[u][t + lead - d]
        };
        let mut gram = DMatrix::<Complex<f64>>::zeros(r, r);
        let mut rhs = DVector::<Complex<f64>>::zeros(r);
        let mut row = vec![Complex::new(0.0, 0.0); r];
        for (t, yt) in y.iter().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = column(j, t);
            }
            for a in 0..r {
                let ca = row[a].conj();
                rhs[a] += ca * yt;
                for b in a..r {
                    gram[(a, b)] += ca * row[b];
                }
            }
        }
        for a in 0..r {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)].conj();
            }
        }
        let coef = gram
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .or_else(|| gram.clone().lu().solve(&rhs))
            .ok_or_else(|| DamError::InvalidConfig("symbol regression is singular".into()))?;

        let nf = n as f64;
        let mut desired = 0.0;
        let mut isi = 0.0;
        let mut iui = 0.0;
        for (j, &(u, d)) in regressors.iter().enumerate() {
            let power = coef[j].norm_sqr() * gram[(j, j)].re / nf;
            if u != k {
                iui += power;
            } else if d == tx.lock_delays[k] {
                desired += power;
            } else {
                isi += power;
            }
        }
        let mut residual = 0.0;
        for (t, yt) in y.iter().enumerate() {
            let fit = (0..r).fold(Complex::new(0.0, 0.0), |a, j| a + coef[j] * column(j, t));
            residual += (yt - fit).norm_sqr();
        }
        let noise = if sigma > 0.0 { residual / nf } else { 0.0 };
        ues.push(UeReport::from_powers(
            T::lit(desired),
            T::lit(isi),
            T::lit(iui),
            T::lit(noise),
        ));
    }
    Ok(RateReport { ues })
}
