//! Successive convex approximation of the RZF sum-rate problem.
//!
//! Each subproblem maximizes `Σ log2(1 + γ_k)` over non-negative amplitudes
//! `a` and slacks `γ` subject to the total power budget and
//!
//! ```text
//! P_ISI,k(a) + P_IUI,k(a) + σ² <= lb_k(a_k, γ_k)
//! ```
//!
//! where `lb_k` is the first-order under-estimator of `‖a_k^T U_k‖² / γ_k` at
//! the current local point. The program is solved in the scaled variables
//! `a = √P x`, `γ = γ^r y`, which keeps every quantity of order one.

use nalgebra::{DMatrix, DVector};

use super::ipm::{self, ConvexProgram, IpmSettings, KktResidual};
use super::sinr_data::{build_rzf_sinr_data, SinrData};
use super::taylor::sca_taylor_bound;
use crate::beamformers::RzfDirections;
use crate::channel::ScenarioChannel;
use crate::dam::{BeamformerSet, DelayGrouping, Scheme};
use crate::error::{DamError, Result};
use crate::scalar::Real;

/// Expansion point `(a^r, γ^r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPoint<T: Real> {
    pub a: Vec<DVector<T>>,
    pub gamma: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution<T: Real> {
    pub a: Vec<DVector<T>>,
    pub gamma: Vec<T>,
    /// `Σ log2(1 + γ_k)`.
    pub objective: T,
    /// Residuals of the scaled program.
    pub kkt: KktResidual<T>,
    /// Largest constraint violation in original units, relative to the
    /// power budget and to each UE's interference-plus-noise level.
    pub max_violation: T,
    pub iterations: usize,
}

struct Subproblem<T: Real> {
    n: usize,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    /// `P A_k / D_k` over the flattened amplitudes.
    quad: Vec<DMatrix<T>>,
    /// `√P ∇_a lb_k / D_k`, nonzero on UE k's block only.
    lin: Vec<DVector<T>>,
    /// `(σ² - lb_k(0, 0)) / D_k`.
    constant: Vec<T>,
    gamma_r: Vec<T>,
}

impl<T: Real> Subproblem<T> {
    fn num_ues(&self) -> usize {
        self.sizes.len()
    }

    fn sinr_constraint(&self, k: usize, x: &DVector<T>) -> T {
        let xs = x.rows(0, self.n);
        let q = (xs.transpose() * &self.quad[k] * xs)[(0, 0)];
        q + self.constant[k] - self.lin[k].dot(&xs) + x[self.n + k]
    }
}

impl<T: Real> ConvexProgram<T> for Subproblem<T> {
    fn dim(&self) -> usize {
        self.n + self.num_ues()
    }

    // SINR constraints, power, a >= 0, y >= 0.
    fn num_constraints(&self) -> usize {
        2 * self.num_ues() + 1 + self.n
    }

    fn objective(&self, x: &DVector<T>) -> Option<T> {
        let mut v = T::zero();
        for (k, &g) in self.gamma_r.iter().enumerate() {
            let arg = T::one() + g * x[self.n + k];
            if arg <= T::zero() {
                return None;
            }
            v -= arg.ln();
        }
        Some(v)
    }

    fn objective_gradient(&self, x: &DVector<T>) -> DVector<T> {
        let mut g = DVector::zeros(self.dim());
        for (k, &gr) in self.gamma_r.iter().enumerate() {
            g[self.n + k] = -gr / (T::one() + gr * x[self.n + k]);
        }
        g
    }

    fn add_objective_hessian(&self, x: &DVector<T>, h: &mut DMatrix<T>) {
        for (k, &gr) in self.gamma_r.iter().enumerate() {
            let d = gr / (T::one() + gr * x[self.n + k]);
            h[(self.n + k, self.n + k)] += d * d;
        }
    }

    fn constraint(&self, i: usize, x: &DVector<T>) -> T {
        let kk = self.num_ues();
        if i < kk {
            self.sinr_constraint(i, x)
        } else if i == kk {
            x.rows(0, self.n).norm_squared() - T::one()
        } else if i < kk + 1 + self.n {
            -x[i - kk - 1]
        } else {
            -x[self.n + (i - kk - 1 - self.n)]
        }
    }

    fn constraint_gradient(&self, i: usize, x: &DVector<T>) -> DVector<T> {
        let kk = self.num_ues();
        let mut g = DVector::zeros(self.dim());
        if i < kk {
            let xs = x.rows(0, self.n);
            let grad = (&self.quad[i] * xs) * T::lit(2.0) - &self.lin[i];
            g.rows_mut(0, self.n).copy_from(&grad);
            g[self.n + i] = T::one();
        } else if i == kk {
            g.rows_mut(0, self.n)
                .copy_from(&(x.rows(0, self.n) * T::lit(2.0)));
        } else if i < kk + 1 + self.n {
            g[i - kk - 1] = -T::one();
        } else {
            g[self.n + (i - kk - 1 - self.n)] = -T::one();
        }
        g
    }

    fn add_constraint_hessian(&self, i: usize, _x: &DVector<T>, weight: T, h: &mut DMatrix<T>) {
        let kk = self.num_ues();
        let two_w = T::lit(2.0) * weight;
        if i < kk {
            let mut block = h.view_mut((0, 0), (self.n, self.n));
            block += &self.quad[i] * two_w;
        } else if i == kk {
            for j in 0..self.n {
                h[(j, j)] += two_w;
            }
        }
    }
}

fn flatten<T: Real>(a: &[DVector<T>]) -> DVector<T> {
    DVector::from_iterator(
        a.iter().map(|v| v.len()).sum(),
        a.iter().flat_map(|v| v.iter().copied()),
    )
}

/// Solves the convex subproblem around `local`.
///
/// The local point must satisfy the exact constraints: `γ^r_k > 0`,
/// `a^r >= 0`, `Σ‖a^r_k‖² <= P` and `γ^r_k <= SINR_k(a^r)`.
pub fn solve_sca_subproblem<T: Real>(
    data: &SinrData<T>,
    local: &LocalPoint<T>,
    total_power: T,
    noise_power: T,
    settings: &IpmSettings<T>,
) -> Result<SubproblemSolution<T>> {
    if !(noise_power > T::zero()) {
        return Err(DamError::NonPositiveNoise(noise_power.as_f64()));
    }
    if !(total_power > T::zero()) {
        return Err(DamError::InvalidConfig(
            "transmit power must be positive".into(),
        ));
    }
    let kk = data.num_ues();
    let sizes = data.streams_per_ue();
    if local.gamma.len() != kk
        || local.a.len() != kk
        || local.a.iter().zip(&sizes).any(|(a, &n)| a.len() != n)
    {
        return Err(DamError::DimensionMismatch(
            "local point vs SINR data".into(),
        ));
    }
    let n: usize = sizes.iter().sum();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let slack = T::lit(1e-9);
    let a_flat = flatten(&local.a);
    if a_flat.iter().any(|&v| v < -slack * total_power.sqrt()) {
        return Err(DamError::InfeasibleLocalPoint("negative amplitude".into()));
    }
    if a_flat.norm_squared() > total_power * (T::one() + slack) {
        return Err(DamError::InfeasibleLocalPoint(
            "power budget exceeded".into(),
        ));
    }

    let sqrt_p = total_power.sqrt();
    let mut quad = Vec::with_capacity(kk);
    let mut lin = Vec::with_capacity(kk);
    let mut constant = Vec::with_capacity(kk);
    for k in 0..kk {
        let gr = local.gamma[k];
        let bound = sca_taylor_bound(&local.a[k], gr, &data.ues[k].desired)?;
        let d = bound.value;
        if !(d > T::zero()) {
            return Err(DamError::InfeasibleLocalPoint(format!(
                "UE {k} receives no desired power at the local point"
            )));
        }
        let interference = (a_flat.transpose() * data.interference_matrix(k) * &a_flat)[(0, 0)];
        if interference + noise_power > d * (T::one() + slack) {
            return Err(DamError::InfeasibleLocalPoint(format!(
                "slack of UE {k} exceeds its SINR"
            )));
        }
        quad.push(data.interference_matrix(k) * (total_power / d));
        let mut l = DVector::zeros(n);
        l.rows_mut(offsets[k], sizes[k])
            .copy_from(&(&bound.grad_a * (sqrt_p / d)));
        lin.push(l);
        // lb(a, γ) = value + ∇_a·(a - a^r) + ∇_γ (γ - γ^r); ∇_γ γ^r = -value.
        let lb0 = bound.value - bound.grad_a.dot(&bound.point_a) - bound.grad_gamma * gr;
        constant.push((noise_power - lb0) / d);
    }
    let problem = Subproblem {
        n,
        sizes: sizes.clone(),
        offsets,
        quad,
        lin,
        constant,
        gamma_r: local.gamma.clone(),
    };

    let x_r = a_flat.map(|v| v.max(T::zero()) / sqrt_p);
    let uniform = DVector::from_element(n, T::one() / T::count(n).sqrt());
    // Pull the local point towards the uniform allocation and inside the
    // power budget, as far as the SINR constraints allow. Starting well
    // inside keeps the initial multipliers moderate.
    let mut start = None;
    let mut eta = T::lit(0.1);
    while eta > T::lit(1e-12) {
        let xs = (&x_r * (T::one() - eta) + &uniform * eta) * (T::one() - eta);
        let mut z = DVector::zeros(n + kk);
        z.rows_mut(0, n).copy_from(&xs);
        let y_max: Vec<T> = (0..kk).map(|k| -problem.sinr_constraint(k, &z)).collect();
        if y_max.iter().all(|&y| y > T::zero()) {
            for (k, y) in y_max.into_iter().enumerate() {
                z[n + k] = y / T::lit(2.0);
            }
            start = Some(z);
            break;
        }
        eta /= T::lit(10.0);
    }
    let start = start.ok_or_else(|| {
        DamError::InfeasibleLocalPoint("no strictly feasible point near the local point".into())
    })?;

    let sol = ipm::solve(&problem, start, settings)?;
    let mut a = Vec::with_capacity(kk);
    for k in 0..kk {
        let o = problem.offsets[k];
        a.push(DVector::from_fn(sizes[k], |j, _| {
            sol.x[o + j].max(T::zero()) * sqrt_p
        }));
    }
    let gamma: Vec<T> = (0..kk)
        .map(|k| sol.x[n + k].max(T::zero()) * local.gamma[k])
        .collect();
    let max_violation = (0..problem.num_constraints())
        .map(|i| problem.constraint(i, &sol.x))
        .fold(T::zero(), |acc, v| acc.max(v));
    let objective = gamma
        .iter()
        .fold(T::zero(), |acc, &g| acc + (T::one() + g).log2());
    Ok(SubproblemSolution {
        a,
        gamma,
        objective,
        kkt: sol.kkt,
        max_violation,
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaSettings<T: Real> {
    /// Stop once the fractional objective increase falls below this.
    pub threshold: T,
    pub max_iter: usize,
    pub ipm: IpmSettings<T>,
}

impl<T: Real> Default for ScaSettings<T> {
    fn default() -> Self {
        ScaSettings {
            threshold: T::lit(1e-3),
            max_iter: 50,
            ipm: IpmSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaState<T: Real> {
    pub iteration: usize,
    pub amplitudes: Vec<DVector<T>>,
    pub gamma: Vec<T>,
    /// `Σ log2(1 + γ_k)`.
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome<T: Real> {
    /// Initialization first, then one state per solved subproblem.
    pub states: Vec<ScaState<T>>,
    pub converged: bool,
}

impl<T: Real> ScaOutcome<T> {
    pub fn trace(&self) -> Vec<T> {
        self.states.iter().map(|s| s.objective).collect()
    }

    pub fn last(&self) -> &ScaState<T> {
        self.states.last().expect("outcome holds the initial state")
    }

    /// Number of subproblems solved.
    pub fn iterations(&self) -> usize {
        self.states.len() - 1
    }

    pub fn amplitudes(&self) -> Vec<Vec<T>> {
        self.last()
            .amplitudes
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect()
    }
}

/// Runs the SCA loop from uniform amplitudes `√(P/n)` with slacks equal to
/// the exact SINR there.
pub fn rzf_sca<T: Real>(
    data: &SinrData<T>,
    total_power: T,
    noise_power: T,
    settings: &ScaSettings<T>,
) -> Result<ScaOutcome<T>> {
    if !(settings.threshold > T::zero()) {
        return Err(DamError::InvalidConfig(
            "SCA threshold must be positive".into(),
        ));
    }
    let n = data.total_streams();
    if n == 0 {
        return Err(DamError::DimensionMismatch("no streams to allocate".into()));
    }
    let init = (total_power / T::count(n)).sqrt();
    let a: Vec<DVector<T>> = data
        .streams_per_ue()
        .iter()
        .map(|&s| DVector::from_element(s, init))
        .collect();
    let gamma = data.sinr(&a, noise_power)?;
    let objective = gamma
        .iter()
        .fold(T::zero(), |acc, &g| acc + (T::one() + g).log2());
    let mut states = vec![ScaState {
        iteration: 0,
        amplitudes: a,
        gamma,
        objective,
    }];
    let mut converged = false;
    for r in 1..=settings.max_iter {
        let prev = states.last().expect("non-empty");
        let local = LocalPoint {
            a: prev.amplitudes.clone(),
            gamma: prev.gamma.clone(),
        };
        let sol = solve_sca_subproblem(data, &local, total_power, noise_power, &settings.ipm)?;
        let increase = (sol.objective - prev.objective) / prev.objective.abs();
        // The local point is itself feasible for the subproblem, so a
        // solver result below it is numerical noise at convergence.
        let state = if sol.objective >= prev.objective {
            ScaState {
                iteration: r,
                amplitudes: sol.a,
                gamma: sol.gamma,
                objective: sol.objective,
            }
        } else {
            ScaState {
                iteration: r,
                ..prev.clone()
            }
        };
        states.push(state);
        if increase < settings.threshold {
            converged = true;
            break;
        }
    }
    Ok(ScaOutcome { states, converged })
}

/// Builds the SINR data for path-based RZF, runs SCA and scales the unit
/// directions by the optimized amplitudes.
pub fn rzf_sca_beamformers<T: Real>(
    channel: &ScenarioChannel<T>,
    grouping: &DelayGrouping,
    directions: &RzfDirections<T>,
    total_power: T,
    noise_power: T,
    settings: &ScaSettings<T>,
) -> Result<(BeamformerSet<T>, ScaOutcome<T>)> {
    let data = build_rzf_sinr_data(channel, grouping, directions)?;
    let outcome = rzf_sca(&data, total_power, noise_power, settings)?;
    let f = directions.assemble(&outcome.amplitudes(), Scheme::DamRzf)?;
    Ok((f, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::realify;
    use crate::power::UeSinrData;
    use crate::scalar::CVector;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(rng: &mut ChaCha8Rng, sizes: &[usize], leak: f64) -> SinrData<f64> {
        let mut c = |n: usize, s: f64| -> CVector<f64> {
            CVector::from_fn(n, |_, _| {
                Complex::new(
                    s * (rng.random::<f64>() - 0.5),
                    s * (rng.random::<f64>() - 0.5),
                )
            })
        };
        let kk = sizes.len();
        let ues = (0..kk)
            .map(|k| {
                let desired = realify(&[c(sizes[k], 1.0)], sizes[k]);
                let isi = realify(&[c(sizes[k], leak), c(sizes[k], leak)], sizes[k]);
                let iui = (0..kk)
                    .filter(|&kr| kr != k)
                    .map(|kr| (kr, realify(&[c(sizes[kr], leak)], sizes[kr])))
                    .collect();
                UeSinrData { desired, isi, iui }
            })
            .collect();
        SinrData { ues }
    }

    #[test]
    fn single_stream_reaches_full_power() {
        let u = DMatrix::from_row_slice(1, 2, &[0.6, 0.8]);
        let data = SinrData {
            ues: vec![UeSinrData {
                desired: u,
                isi: DMatrix::zeros(1, 0),
                iui: vec![],
            }],
        };
        let out = rzf_sca(&data, 2.0, 0.1, &ScaSettings::default()).unwrap();
        // Already optimal at the uniform start: SINR = P/σ².
        assert!(out.iterations() <= 2);
        let expect = (1.0f64 + 20.0).log2();
        for v in out.trace() {
            assert!((v - expect).abs() < 1e-6, "{v} vs {expect}");
        }
    }

    #[test]
    fn trace_is_monotone_and_beats_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let data = random_data(&mut rng, &[3, 2, 2], 0.3);
            let out = rzf_sca(&data, 1.0, 1e-2, &ScaSettings::default()).unwrap();
            let trace = out.trace();
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "{trace:?}");
            }
            let a: Vec<DVector<f64>> = out.last().amplitudes.clone();
            let true_rate = data.sum_rate(&a, 1e-2).unwrap();
            assert!(true_rate >= trace[trace.len() - 1] - 1e-9);
            assert!(true_rate >= trace[0] - 1e-9);
            let power: f64 = a.iter().map(|v| v.norm_squared()).sum();
            assert!(power <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn subproblem_satisfies_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = random_data(&mut rng, &[2, 2], 0.2);
        let a: Vec<DVector<f64>> = vec![DVector::from_element(2, 0.5); 2];
        let gamma = data.sinr(&a, 1e-2).unwrap();
        let local = LocalPoint { a, gamma };
        let sol = solve_sca_subproblem(&data, &local, 1.0, 1e-2, &IpmSettings::default()).unwrap();
        assert!(sol.kkt.max() < 1e-6, "{:?}", sol.kkt);
        assert!(sol.max_violation <= 1e-8);
    }

    #[test]
    fn infeasible_local_point_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_data(&mut rng, &[2, 2], 0.2);
        let a: Vec<DVector<f64>> = vec![DVector::from_element(2, 0.5); 2];
        let gamma: Vec<f64> = data
            .sinr(&a, 1e-2)
            .unwrap()
            .iter()
            .map(|g| 2.0 * g)
            .collect();
        let local = LocalPoint { a, gamma };
        assert!(matches!(
            solve_sca_subproblem(&data, &local, 1.0, 1e-2, &IpmSettings::default()),
            Err(DamError::InfeasibleLocalPoint(_))
        ));
    }
}
