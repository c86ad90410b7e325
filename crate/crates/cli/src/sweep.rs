//! Monte-Carlo sweeps over transmit power, path count or array size.

use std::fmt;
use std::io::Write;

use damsim::scalar::dbm_to_watts;
use damsim::{build_grouping, design_scheme, generate_scenario, Scheme};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::format::sig9;
use crate::seed::trial_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    TransmitPowerDbm,
    /// Every UE gets the same number of paths.
    PathsPerUe,
    Antennas,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::TransmitPowerDbm => "transmit_power_dbm",
            SweepVar::PathsPerUe => "paths_per_ue",
            SweepVar::Antennas => "antennas",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub base: ExperimentConfig,
}

impl SweepSpec {
    pub fn power(base: &ExperimentConfig) -> Result<Self> {
        Ok(SweepSpec {
            var: SweepVar::TransmitPowerDbm,
            grid: base.power_grid_dbm.clone(),
            schemes: base.parsed_schemes()?,
            trials: base.trials,
            base: base.clone(),
        })
    }

    pub fn paths(base: &ExperimentConfig) -> Result<Self> {
        Ok(SweepSpec {
            var: SweepVar::PathsPerUe,
            grid: base.paths_grid.iter().map(|&l| l as f64).collect(),
            schemes: base.parsed_schemes()?,
            trials: base.trials,
            base: base.clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(CliError::Config("sweep grid is empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(CliError::Config("no schemes selected".into()));
        }
        for &v in &self.grid {
            if !v.is_finite() {
                return Err(CliError::Config(format!("non-finite grid value {v}")));
            }
            if self.var != SweepVar::TransmitPowerDbm && (v < 1.0 || v.fract() != 0.0) {
                return Err(CliError::Config(format!(
                    "{} grid needs positive integers, got {v}",
                    self.var
                )));
            }
        }
        self.base.validate()
    }

    fn scenario(&self, value: f64, seed: u64) -> damsim::ScenarioConfig64 {
        let b = &self.base;
        match self.var {
            SweepVar::TransmitPowerDbm => {
                b.scenario(dbm_to_watts(value), b.paths_per_ue.clone(), seed)
            }
            SweepVar::PathsPerUe => b.scenario(
                b.transmit_power(),
                vec![value as usize; b.paths_per_ue.len()],
                seed,
            ),
            SweepVar::Antennas => {
                let mut s = b.scenario(b.transmit_power(), b.paths_per_ue.clone(), seed);
                s.num_antennas = value as usize;
                s
            }
        }
    }
}

/// One trial: the channel seed and, per scheme, the sum rate or the error.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub grid_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub outcomes: Vec<std::result::Result<f64, String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub scheme: Scheme,
    /// NaN when every trial failed.
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub var: SweepVar,
    pub points: Vec<SweepPoint>,
    pub records: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn point(&self, value: f64, scheme: Scheme) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.value == value && p.scheme == scheme)
    }

    pub fn total_failures(&self) -> usize {
        self.points.iter().map(|p| p.failures).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "sweep_var",
            "value",
            "scheme",
            "mean_sum_rate_bps_hz",
            "stderr",
            "trials",
            "failures",
        ])?;
        for p in &self.points {
            w.write_record([
                self.var.name().to_string(),
                sig9(p.value),
                p.scheme.name().to_string(),
                sig9(p.mean),
                sig9(p.stderr),
                p.trials.to_string(),
                p.failures.to_string(),
            ])?;
        }
        w.flush().map_err(|e| CliError::Io {
            path: "csv output".into(),
            source: e,
        })?;
        Ok(())
    }

    /// Per-trial rows, enough to recompute every mean from its seed.
    pub fn write_trials_csv<W: Write>(&self, schemes: &[Scheme], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "sweep_var",
            "value",
            "trial",
            "seed",
            "scheme",
            "sum_rate_bps_hz",
            "error",
        ])?;
        for r in &self.records {
            let value = self.points[r.grid_index * schemes.len()].value;
            for (scheme, o) in schemes.iter().zip(&r.outcomes) {
                let (rate, err) = match o {
                    Ok(x) => (sig9(*x), String::new()),
                    Err(e) => (String::new(), e.clone()),
                };
                w.write_record([
                    self.var.name().to_string(),
                    sig9(value),
                    r.trial.to_string(),
                    r.seed.to_string(),
                    scheme.name().to_string(),
                    rate,
                    err,
                ])?;
            }
        }
        w.flush().map_err(|e| CliError::Io {
            path: "csv output".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Runs a single trial: draws the channel from `seed` and evaluates every
/// scheme on it.
pub fn run_trial(spec: &SweepSpec, value: f64, seed: u64) -> Vec<std::result::Result<f64, String>> {
    let cfg = spec.scenario(value, seed);
    let channel = match generate_scenario(&cfg, &mut cfg.rng()) {
        Ok(c) => c,
        Err(e) => return vec![Err(e.to_string()); spec.schemes.len()],
    };
    let grouping = build_grouping(&channel);
    let settings = spec.base.sca_settings();
    spec.schemes
        .iter()
        .map(|&scheme| {
            design_scheme(
                &channel,
                &grouping,
                scheme,
                cfg.transmit_power,
                cfg.noise_power,
                &settings,
            )
            .map_err(|e| e.to_string())
            .and_then(|d| {
                let r = d.sum_rate();
                if r.is_finite() {
                    Ok(r)
                } else {
                    Err(format!("non-finite sum rate {r}"))
                }
            })
        })
        .collect()
}

/// Trials run on a pool of `workers` threads; results are gathered in
/// (grid, trial) order before aggregation so the output does not depend on
/// scheduling.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|g| (0..spec.trials).map(move |t| (g, t)))
        .collect();
    let master = spec.base.seed;
    let records: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, t)| {
                let seed = trial_seed(master, g, t);
                TrialRecord {
                    grid_index: g,
                    trial: t,
                    seed,
                    outcomes: run_trial(spec, spec.grid[g], seed),
                }
            })
            .collect()
    });

    let mut points = Vec::with_capacity(spec.grid.len() * spec.schemes.len());
    for (g, &value) in spec.grid.iter().enumerate() {
        let rows = &records[g * spec.trials..(g + 1) * spec.trials];
        for (s, &scheme) in spec.schemes.iter().enumerate() {
            let rates: Vec<f64> = rows
                .iter()
                .filter_map(|r| r.outcomes[s].as_ref().ok().copied())
                .collect();
            let failures = rows.len() - rates.len();
            if failures > 0 {
                let first = rows
                    .iter()
                    .find_map(|r| r.outcomes[s].as_ref().err().map(|e| (r.seed, e)));
                if let Some((seed, err)) = first {
                    eprintln!(
                        "warning: {scheme} at {}={}: {failures} of {} trials failed (first: seed {seed}: {err})",
                        spec.var,
                        sig9(value),
                        rows.len()
                    );
                }
            }
            let (mean, stderr) = mean_stderr(&rates);
            points.push(SweepPoint {
                value,
                scheme,
                mean,
                stderr,
                trials: rates.len(),
                failures,
            });
        }
    }
    Ok(SweepResult {
        var: spec.var,
        points,
        records,
    })
}

/// Arithmetic mean and standard error of the mean (sample standard
/// deviation over `√n`; zero for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            num_antennas: 16,
            paths_per_ue: vec![2, 2],
            max_delay: 8,
            trials: 3,
            ..Default::default()
        }
    }

    #[test]
    fn mean_stderr_basics() {
        assert_eq!(mean_stderr(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_stderr(&[]).0.is_nan());
    }

    #[test]
    fn single_trial_mean_is_the_trial() {
        let spec = SweepSpec {
            var: SweepVar::TransmitPowerDbm,
            grid: vec![20.0],
            schemes: vec![Scheme::DamZf],
            trials: 1,
            base: small(),
        };
        let res = run_sweep(&spec, 1).unwrap();
        let seed = trial_seed(spec.base.seed, 0, 0);
        let direct = run_trial(&spec, 20.0, seed)[0].clone().unwrap();
        assert_eq!(res.points[0].mean, direct);
        assert_eq!(res.points[0].stderr, 0.0);
        assert_eq!(res.points[0].trials, 1);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = SweepSpec::power(&ExperimentConfig {
            power_grid_dbm: vec![0.0, 20.0],
            ..small()
        })
        .unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_sweep(&spec, 1).unwrap().write_csv(&mut a).unwrap();
        run_sweep(&spec, 3).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_zf_is_counted_not_hidden() {
        let spec = SweepSpec {
            var: SweepVar::Antennas,
            grid: vec![2.0],
            schemes: vec![Scheme::DamZf, Scheme::DamMrt],
            trials: 2,
            base: small(),
        };
        let res = run_sweep(&spec, 1).unwrap();
        assert_eq!(res.points[0].failures, 2);
        assert_eq!(res.points[0].trials, 0);
        assert!(res.points[0].mean.is_nan());
        assert_eq!(res.points[1].failures, 0);
    }

    #[test]
    fn rejects_empty_grid_and_zero_trials() {
        let mut spec = SweepSpec::power(&small()).unwrap();
        spec.grid.clear();
        assert!(run_sweep(&spec, 1).is_err());
        let mut spec = SweepSpec::power(&small()).unwrap();
        spec.trials = 0;
        assert!(run_sweep(&spec, 1).is_err());
    }
}
