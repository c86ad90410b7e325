//! SCA objective traces for the RZF schemes on a single channel draw.

use std::io::Write;

use damsim::{build_grouping, design_scheme, generate_scenario, Scheme};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::format::sig9;
use crate::seed::trial_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub scheme: Scheme,
    /// Objective (bps/Hz) after each iteration; entry 0 is the starting point.
    pub objective: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub seed: u64,
    pub traces: Vec<ConvergenceTrace>,
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scheme", "iteration", "objective"])?;
        for t in &self.traces {
            for (i, v) in t.objective.iter().enumerate() {
                w.write_record([t.scheme.name().to_string(), i.to_string(), sig9(*v)])?;
            }
        }
        w.flush().map_err(|e| CliError::Io {
            path: "csv output".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Draws one channel from the master seed and records the SCA trace of
/// every RZF scheme in `schemes` (DAM-RZF and SP-RZF when empty).
pub fn run_convergence_trace(
    config: &ExperimentConfig,
    schemes: &[Scheme],
) -> Result<ConvergenceReport> {
    config.validate()?;
    let schemes: Vec<Scheme> = if schemes.is_empty() {
        vec![Scheme::DamRzf, Scheme::SpRzf]
    } else {
        schemes.to_vec()
    };
    if let Some(s) = schemes
        .iter()
        .find(|s| !matches!(s, Scheme::DamRzf | Scheme::SpRzf))
    {
        return Err(CliError::Config(format!(
            "{s} has no iterative optimizer to trace"
        )));
    }
    let seed = trial_seed(config.seed, 0, 0);
    let cfg = config.scenario(config.transmit_power(), config.paths_per_ue.clone(), seed);
    let channel = generate_scenario(&cfg, &mut cfg.rng())?;
    let grouping = build_grouping(&channel);
    let settings = config.sca_settings();
    let traces = schemes
        .into_iter()
        .map(|scheme| {
            let d = design_scheme(
                &channel,
                &grouping,
                scheme,
                cfg.transmit_power,
                cfg.noise_power,
                &settings,
            )?;
            let sca = d.sca.expect("RZF designs carry an SCA outcome");
            Ok(ConvergenceTrace {
                scheme,
                objective: sca.trace(),
                converged: sca.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { seed, traces })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_single_ue_is_a_fixed_point() {
        let cfg = ExperimentConfig {
            num_antennas: 16,
            paths_per_ue: vec![1],
            ..Default::default()
        };
        let r = run_convergence_trace(&cfg, &[]).unwrap();
        for t in &r.traces {
            assert!((1..=2).contains(&t.objective.len()), "{:?}", t.objective);
            assert!(t.converged);
        }
    }

    #[test]
    fn rejects_non_iterative_schemes() {
        let cfg = ExperimentConfig::default();
        assert!(run_convergence_trace(&cfg, &[Scheme::DamZf]).is_err());
    }
}
