//! Experiment configuration, read from JSON. Powers are given in dBm;
//! the noise power may alternatively be given in watts.

use std::path::Path;

use damsim::scalar::{db_to_linear, dbm_to_watts};
use damsim::{ScenarioConfig64, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub num_antennas: usize,
    pub paths_per_ue: Vec<usize>,
    pub transmit_power_dbm: f64,
    pub noise_power_dbm: f64,
    /// Overrides `noise_power_dbm` when set.
    pub noise_power_w: Option<f64>,
    pub max_delay: usize,
    pub aod_range_deg: [f64; 2],
    /// Large-scale loss applied to every path gain.
    pub pathloss_db: f64,
    pub seed: u64,
    pub trials: usize,
    pub schemes: Vec<String>,
    pub power_grid_dbm: Vec<f64>,
    pub paths_grid: Vec<usize>,
    pub sca_threshold: f64,
    pub sca_max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_antennas: 128,
            paths_per_ue: vec![5, 5],
            transmit_power_dbm: 30.0,
            noise_power_dbm: -93.0,
            noise_power_w: None,
            max_delay: 40,
            aod_range_deg: [-90.0, 90.0],
            pathloss_db: 120.0,
            seed: 2024,
            trials: 200,
            schemes: Scheme::SWEEP.iter().map(|s| s.name().to_string()).collect(),
            power_grid_dbm: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            paths_grid: (1..=10).collect(),
            sca_threshold: 1e-3,
            sca_max_iter: 50,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power_w
            .unwrap_or_else(|| dbm_to_watts(self.noise_power_dbm))
    }

    pub fn transmit_power(&self) -> f64 {
        dbm_to_watts(self.transmit_power_dbm)
    }

    pub fn parsed_schemes(&self) -> Result<Vec<Scheme>> {
        self.schemes
            .iter()
            .map(|s| s.parse::<Scheme>().map_err(CliError::from))
            .collect()
    }

    /// Rejects anything the simulation cannot run with.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(w) = self.noise_power_w {
            if !(w > 0.0) {
                return bad(format!("noise_power_w must be positive, got {w}"));
            }
        }
        if !self.noise_power_dbm.is_finite() {
            return bad("noise_power_dbm must be finite".into());
        }
        if !self.transmit_power_dbm.is_finite() {
            return bad("transmit_power_dbm must be finite".into());
        }
        if !self.pathloss_db.is_finite() {
            return bad("pathloss_db must be finite".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.sca_threshold > 0.0) {
            return bad("sca_threshold must be positive".into());
        }
        if self.power_grid_dbm.iter().any(|p| !p.is_finite()) {
            return bad("power_grid_dbm entries must be finite".into());
        }
        if self.paths_grid.contains(&0) {
            return bad("paths_grid entries must be at least 1".into());
        }
        self.parsed_schemes()?;
        self.scenario(self.transmit_power(), self.paths_per_ue.clone(), 0)
            .validate()?;
        Ok(())
    }

    pub fn scenario(
        &self,
        transmit_power: f64,
        paths_per_ue: Vec<usize>,
        seed: u64,
    ) -> ScenarioConfig64 {
        ScenarioConfig64 {
            num_antennas: self.num_antennas,
            paths_per_ue,
            transmit_power,
            noise_power: self.noise_power(),
            max_delay: self.max_delay,
            aod_range_deg: (self.aod_range_deg[0], self.aod_range_deg[1]),
            pathloss: db_to_linear(-self.pathloss_db),
            rng_seed: seed,
        }
    }

    pub fn sca_settings(&self) -> damsim::ScaSettings64 {
        damsim::ScaSettings64 {
            threshold: self.sca_threshold,
            max_iter: self.sca_max_iter,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_simulation_setup() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert!((c.transmit_power() - 1.0).abs() < 1e-12);
        assert!((c.noise_power() - 5.011872336272715e-13).abs() < 1e-24);
        assert_eq!(c.parsed_schemes().unwrap(), Scheme::SWEEP.to_vec());
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"num_antennas": 64}"#).unwrap();
        assert_eq!(c.num_antennas, 64);
        assert_eq!(c.paths_per_ue, vec![5, 5]);
    }

    #[test]
    fn rejects_non_positive_noise() {
        let c = ExperimentConfig {
            noise_power_w: Some(0.0),
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let c = ExperimentConfig {
            noise_power_w: Some(-1e-3),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_schemes() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"antennas": 4}"#).is_err());
        let c = ExperimentConfig {
            schemes: vec!["DAM-FOO".into()],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
