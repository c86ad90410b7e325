#![allow(dead_code)]

use damsim::{generate_scenario, scalar, ScenarioChannel64, ScenarioConfig64};

pub fn config(antennas: usize, paths: Vec<usize>, pathloss_db: f64, seed: u64) -> ScenarioConfig64 {
    ScenarioConfig64 {
        num_antennas: antennas,
        paths_per_ue: paths,
        transmit_power: 1.0,
        noise_power: scalar::dbm_to_watts(-93.0),
        max_delay: 40,
        aod_range_deg: (-90.0, 90.0),
        pathloss: scalar::db_to_linear(-pathloss_db),
        rng_seed: seed,
    }
}

pub fn channel(
    antennas: usize,
    paths: Vec<usize>,
    pathloss_db: f64,
    seed: u64,
) -> ScenarioChannel64 {
    let c = config(antennas, paths, pathloss_db, seed);
    generate_scenario(&c, &mut c.rng()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
