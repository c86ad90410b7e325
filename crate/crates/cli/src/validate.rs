//! Invariant suite run on fresh random instances. Stops at the first
//! failing check and reports the instance seed.

use std::fmt;

use damsim::dam::{interference_terms, transmit_power, SinrForm};
use damsim::power::sca_taylor_bound;
use damsim::{
    build_grouping, design_scheme, generate_scenario, simulate_time_domain, waterfilling,
    zf_directions, DamError, ScenarioChannel64, Scheme, SymbolAlphabet,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::seed::trial_seed;

/// Symbols per UE in the sample-level check. QPSK symbols have exactly unit
/// power, so the noiseless estimate is exact up to rounding.
const ORACLE_SYMBOLS: usize = 2000;
const ORACLE_TOL: f64 = 1e-6;
const SINR_FORM_TOL: f64 = 1e-9;
const ZF_TOL: f64 = 1e-9;
const POWER_TOL: f64 = 1e-9;
const WATERFILL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub check: &'static str,
    pub instance: usize,
    pub seed: u64,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} failed on instance {} (seed {}): {}",
            self.check, self.instance, self.seed, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub instances: usize,
    pub checks_run: usize,
    pub failure: Option<Failure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Check = std::result::Result<(), String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn sinr_forms_agree(channel: &ScenarioChannel64, f: &damsim::BeamformerSet64) -> Check {
    let grouping = build_grouping(channel);
    let base =
        interference_terms(f, &grouping, channel, SinrForm::PerPath).map_err(|e| e.to_string())?;
    let scale = base
        .iter()
        .map(|t| t.desired + t.isi + t.iui)
        .fold(0.0, f64::max);
    for form in [SinrForm::Stacked, SinrForm::Matrix] {
        let other = interference_terms(f, &grouping, channel, form).map_err(|e| e.to_string())?;
        for (k, (a, b)) in base.iter().zip(&other).enumerate() {
            for (x, y) in [(a.desired, b.desired), (a.isi, b.isi), (a.iui, b.iui)] {
                if (x - y).abs() > SINR_FORM_TOL * scale {
                    return Err(format!(
                        "UE {k}: {form:?} gives {y:e}, per-path gives {x:e}"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn zf_nulls(channel: &ScenarioChannel64) -> Check {
    let dirs = zf_directions(channel).map_err(|e| e.to_string())?;
    let n = channel.total_paths();
    let prod = channel.h.adjoint() * &dirs.w;
    let id = DMatrix::<nalgebra::Complex<f64>>::identity(n, n);
    let err = (prod - id).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if err > ZF_TOL {
        return Err(format!("max |H^H W - I| = {err:e}"));
    }
    Ok(())
}

fn taylor_bound_holds(rng: &mut ChaCha8Rng) -> Check {
    let n = rng.random_range(2..8);
    let u = DMatrix::from_fn(n, n + 1, |_, _| rng.random::<f64>() - 0.5);
    let a_r = DVector::from_fn(n, |_, _| rng.random::<f64>() + 0.1);
    let g_r = rng.random::<f64>() + 0.1;
    let bound = sca_taylor_bound(&a_r, g_r, &u).map_err(|e| e.to_string())?;
    let exact = |a: &DVector<f64>, g: f64| (u.transpose() * a).norm_squared() / g;
    if rel(bound.eval(&a_r, g_r), exact(&a_r, g_r)) > 1e-12 {
        return Err("bound is not tight at the expansion point".into());
    }
    for _ in 0..50 {
        let a = DVector::from_fn(n, |_, _| 2.0 * rng.random::<f64>());
        let g = rng.random::<f64>() * 2.0 + 1e-3;
        let (lo, hi) = (bound.eval(&a, g), exact(&a, g));
        if lo > hi + 1e-12 * hi.abs().max(1.0) {
            return Err(format!("bound {lo:e} exceeds function {hi:e}"));
        }
    }
    Ok(())
}

fn waterfilling_kkt(rng: &mut ChaCha8Rng) -> Check {
    let n = rng.random_range(1..16);
    let gains: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 + 1e-3).collect();
    let total = rng.random::<f64>() * 10.0 + 1e-2;
    let wf = waterfilling(&gains, total, 1.0).map_err(|e| e.to_string())?;
    let r = wf.kkt_residual(&gains, total, 1.0);
    if r > WATERFILL_TOL {
        return Err(format!("KKT residual {r:e}"));
    }
    Ok(())
}

/// Runs every check on `instances` channel draws.
pub fn run_validate(config: &ExperimentConfig, instances: usize) -> Result<ValidationReport> {
    config.validate()?;
    let schemes = config.parsed_schemes()?;
    let settings = config.sca_settings();
    let mut checks_run = 0;
    for i in 0..instances {
        let seed = trial_seed(config.seed, 0, i);
        let fail = |check: &'static str, detail: String, checks_run: usize| {
            Ok(ValidationReport {
                instances,
                checks_run,
                failure: Some(Failure {
                    check,
                    instance: i,
                    seed,
                    detail,
                }),
            })
        };
        let cfg = config.scenario(config.transmit_power(), config.paths_per_ue.clone(), seed);
        let mut rng = cfg.rng();
        let channel = generate_scenario(&cfg, &mut rng)?;
        let grouping = build_grouping(&channel);
        let (p, noise) = (cfg.transmit_power, cfg.noise_power);

        if schemes.contains(&Scheme::DamZf) {
            checks_run += 1;
            if let Err(e) = zf_nulls(&channel) {
                return fail("zf-nulling", e, checks_run);
            }
        }
        for &scheme in &schemes {
            let d = match design_scheme(&channel, &grouping, scheme, p, noise, &settings) {
                Ok(d) => d,
                Err(e @ DamError::ZfInfeasible { .. }) => {
                    return fail("zf-feasibility", e.to_string(), checks_run)
                }
                Err(e) => return fail("design", format!("{scheme}: {e}"), checks_run),
            };

            checks_run += 1;
            let used = transmit_power(&d.beamformers);
            if used > p * (1.0 + POWER_TOL) {
                return fail(
                    "power-constraint",
                    format!("{scheme} uses {used:e} W of {p:e} W"),
                    checks_run,
                );
            }

            if !scheme.is_strongest_path() {
                checks_run += 1;
                if let Err(e) = sinr_forms_agree(&channel, &d.beamformers) {
                    return fail("sinr-forms", format!("{scheme}: {e}"), checks_run);
                }
            }

            checks_run += 1;
            let tx = d.transmission(&channel)?;
            let sim = simulate_time_domain(
                &tx,
                &channel,
                0.0,
                ORACLE_SYMBOLS,
                SymbolAlphabet::Qpsk,
                &mut rng,
            )?;
            let scale = d
                .report
                .ues
                .iter()
                .map(|u| u.desired + u.isi + u.iui)
                .fold(0.0, f64::max);
            for (k, (a, b)) in d.report.ues.iter().zip(&sim.ues).enumerate() {
                for (name, x, y) in [
                    ("desired", a.desired, b.desired),
                    ("ISI", a.isi, b.isi),
                    ("IUI", a.iui, b.iui),
                ] {
                    if (x - y).abs() > ORACLE_TOL * scale {
                        return fail(
                            "oracle-equivalence",
                            format!("{scheme} UE {k} {name}: analytic {x:e}, simulated {y:e}"),
                            checks_run,
                        );
                    }
                }
            }
        }

        let mut aux = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_F42D_4C95_7F2D);
        checks_run += 1;
        if let Err(e) = taylor_bound_holds(&mut aux) {
            return fail("taylor-bound", e, checks_run);
        }
        checks_run += 1;
        if let Err(e) = waterfilling_kkt(&mut aux) {
            return fail("waterfilling-kkt", e, checks_run);
        }
    }
    Ok(ValidationReport {
        instances,
        checks_run,
        failure: None,
    })
}
