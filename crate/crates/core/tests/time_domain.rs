mod common;

use common::{channel, rel};
use damsim::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(scheme: Scheme, seed: u64, alphabet: SymbolAlphabet) {
    let ch = channel(32, vec![3, 3], 110.0, seed);
    let g = build_grouping(&ch);
    let sigma2 = scalar::dbm_to_watts(-93.0);
    let d = design_scheme(&ch, &g, scheme, 1.0, sigma2, &ScaSettings::default()).unwrap();
    let tx = d.transmission(&ch).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let emp = simulate_time_domain(&tx, &ch, 0.0, 100_000, alphabet, &mut rng).unwrap();
    for (e, a) in emp.ues.iter().zip(&d.report.ues) {
        assert!(
            rel(e.desired, a.desired) < 0.01,
            "{scheme} desired {} vs {}",
            e.desired,
            a.desired
        );
        let scale = a.desired;
        // ZF leaves numerically zero interference; compare on the desired scale.
        assert!(
            (e.isi - a.isi).abs() <= 0.01 * a.isi.max(1e-9 * scale),
            "{scheme} isi {} vs {}",
            e.isi,
            a.isi
        );
        assert!(
            (e.iui - a.iui).abs() <= 0.01 * a.iui.max(1e-9 * scale),
            "{scheme} iui {} vs {}",
            e.iui,
            a.iui
        );
    }
}

#[test]
fn every_scheme_matches_the_sample_level_simulation() {
    for scheme in Scheme::SWEEP {
        for seed in 0..3 {
            check(scheme, seed, SymbolAlphabet::Gaussian);
        }
    }
}

#[test]
fn qpsk_symbols_give_the_same_powers() {
    check(Scheme::DamMrt, 11, SymbolAlphabet::Qpsk);
    check(Scheme::SpMrt, 12, SymbolAlphabet::Qpsk);
}
