use proptest::prelude::*;
use rand::RngCore;
use staircase_core::bits::BitMatrix;
use staircase_core::staircase::StaircaseParams;
use staircase_sim::channel::{stream_rng, Bsc};
use staircase_sim::stall::{persistence_probability, PersistenceConfig};
use staircase_sim::stats::wilson95;
use staircase_sim::zeta::{estimate_zeta, ZetaConfig};
use staircase_sim::{CodeChoice, SimConfig, Simulator, StopReason};

#[test]
fn streams_are_distinct_and_repeatable() {
    let draw = |s, p, c| stream_rng(s, p, c).next_u64();
    assert_eq!(draw(1, 2, 3), draw(1, 2, 3));
    assert_ne!(draw(1, 2, 3), draw(1, 2, 4));
    assert_ne!(draw(1, 2, 3), draw(1, 3, 3));
    assert_ne!(draw(1, 2, 3), draw(2, 2, 3));
}

#[test]
fn channel_flip_rate_matches_crossover() {
    let bsc = Bsc::new(1e-2).unwrap();
    let mut rng = stream_rng(4, 0, 0);
    let mut m = BitMatrix::zeros(1000, 1000);
    let flips = bsc.corrupt(&mut rng, &mut m);
    assert_eq!(flips as usize, m.count_ones());
    let (lo, hi) = wilson95(flips, 1_000_000);
    assert!(lo <= 1e-2 && 1e-2 <= hi, "{flips} flips");
}

#[test]
fn persistence_ignores_worker_count() {
    let params = StaircaseParams::g709();
    let run = |workers| {
        let cfg = PersistenceConfig {
            trials: 40,
            workers,
            ..PersistenceConfig::default()
        };
        persistence_probability(&params, &cfg).unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn noiseless_stall_always_persists() {
    let cfg = PersistenceConfig {
        p: 1e-9,
        trials: 16,
        ..PersistenceConfig::default()
    };
    let r = persistence_probability(&StaircaseParams::g709(), &cfg).unwrap();
    assert_eq!((r.occurred, r.persisted), (16, 16));
}

#[test]
fn zeta_ignores_worker_count_and_vanishes_without_noise() {
    let params = StaircaseParams::g709();
    let cfg = |p, workers| ZetaConfig {
        p,
        blocks_per_chunk: 8,
        chunks: 3,
        base_seed: 2,
        workers,
    };
    let a = estimate_zeta(&params, &cfg(4.8e-3, 1)).unwrap();
    let b = estimate_zeta(&params, &cfg(4.8e-3, 2)).unwrap();
    assert_eq!(a, b);
    assert!(a.zeta > 0.0);
    let quiet = estimate_zeta(&params, &cfg(1e-6, 1)).unwrap();
    assert_eq!(quiet.wrong_flips, 0);
}

#[test]
fn square_staircase_sweep_is_reproducible() {
    let cfg = SimConfig {
        code: CodeChoice::Square {
            m: 8,
            t: 3,
            extended: true,
            shorten: 1,
        },
        points: vec![5e-2, 1e-3],
        bits_budget: 200_000,
        target_errors: 50,
        chunk_blocks: 4,
        ..SimConfig::default()
    };
    let run = |workers| {
        let mut results = Simulator::new(SimConfig { workers, ..cfg.clone() })
            .unwrap()
            .run_sweep()
            .unwrap();
        results.iter_mut().for_each(|r| r.elapsed_s = 0.0);
        results
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one[0].stop_reason, StopReason::TargetErrors);
    assert!(one[0].bit_errors_out >= 50);
    assert_eq!(one[1].stop_reason, StopReason::BitsBudget);
    assert!(one[1].bits >= 200_000);
    assert!(one[1].ber_out < one[0].ber_out);
}

proptest! {
    #[test]
    fn wilson_brackets_the_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as u64;
        let (lo, hi) = wilson95(k, n);
        let phat = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= phat && phat <= hi && hi <= 1.0);
        let (lo2, hi2) = wilson95(4 * k, 4 * n);
        prop_assert!(hi2 - lo2 <= hi - lo + 1e-12);
    }
}

#[test]
fn channel_extremes() {
    let mut rng = stream_rng(8, 0, 0);
    let mut m = BitMatrix::zeros(100, 100);
    assert_eq!(Bsc::new(0.0).unwrap().corrupt(&mut rng, &mut m), 0);
    assert!(m.is_zero());

    let n = 10_000_000u64;
    let mut big = BitMatrix::zeros(1000, n as usize / 1000);
    let flips = Bsc::new(0.5).unwrap().corrupt(&mut rng, &mut big) as f64;
    let sigma = (n as f64 * 0.25).sqrt();
    assert!((flips - n as f64 / 2.0).abs() < 4.0 * sigma, "{flips}");
}
