//! Minimal-stall injection and persistence measurement.
//!
//! Trials transmit the all-zero codeword, so a bit is in error exactly when
//! it is set; decoding depends only on the error pattern. A uniformly random
//! minimal stall is placed in block `warmup + 1`, `missing` of its 16
//! positions are forced correct and the rest forced in error, and every
//! other bit passes through the channel. Two outcomes are recorded:
//!
//! * `occurred`: all 16 positions were in error at the same time at some
//!   point, reception included;
//! * `persisted`: all 16 positions are still in error when their blocks
//!   leave the decoder.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use staircase_core::bits::BitMatrix;
use staircase_core::staircase::{FlipObserver, MinimalStall, StaircaseParams, WindowDecoder};

use crate::channel::{stream_rng, Bsc};
use crate::stats::{wilson95, CI_METHOD};
use crate::SimError;

/// Stream-key offset separating persistence trials from BER points.
const STREAM_POINT: u64 = 1 << 32;
const TRIALS_PER_CHUNK: u64 = 16;

fn choose(n: u64, k: u64) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// Draws a minimal stall assigned to `block`, uniformly over all such
/// stalls.
pub fn sample_minimal_stall<R: Rng + ?Sized>(params: &StaircaseParams, block: u64, rng: &mut R) -> MinimalStall {
    let (rows, cols) = (params.rows() as u64, params.cols() as u64);
    let weights: Vec<f64> = (1..=4u64)
        .map(|m| choose(rows, m) * choose(cols, 4 - m))
        .collect();
    let m = WeightedIndex::new(&weights).expect("positive weights").sample(rng) + 1;
    let pick = |rng: &mut R, n: usize, k: usize| -> Vec<usize> {
        let mut v = index::sample(rng, n, k).into_vec();
        v.sort_unstable();
        v
    };
    let c = pick(rng, params.cols(), 4);
    MinimalStall {
        block,
        cols: [c[0], c[1], c[2], c[3]],
        rows_here: pick(rng, params.rows(), m),
        cols_next: pick(rng, params.cols(), 4 - m),
    }
}

struct StallWatch {
    positions: Vec<(u64, usize, usize)>,
    state: Vec<bool>,
    in_error: usize,
    occurred: bool,
}

impl FlipObserver for StallWatch {
    fn on_flip(&mut self, block: u64, row: usize, col: usize, new_value: bool) {
        if let Some(k) = self.positions.iter().position(|&p| p == (block, row, col)) {
            if self.state[k] != new_value {
                self.state[k] = new_value;
                if new_value {
                    self.in_error += 1;
                } else {
                    self.in_error -= 1;
                }
                self.occurred |= self.in_error == self.positions.len();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub occurred: bool,
    pub persisted: bool,
}

/// One injected-stall trial over a fresh stream.
pub fn persistence_trial<R: Rng>(
    params: &StaircaseParams,
    bsc: &Bsc,
    missing: usize,
    warmup: usize,
    rng: &mut R,
) -> TrialOutcome {
    let i = warmup as u64 + 1;
    let stall = sample_minimal_stall(params, i, rng);
    let positions = stall.positions(params);
    let mut state = vec![true; positions.len()];
    for k in index::sample(rng, positions.len(), missing) {
        state[k] = false;
    }
    let in_error = state.iter().filter(|&&s| s).count();
    let mut watch = StallWatch {
        occurred: in_error == positions.len(),
        positions,
        state: state.clone(),
        in_error,
    };
    let mut dec = WindowDecoder::new(params.clone());
    let last = i + params.window() as u64;
    let mut persisted = true;
    for b in 1..=last {
        let mut rx = BitMatrix::zeros(params.rows(), params.cols());
        bsc.corrupt(rng, &mut rx);
        for (k, &(blk, r, c)) in watch.positions.iter().enumerate() {
            if blk == b {
                rx.set(r, c, state[k]);
            }
        }
        if let Some(out) = dec.process_observed(rx, &mut watch).expect("window never overfills") {
            for &(blk, r, c) in &watch.positions {
                if blk == out.index && !out.bits.get(r, c) {
                    persisted = false;
                }
            }
        }
    }
    TrialOutcome {
        occurred: watch.occurred,
        persisted,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceConfig {
    pub p: f64,
    /// Stall positions received correctly.
    pub missing: usize,
    pub trials: u64,
    /// Blocks decoded ahead of the stall block.
    pub warmup: usize,
    pub base_seed: u64,
    pub workers: usize,
}

impl Default for PersistenceConfig {
    fn default() -> PersistenceConfig {
        PersistenceConfig {
            p: 4.8e-3,
            missing: 0,
            trials: 3000,
            warmup: 4,
            base_seed: 1,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceResult {
    pub p: f64,
    pub missing: usize,
    pub trials: u64,
    pub occurred: u64,
    pub persisted: u64,
    pub occurred_ci: (f64, f64),
    pub persisted_ci: (f64, f64),
    pub ci_method: String,
}

impl PersistenceResult {
    pub fn occurred_rate(&self) -> f64 {
        self.occurred as f64 / self.trials as f64
    }

    pub fn persisted_rate(&self) -> f64 {
        self.persisted as f64 / self.trials as f64
    }
}

/// Runs `trials` injections in fixed chunks of independent streams and sums
/// the outcomes.
pub fn persistence_probability(
    params: &StaircaseParams,
    cfg: &PersistenceConfig,
) -> Result<PersistenceResult, SimError> {
    if cfg.trials == 0 || cfg.workers == 0 {
        return Err(SimError::Config("trials and workers must be positive".into()));
    }
    if cfg.missing > 16 {
        return Err(SimError::Config("a minimal stall has 16 positions".into()));
    }
    let bsc = Bsc::new(cfg.p)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))?;
    let chunks = cfg.trials.div_ceil(TRIALS_PER_CHUNK);
    let point = STREAM_POINT + cfg.missing as u64;
    let counts: Vec<(u64, u64)> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(cfg.base_seed, point, c);
                let n = TRIALS_PER_CHUNK.min(cfg.trials - c * TRIALS_PER_CHUNK);
                let mut acc = (0, 0);
                for _ in 0..n {
                    let o = persistence_trial(params, &bsc, cfg.missing, cfg.warmup, &mut rng);
                    acc.0 += o.occurred as u64;
                    acc.1 += o.persisted as u64;
                }
                acc
            })
            .collect()
    });
    let occurred = counts.iter().map(|c| c.0).sum();
    let persisted = counts.iter().map(|c| c.1).sum();
    Ok(PersistenceResult {
        p: cfg.p,
        missing: cfg.missing,
        trials: cfg.trials,
        occurred,
        persisted,
        occurred_ci: wilson95(occurred, cfg.trials),
        persisted_ci: wilson95(persisted, cfg.trials),
        ci_method: CI_METHOD.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use std::sync::Arc;
    use staircase_core::component::{CodeSpec, ComponentCode};

    fn toy() -> StaircaseParams {
        let code = ComponentCode::new(&CodeSpec::toy(6, 3, true, 3)).unwrap();
        StaircaseParams::square(Arc::new(code), 4, 7).unwrap()
    }

    #[test]
    fn sampled_stalls_have_sixteen_distinct_positions() {
        let p = StaircaseParams::g709();
        let mut rng = stream_rng(1, 0, 0);
        for _ in 0..200 {
            let s = sample_minimal_stall(&p, 3, &mut rng);
            assert!(!s.rows_here.is_empty());
            assert_eq!(s.rows_here.len() + s.cols_next.len(), 4);
            let pos: HashSet<_> = s.positions(&p).into_iter().collect();
            assert_eq!(pos.len(), 16);
            assert!(pos.iter().all(|&(b, r, c)| (b == 3 || b == 4) && r < 512 && c < 510));
        }
    }

    #[test]
    fn pure_stall_always_persists() {
        let p = toy();
        let bsc = Bsc::new(0.0).unwrap();
        let mut rng = stream_rng(2, 0, 0);
        for _ in 0..20 {
            let o = persistence_trial(&p, &bsc, 0, 2, &mut rng);
            assert!(o.occurred && o.persisted);
        }
        let g = StaircaseParams::g709();
        let o = persistence_trial(&g, &bsc, 0, 1, &mut rng);
        assert!(o.occurred && o.persisted);
    }

    #[test]
    fn partial_stall_without_noise_is_corrected() {
        // with one position clear every codeword holds at most four errors
        // and the rows with three are corrected
        let p = toy();
        let bsc = Bsc::new(0.0).unwrap();
        let mut rng = stream_rng(3, 0, 0);
        for _ in 0..20 {
            let o = persistence_trial(&p, &bsc, 1, 2, &mut rng);
            assert!(!o.occurred && !o.persisted);
        }
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let p = toy();
        let cfg = PersistenceConfig {
            p: 0.01,
            trials: 40,
            warmup: 2,
            ..PersistenceConfig::default()
        };
        let a = persistence_probability(&p, &cfg).unwrap();
        let b = persistence_probability(&p, &PersistenceConfig { workers: 3, ..cfg }).unwrap();
        assert_eq!(a, b);
        assert!(a.persisted <= a.trials);
    }
}
