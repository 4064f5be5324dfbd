//! Erroneous-flip probability of the window decoder.
//!
//! Streams of all-zero codewords pass through the channel and the decoder.
//! Every flip that sets a bit moves a correct position into error. The
//! estimate is the number of such flips divided by the number of decoded
//! bit positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use staircase_core::bits::BitMatrix;
use staircase_core::staircase::{FlipObserver, StaircaseParams, WindowDecoder};

use crate::channel::{stream_rng, Bsc};
use crate::stats::{wilson95, CI_METHOD};
use crate::SimError;

const STREAM_POINT: u64 = 2 << 32;

pub const ZETA_DEFINITION: &str =
    "decoder flips that move a correct bit into error, per decoded bit position";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaConfig {
    pub p: f64,
    pub blocks_per_chunk: usize,
    pub chunks: u64,
    pub base_seed: u64,
    pub workers: usize,
}

impl Default for ZetaConfig {
    fn default() -> ZetaConfig {
        ZetaConfig {
            p: 4.8e-3,
            blocks_per_chunk: 32,
            chunks: 4,
            base_seed: 1,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub p: f64,
    pub positions: u64,
    pub wrong_flips: u64,
    /// Flips that cleared a channel error.
    pub right_flips: u64,
    pub zeta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_method: String,
    pub definition: String,
}

#[derive(Default)]
struct FlipCount {
    wrong: u64,
    right: u64,
}

impl FlipObserver for FlipCount {
    fn on_flip(&mut self, _: u64, _: usize, _: usize, new_value: bool) {
        if new_value {
            self.wrong += 1;
        } else {
            self.right += 1;
        }
    }
}

fn zeta_chunk(params: &StaircaseParams, bsc: &Bsc, blocks: usize, base_seed: u64, chunk: u64) -> (u64, FlipCount) {
    let mut rng = stream_rng(base_seed, STREAM_POINT, chunk);
    let mut dec = WindowDecoder::new(params.clone());
    let mut count = FlipCount::default();
    for _ in 0..blocks {
        let mut rx = BitMatrix::zeros(params.rows(), params.cols());
        bsc.corrupt(&mut rng, &mut rx);
        dec.process_observed(rx, &mut count).expect("window never overfills");
    }
    dec.finish_observed(&mut count);
    ((blocks * params.bits_per_block()) as u64, count)
}

/// Estimates the erroneous-flip probability at crossover `cfg.p`.
pub fn estimate_zeta(params: &StaircaseParams, cfg: &ZetaConfig) -> Result<ZetaEstimate, SimError> {
    if cfg.chunks == 0 || cfg.blocks_per_chunk == 0 || cfg.workers == 0 {
        return Err(SimError::Config("chunks, blocks and workers must be positive".into()));
    }
    let bsc = Bsc::new(cfg.p)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))?;
    let parts: Vec<(u64, FlipCount)> = pool.install(|| {
        (0..cfg.chunks)
            .into_par_iter()
            .map(|c| zeta_chunk(params, &bsc, cfg.blocks_per_chunk, cfg.base_seed, c))
            .collect()
    });
    let positions: u64 = parts.iter().map(|p| p.0).sum();
    let wrong: u64 = parts.iter().map(|p| p.1.wrong).sum();
    let right: u64 = parts.iter().map(|p| p.1.right).sum();
    let (ci_low, ci_high) = wilson95(wrong, positions);
    Ok(ZetaEstimate {
        p: cfg.p,
        positions,
        wrong_flips: wrong,
        right_flips: right,
        zeta: wrong as f64 / positions as f64,
        ci_low,
        ci_high,
        ci_method: CI_METHOD.to_string(),
        definition: ZETA_DEFINITION.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use staircase_core::component::{CodeSpec, ComponentCode};

    fn toy(check: bool) -> StaircaseParams {
        let code = ComponentCode::new(&CodeSpec::toy(6, 3, true, 3))
            .unwrap()
            .with_extension_check(check);
        StaircaseParams::square(Arc::new(code), 4, 7).unwrap()
    }

    #[test]
    fn tiny_crossover_gives_no_wrong_flips() {
        let est = estimate_zeta(
            &toy(true),
            &ZetaConfig {
                p: 1e-5,
                blocks_per_chunk: 50,
                chunks: 2,
                ..ZetaConfig::default()
            },
        )
        .unwrap();
        assert_eq!(est.wrong_flips, 0);
        assert_eq!(est.zeta, 0.0);
    }

    #[test]
    fn veto_reduces_wrong_flips() {
        let cfg = ZetaConfig {
            p: 0.03,
            blocks_per_chunk: 60,
            chunks: 4,
            ..ZetaConfig::default()
        };
        let on = estimate_zeta(&toy(true), &cfg).unwrap();
        let off = estimate_zeta(&toy(false), &cfg).unwrap();
        assert!(off.zeta > on.zeta, "on {} off {}", on.zeta, off.zeta);
    }
}
