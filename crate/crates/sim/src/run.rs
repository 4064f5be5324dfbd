//! Deterministic parallel BER measurement.
//!
//! Each sweep point is split into chunks. A chunk is an independent stream
//! of `chunk_blocks` data blocks starting from the all-zero reference block,
//! followed by flush blocks, with its own random stream keyed by
//! `(base_seed, point, chunk)`. Chunks run in parallel batches and are
//! merged in chunk order; the point stops at the first chunk whose
//! cumulative totals reach the bit budget or the error target. The result
//! is therefore the same for every worker count.

use std::collections::VecDeque;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use staircase_core::analysis::q_from_p;
use staircase_core::bits::BitMatrix;
use staircase_core::product::{product_encode, ProductDecoder, ProductParams};
use staircase_core::staircase::{Encoder, StaircaseParams, WindowDecoder};

use crate::channel::{random_bits, stream_rng, Bsc};
use crate::config::{SimConfig, SimResult, StopReason, System};
use crate::stats::{wilson95, CI_METHOD};
use crate::SimError;

/// Additive counters for one chunk or a merged prefix of chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub frames: u64,
    pub bits: u64,
    pub errors_in: u64,
    pub errors_out: u64,
    pub frame_errors: u64,
    pub stalls: u64,
    pub failures: u64,
    pub vetoed: u64,
    pub rejected: u64,
    pub corrections: u64,
}

impl Tally {
    pub fn merge(&mut self, o: &Tally) {
        self.frames += o.frames;
        self.bits += o.bits;
        self.errors_in += o.errors_in;
        self.errors_out += o.errors_out;
        self.frame_errors += o.frame_errors;
        self.stalls += o.stalls;
        self.failures += o.failures;
        self.vetoed += o.vetoed;
        self.rejected += o.rejected;
        self.corrections += o.corrections;
    }
}

pub struct Simulator {
    cfg: SimConfig,
    system: System,
    pool: rayon::ThreadPool,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Simulator, SimError> {
        cfg.validate()?;
        let system = System::build(&cfg)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| SimError::Config(e.to_string()))?;
        Ok(Simulator { cfg, system, pool })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn run_sweep(&self) -> Result<Vec<SimResult>, SimError> {
        self.run_sweep_with(|_| {})
    }

    /// Runs every point in order, handing each result to `sink` as soon as
    /// it is ready.
    pub fn run_sweep_with(&self, mut sink: impl FnMut(&SimResult)) -> Result<Vec<SimResult>, SimError> {
        let mut out = Vec::with_capacity(self.cfg.points.len());
        for (i, &p) in self.cfg.points.iter().enumerate() {
            let r = self.run_point(i as u64, p)?;
            sink(&r);
            out.push(r);
        }
        Ok(out)
    }

    pub fn run_point(&self, point: u64, p: f64) -> Result<SimResult, SimError> {
        let bsc = Bsc::new(p)?;
        let start = Instant::now();
        let batch = self.cfg.workers as u64;
        let mut total = Tally::default();
        let mut next = 0u64;
        let mut chunks = 0u64;
        let stop = loop {
            let ids: Vec<u64> = (next..next + batch).collect();
            let results: Vec<Tally> = self.pool.install(|| {
                ids.par_iter()
                    .map(|&c| self.run_chunk(&bsc, point, c))
                    .collect()
            });
            next += batch;
            let mut reason = None;
            for t in &results {
                total.merge(t);
                chunks += 1;
                if total.errors_out >= self.cfg.target_errors {
                    reason = Some(StopReason::TargetErrors);
                } else if total.bits >= self.cfg.bits_budget {
                    reason = Some(StopReason::BitsBudget);
                }
                if reason.is_some() {
                    break;
                }
            }
            if let Some(r) = reason {
                break r;
            }
        };
        let (ci_low, ci_high) = wilson95(total.errors_out, total.bits);
        Ok(SimResult {
            p,
            q_db: q_from_p(p),
            bits: total.bits,
            frames: total.frames,
            chunks,
            bit_errors_in: total.errors_in,
            bit_errors_out: total.errors_out,
            frame_errors: total.frame_errors,
            stalls: total.stalls,
            decode_failures: total.failures,
            vetoed: total.vetoed,
            rejected: total.rejected,
            corrections: total.corrections,
            ber_out: total.errors_out as f64 / total.bits as f64,
            ci_low,
            ci_high,
            ci_method: CI_METHOD.to_string(),
            stop_reason: stop,
            elapsed_s: start.elapsed().as_secs_f64(),
        })
    }

    /// Runs one chunk in isolation.
    pub fn run_chunk(&self, bsc: &Bsc, point: u64, chunk: u64) -> Tally {
        let mut rng = stream_rng(self.cfg.base_seed, point, chunk);
        let n = self.cfg.chunk_blocks;
        match &self.system {
            System::Staircase(params) => staircase_chunk(params, bsc, &mut rng, n),
            System::Product(params) => product_chunk(params, bsc, &mut rng, n),
            System::Uncoded(frame_bits) => uncoded_chunk(*frame_bits, bsc, &mut rng, n),
        }
    }
}

fn staircase_chunk<R: Rng>(params: &StaircaseParams, bsc: &Bsc, rng: &mut R, data_blocks: usize) -> Tally {
    let mut t = Tally::default();
    let info_cols = params.info_cols();
    let mut enc = Encoder::new(params.clone());
    let mut dec = WindowDecoder::new(params.clone());
    let mut sent: VecDeque<BitMatrix> = VecDeque::new();
    let compare = |out: BitMatrix, sent: &mut VecDeque<BitMatrix>, index: u64, t: &mut Tally| {
        let tx = sent.pop_front().expect("one sent block per emitted block");
        if index as usize > data_blocks {
            return;
        }
        let mut diff = out;
        diff.xor_assign(&tx);
        let e = diff.count_ones_left(info_cols) as u64;
        t.frames += 1;
        t.bits += params.info_bits_per_block() as u64;
        t.errors_out += e;
        t.frame_errors += (e > 0) as u64;
    };
    let zeros = BitMatrix::zeros(params.rows(), info_cols);
    for b in 0..data_blocks + params.window() - 1 {
        let block = if b < data_blocks {
            enc.encode_block(&random_bits(rng, params.rows(), info_cols))
        } else {
            enc.encode_block(&zeros)
        }
        .expect("dimensions match");
        let mut rx = block.bits.clone();
        sent.push_back(block.bits);
        t.errors_in += bsc.corrupt(rng, &mut rx);
        if let Some(out) = dec.process(rx).expect("window never overfills") {
            compare(out.bits, &mut sent, out.index, &mut t);
        }
    }
    for out in dec.finish() {
        compare(out.bits, &mut sent, out.index, &mut t);
    }
    let s = dec.totals();
    t.stalls += s.stalls;
    t.failures += s.failures;
    t.vetoed += s.vetoed;
    t.rejected += s.rejected;
    t.corrections += s.corrections;
    t
}

fn product_chunk<R: Rng>(params: &ProductParams, bsc: &Bsc, rng: &mut R, frames: usize) -> Tally {
    let mut t = Tally::default();
    for _ in 0..frames {
        let info = random_bits(rng, params.k2(), params.k1());
        let tx = product_encode(params, &info).expect("dimensions match");
        let mut rx = tx.clone();
        t.errors_in += bsc.corrupt(rng, &mut rx);
        let mut dec = ProductDecoder::new(params.clone(), rx).expect("dimensions match");
        let s = dec.decode();
        let mut diff = dec.into_bits();
        diff.xor_assign(&tx);
        // info occupies the top-left k2 x k1 corner
        let e = (0..params.k2())
            .map(|i| diff.row_ones(i).filter(|&c| c < params.k1()).count() as u64)
            .sum::<u64>();
        t.frames += 1;
        t.bits += params.info_bits() as u64;
        t.errors_out += e;
        t.frame_errors += (e > 0) as u64;
        t.stalls += s.stalled as u64;
        t.failures += s.failures;
        t.vetoed += s.vetoed;
        t.corrections += s.corrections;
    }
    t
}

fn uncoded_chunk<R: Rng>(frame_bits: usize, bsc: &Bsc, rng: &mut R, frames: usize) -> Tally {
    let mut t = Tally::default();
    for _ in 0..frames {
        let mut word = vec![false; frame_bits];
        let flips = bsc.corrupt_slice(rng, &mut word);
        let e = word.iter().filter(|&&b| b).count() as u64;
        t.frames += 1;
        t.bits += frame_bits as u64;
        t.errors_in += flips;
        t.errors_out += e;
        t.frame_errors += (e > 0) as u64;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CodeChoice;

    fn toy_cfg() -> SimConfig {
        SimConfig {
            code: CodeChoice::Square {
                m: 6,
                t: 3,
                extended: true,
                shorten: 3,
            },
            points: vec![0.02],
            bits_budget: 20_000,
            target_errors: 1_000_000,
            chunk_blocks: 8,
            ..SimConfig::default()
        }
    }

    #[test]
    fn counters_are_conserved() {
        let sim = Simulator::new(toy_cfg()).unwrap();
        let r = sim.run_point(0, 0.02).unwrap();
        assert_eq!(r.bits, r.frames * sim.system().payload_bits() as u64);
        assert!(r.bit_errors_out <= r.bits);
        assert!(r.bits >= 20_000);
        assert_eq!(r.stop_reason, StopReason::BitsBudget);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let run = |workers| {
            let sim = Simulator::new(SimConfig {
                workers,
                points: vec![0.03, 0.01],
                target_errors: 50,
                ..toy_cfg()
            })
            .unwrap();
            let mut v = sim.run_sweep().unwrap();
            for r in &mut v {
                r.elapsed_s = 0.0;
            }
            v
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(3));
    }

    #[test]
    fn clean_channel_limit() {
        let sim = Simulator::new(toy_cfg()).unwrap();
        let r = sim.run_point(0, 1e-9).unwrap();
        assert_eq!(r.bit_errors_out, 0);
    }

    #[test]
    fn product_system_runs() {
        let sim = Simulator::new(SimConfig {
            code: CodeChoice::Product {
                m: 6,
                t: 3,
                extended: true,
                shorten: 3,
            },
            chunk_blocks: 4,
            ..toy_cfg()
        })
        .unwrap();
        let r = sim.run_point(0, 0.005).unwrap();
        assert_eq!(r.bits, r.frames * 1600);
        assert!(r.bit_errors_in > 0);
    }

    #[test]
    fn uncoded_ber_is_p() {
        let sim = Simulator::new(SimConfig {
            code: CodeChoice::Uncoded { frame_bits: 100_000 },
            bits_budget: 5_000_000,
            target_errors: u64::MAX,
            chunk_blocks: 10,
            ..SimConfig::default()
        })
        .unwrap();
        let r = sim.run_point(0, 0.01).unwrap();
        assert!(r.ci_low <= 0.01 && 0.01 <= r.ci_high, "{r:?}");
        assert_eq!(r.bit_errors_in, r.bit_errors_out);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(Simulator::new(SimConfig {
            points: vec![0.7],
            ..SimConfig::default()
        })
        .is_err());
        assert!(Simulator::new(SimConfig {
            workers: 0,
            ..SimConfig::default()
        })
        .is_err());
        assert!(Simulator::new(SimConfig {
            code: CodeChoice::Square {
                m: 5,
                t: 3,
                extended: true,
                shorten: 0
            },
            ..SimConfig::default()
        })
        .is_err());
    }
}
