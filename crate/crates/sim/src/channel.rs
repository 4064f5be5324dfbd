//! Binary symmetric channel and reproducible random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use staircase_core::bits::BitMatrix;

use crate::SimError;

/// Independent stream for `(base_seed, point, chunk)`. The seed key holds
/// the base seed and point; the chunk selects the ChaCha stream.
pub fn stream_rng(base_seed: u64, point: u64, chunk: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(chunk);
    rng
}

/// Flips each bit independently with probability `p`. Positions are drawn
/// by geometric skipping, so the cost scales with the number of flips.
#[derive(Debug, Clone)]
pub struct Bsc {
    p: f64,
    gap: Option<Geometric>,
}

impl Bsc {
    pub fn new(p: f64) -> Result<Bsc, SimError> {
        if !(0.0..=0.5).contains(&p) {
            return Err(SimError::Crossover(p));
        }
        let gap = if p > 0.0 {
            Some(Geometric::new(p).map_err(|_| SimError::Crossover(p))?)
        } else {
            None
        };
        Ok(Bsc { p, gap })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Calls `f` with each flipped index in `0..len`, ascending.
    pub fn for_each_flip<R: Rng + ?Sized>(&self, rng: &mut R, len: usize, mut f: impl FnMut(usize)) -> u64 {
        let Some(gap) = &self.gap else {
            return 0;
        };
        let mut flips = 0;
        let mut k = 0u64;
        loop {
            k = k.saturating_add(gap.sample(rng));
            if k >= len as u64 {
                return flips;
            }
            f(k as usize);
            flips += 1;
            k += 1;
        }
    }

    /// Corrupts a bit matrix in row-major order; returns the flip count.
    pub fn corrupt<R: Rng + ?Sized>(&self, rng: &mut R, bits: &mut BitMatrix) -> u64 {
        let cols = bits.cols();
        let len = bits.len();
        self.for_each_flip(rng, len, |k| {
            bits.flip(k / cols, k % cols);
        })
    }

    pub fn corrupt_slice<R: Rng + ?Sized>(&self, rng: &mut R, word: &mut [bool]) -> u64 {
        let len = word.len();
        self.for_each_flip(rng, len, |k| word[k] = !word[k])
    }
}

/// Uniformly random bit matrix.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    m.fill_words(|| rng.random());
    m
}
