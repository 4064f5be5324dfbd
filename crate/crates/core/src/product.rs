//! Product code baseline with a syndrome-domain iterative decoder.
//!
//! The array has `n2` rows and `n1` columns. Row `i` is a codeword of the
//! row code with layout position `c` holding the coefficient of
//! `x^(n1 - 1 - c)`; columns follow the same convention with the column
//! code. Information occupies the top-left `k2 x k1` corner.

use std::sync::Arc;

use num_rational::Ratio;

use crate::bits::BitMatrix;
use crate::component::{ComponentCode, DecodeKind, Syndrome};
use crate::staircase::StaircaseError;

#[derive(Debug, Clone)]
pub struct ProductParams {
    row_code: Arc<ComponentCode>,
    col_code: Arc<ComponentCode>,
    max_iters: usize,
}

impl ProductParams {
    pub fn new(
        row_code: Arc<ComponentCode>,
        col_code: Arc<ComponentCode>,
        max_iters: usize,
    ) -> Result<ProductParams, StaircaseError> {
        if max_iters == 0 {
            return Err(StaircaseError::EmptyWindow);
        }
        Ok(ProductParams {
            row_code,
            col_code,
            max_iters,
        })
    }

    /// Same component code on rows and columns.
    pub fn square(code: Arc<ComponentCode>, max_iters: usize) -> Result<ProductParams, StaircaseError> {
        ProductParams::new(Arc::clone(&code), code, max_iters)
    }

    pub fn row_code(&self) -> &Arc<ComponentCode> {
        &self.row_code
    }

    pub fn col_code(&self) -> &Arc<ComponentCode> {
        &self.col_code
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    /// Columns `n1`.
    pub fn n1(&self) -> usize {
        self.row_code.n()
    }

    /// Rows `n2`.
    pub fn n2(&self) -> usize {
        self.col_code.n()
    }

    pub fn k1(&self) -> usize {
        self.row_code.k()
    }

    pub fn k2(&self) -> usize {
        self.col_code.k()
    }

    pub fn info_bits(&self) -> usize {
        self.k1() * self.k2()
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.k1() as u64, self.n1() as u64) * Ratio::new(self.k2() as u64, self.n2() as u64)
    }
}

/// Encodes `k2 x k1` information bits into an `n2 x n1` array.
pub fn product_encode(params: &ProductParams, info: &BitMatrix) -> Result<BitMatrix, StaircaseError> {
    let (k1, k2, n1, n2) = (params.k1(), params.k2(), params.n1(), params.n2());
    if info.rows() != k2 || info.cols() != k1 {
        return Err(StaircaseError::Dimension {
            expected_rows: k2,
            expected_cols: k1,
            rows: info.rows(),
            cols: info.cols(),
        });
    }
    let (r1, r2) = (params.row_code.r(), params.col_code.r());
    let mut out = BitMatrix::zeros(n2, n1);
    for i in 0..k2 {
        let parity = params.row_code.parity_msb_first((0..k1).map(|c| info.get(i, c)));
        for c in info.row_ones(i) {
            out.set(i, c, true);
        }
        for q in 0..r1 {
            if (parity >> (r1 - 1 - q)) & 1 == 1 {
                out.set(i, k1 + q, true);
            }
        }
    }
    for c in 0..n1 {
        let parity = params.col_code.parity_msb_first((0..k2).map(|i| out.get(i, c)));
        for q in 0..r2 {
            if (parity >> (r2 - 1 - q)) & 1 == 1 {
                out.set(k2 + q, c, true);
            }
        }
    }
    Ok(out)
}

/// Counters for one `decode` call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProductStats {
    pub decodings: u64,
    pub corrections: u64,
    pub bits_flipped: u64,
    pub failures: u64,
    pub vetoed: u64,
    pub iterations: u64,
    /// Converged with nonzero syndromes left.
    pub stalled: bool,
    pub clean: bool,
}

/// Working array plus one syndrome per row and per column.
#[derive(Debug, Clone)]
pub struct ProductDecoder {
    params: ProductParams,
    bits: BitMatrix,
    row_syn: Vec<Syndrome>,
    col_syn: Vec<Syndrome>,
    row_dirty: Vec<bool>,
    col_dirty: Vec<bool>,
}

impl ProductDecoder {
    pub fn new(params: ProductParams, received: BitMatrix) -> Result<ProductDecoder, StaircaseError> {
        let (n1, n2) = (params.n1(), params.n2());
        if received.rows() != n2 || received.cols() != n1 {
            return Err(StaircaseError::Dimension {
                expected_rows: n2,
                expected_cols: n1,
                rows: received.rows(),
                cols: received.cols(),
            });
        }
        let (row_syn, col_syn) = Self::syndromes(&params, &received);
        Ok(ProductDecoder {
            params,
            bits: received,
            row_syn,
            col_syn,
            row_dirty: vec![true; n2],
            col_dirty: vec![true; n1],
        })
    }

    fn syndromes(params: &ProductParams, bits: &BitMatrix) -> (Vec<Syndrome>, Vec<Syndrome>) {
        let (n1, n2) = (params.n1(), params.n2());
        let mut rows = vec![Syndrome::ZERO; n2];
        let mut cols = vec![Syndrome::ZERO; n1];
        for (i, c) in bits.ones() {
            rows[i] ^= params.row_code.mask(n1 - 1 - c);
            cols[c] ^= params.col_code.mask(n2 - 1 - i);
        }
        (rows, cols)
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.bits
    }

    pub fn into_bits(self) -> BitMatrix {
        self.bits
    }

    fn apply(&mut self, i: usize, c: usize) {
        let (n1, n2) = (self.params.n1(), self.params.n2());
        self.bits.flip(i, c);
        self.row_syn[i] ^= self.params.row_code.mask(n1 - 1 - c);
        self.col_syn[c] ^= self.params.col_code.mask(n2 - 1 - i);
    }

    /// Flips one bit and updates both syndromes incrementally.
    pub fn toggle(&mut self, row: usize, col: usize) {
        self.apply(row, col);
        self.row_dirty[row] = true;
        self.col_dirty[col] = true;
    }

    pub fn is_coherent(&self) -> bool {
        let (rows, cols) = Self::syndromes(&self.params, &self.bits);
        rows == self.row_syn && cols == self.col_syn
    }

    pub fn is_clean(&self) -> bool {
        self.row_syn.iter().chain(&self.col_syn).all(|s| s.is_zero())
    }

    /// Alternating row and column passes until nothing changes or the
    /// iteration cap is reached.
    pub fn decode(&mut self) -> ProductStats {
        let mut stats = ProductStats::default();
        let mut converged = false;
        for _ in 0..self.params.max_iters {
            stats.iterations += 1;
            let a = self.row_pass(&mut stats);
            let b = self.col_pass(&mut stats);
            if !a && !b {
                converged = true;
                break;
            }
        }
        if !converged {
            converged = self.row_dirty.iter().chain(&self.col_dirty).all(|d| !d);
        }
        stats.clean = self.is_clean();
        stats.stalled = converged && !stats.clean;
        stats
    }

    fn row_pass(&mut self, stats: &mut ProductStats) -> bool {
        let n1 = self.params.n1();
        let code = Arc::clone(&self.params.row_code);
        let mut changed = false;
        for i in 0..self.params.n2() {
            if !std::mem::take(&mut self.row_dirty[i]) || self.row_syn[i].is_zero() {
                continue;
            }
            stats.decodings += 1;
            let out = code.decode(&self.row_syn[i]);
            match out.kind {
                DecodeKind::Corrected(fix) => {
                    for e in fix.iter() {
                        let c = n1 - 1 - e;
                        self.apply(i, c);
                        self.col_dirty[c] = true;
                    }
                    stats.corrections += 1;
                    stats.bits_flipped += fix.len() as u64;
                    changed = true;
                }
                DecodeKind::Failure => {
                    stats.failures += 1;
                    stats.vetoed += out.vetoed as u64;
                }
                DecodeKind::NoError => {}
            }
        }
        changed
    }

    fn col_pass(&mut self, stats: &mut ProductStats) -> bool {
        let n2 = self.params.n2();
        let code = Arc::clone(&self.params.col_code);
        let mut changed = false;
        for c in 0..self.params.n1() {
            if !std::mem::take(&mut self.col_dirty[c]) || self.col_syn[c].is_zero() {
                continue;
            }
            stats.decodings += 1;
            let out = code.decode(&self.col_syn[c]);
            match out.kind {
                DecodeKind::Corrected(fix) => {
                    for e in fix.iter() {
                        let i = n2 - 1 - e;
                        self.apply(i, c);
                        self.row_dirty[i] = true;
                    }
                    stats.corrections += 1;
                    stats.bits_flipped += fix.len() as u64;
                    changed = true;
                }
                DecodeKind::Failure => {
                    stats.failures += 1;
                    stats.vetoed += out.vetoed as u64;
                }
                DecodeKind::NoError => {}
            }
        }
        changed
    }
}

/// Decodes a received array, returning the corrected array and counters.
pub fn product_decode(
    params: &ProductParams,
    received: &BitMatrix,
) -> Result<(BitMatrix, ProductStats), StaircaseError> {
    let mut dec = ProductDecoder::new(params.clone(), received.clone())?;
    let stats = dec.decode();
    Ok((dec.into_bits(), stats))
}

/// Information bits of an encoded array.
pub fn product_info(params: &ProductParams, array: &BitMatrix) -> BitMatrix {
    BitMatrix::from_fn(params.k2(), params.k1(), |i, c| array.get(i, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::CodeSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> ProductParams {
        let code = ComponentCode::new(&CodeSpec::toy(6, 3, true, 3)).unwrap();
        ProductParams::square(Arc::new(code), 8).unwrap()
    }

    fn random_array(p: &ProductParams, seed: u64) -> BitMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info = BitMatrix::from_fn(p.k2(), p.k1(), |_, _| rng.random_bool(0.5));
        product_encode(p, &info).unwrap()
    }

    fn word(bits: impl Iterator<Item = bool>, n: usize) -> Vec<bool> {
        let v: Vec<bool> = bits.collect();
        (0..n).map(|e| v[n - 1 - e]).collect()
    }

    #[test]
    fn rows_and_columns_are_codewords() {
        let p = params();
        let a = random_array(&p, 1);
        for i in 0..p.n2() {
            let w = word((0..p.n1()).map(|c| a.get(i, c)), p.n1());
            assert!(p.row_code().syndrome(&w).unwrap().is_zero());
        }
        for c in 0..p.n1() {
            let w = word((0..p.n2()).map(|i| a.get(i, c)), p.n2());
            assert!(p.col_code().syndrome(&w).unwrap().is_zero());
        }
    }

    #[test]
    fn checks_on_checks_agree_both_ways() {
        // encode columns first, then rows, and compare the parity corner
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let info = BitMatrix::from_fn(p.k2(), p.k1(), |_, _| rng.random_bool(0.5));
        let a = product_encode(&p, &info).unwrap();
        let (k1, k2, n1, n2) = (p.k1(), p.k2(), p.n1(), p.n2());
        let (r1, r2) = (n1 - k1, n2 - k2);
        let mut b = BitMatrix::zeros(n2, n1);
        for c in 0..k1 {
            let par = p.col_code().parity_msb_first((0..k2).map(|i| info.get(i, c)));
            for i in 0..k2 {
                b.set(i, c, info.get(i, c));
            }
            for q in 0..r2 {
                b.set(k2 + q, c, (par >> (r2 - 1 - q)) & 1 == 1);
            }
        }
        for i in 0..n2 {
            let par = p.row_code().parity_msb_first((0..k1).map(|c| b.get(i, c)));
            for q in 0..r1 {
                b.set(i, k1 + q, (par >> (r1 - 1 - q)) & 1 == 1);
            }
        }
        assert_eq!(a, b);
    }

    #[test]
    fn zero_info_encodes_to_zero() {
        let p = params();
        let z = product_encode(&p, &BitMatrix::zeros(p.k2(), p.k1())).unwrap();
        assert!(z.is_zero());
        assert!(product_encode(&p, &BitMatrix::zeros(1, 1)).is_err());
        assert_eq!(p.rate(), Ratio::new(40 * 40, 60 * 60));
    }

    #[test]
    fn single_error_fixed_in_first_row_pass() {
        let p = params();
        let a = random_array(&p, 3);
        let mut rx = a.clone();
        rx.flip(17, 44);
        let (out, stats) = product_decode(&p, &rx).unwrap();
        assert_eq!(out, a);
        assert_eq!(stats.corrections, 1);
        assert!(stats.clean);
    }

    #[test]
    fn six_errors_in_a_row_need_the_column_pass() {
        let p = params();
        let a = random_array(&p, 4);
        let mut rx = a.clone();
        for c in [1, 9, 18, 27, 36, 55] {
            rx.flip(30, c);
        }
        let (out, stats) = product_decode(&p, &rx).unwrap();
        assert_eq!(out, a);
        assert!(stats.iterations <= 2);
    }

    #[test]
    fn grid_of_four_by_four_stalls() {
        let p = params();
        let a = random_array(&p, 5);
        let mut rx = a.clone();
        let rows = [3, 14, 40, 59];
        let cols = [0, 22, 23, 50];
        for &i in &rows {
            for &c in &cols {
                rx.flip(i, c);
            }
        }
        let (out, stats) = product_decode(&p, &rx).unwrap();
        assert!(stats.stalled);
        assert_eq!(stats.corrections, 0);
        assert_eq!(out.hamming_distance(&a), 16);
    }

    #[test]
    fn syndromes_stay_coherent_and_converged_output_is_fixed() {
        let p = params();
        let a = random_array(&p, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut dec = ProductDecoder::new(p.clone(), a).unwrap();
        for step in 0..3000 {
            dec.toggle(rng.random_range(0..p.n2()), rng.random_range(0..p.n1()));
            if step % 40 == 0 {
                dec.decode();
                assert!(dec.is_coherent());
            }
        }
        let first = dec.decode();
        assert!(dec.is_coherent());
        if first.iterations < p.max_iters() as u64 {
            let snap = dec.bits().clone();
            assert_eq!(dec.decode().decodings, 0);
            assert_eq!(dec.bits(), &snap);
        }
    }
}
