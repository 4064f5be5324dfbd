//! Staircase encoder and sliding-window syndrome decoder.
//!
//! Block `B_i` has `rows` rows of `cols` bits, with `rows = cols + pad`. The
//! component codeword that terminates in `B_i` at row `j` is the row `j` of
//! `[pad-zeros-then-transpose(B_{i-1}) | B_i]`, read left to right, so it has
//! `rows + cols` bits: `rows` bits taken from column `j - pad` of `B_{i-1}`
//! (virtual zeros when `j < pad`) followed by row `j` of `B_i`. The last `r`
//! columns of each block hold parity.
//!
//! Within a codeword, layout position `c` is the coefficient of
//! `x^(n - 1 - c)`, so the information bits sit at the high exponents and the
//! parity at the low ones.
//!
//! Every stored bit `B_i[a][b]` lies in exactly two codewords: row `a`
//! terminating in `B_i`, and row `b + pad` terminating in `B_{i+1}`.

use std::collections::VecDeque;
use std::sync::Arc;

use num_rational::Ratio;
use thiserror::Error;

use crate::bits::BitMatrix;
use crate::component::{ComponentCode, DecodeKind, Syndrome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaircaseError {
    #[error("component length {n} does not match block geometry {rows}+{cols}")]
    LengthMismatch { n: usize, rows: usize, cols: usize },
    #[error("component parity r={r} leaves no information columns in {cols}")]
    NoInformation { r: usize, cols: usize },
    #[error("window length and iteration cap must be positive")]
    EmptyWindow,
    #[error("expected a {expected_rows}x{expected_cols} matrix, got {rows}x{cols}")]
    Dimension {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("window already holds {0} blocks; slide before pushing")]
    WindowFull(usize),
    #[error("block {0} is not inside the decoding window")]
    NotInWindow(u64),
    #[error("codeword index out of range: block {block}, row {row}")]
    CodewordOutOfRange { block: u64, row: usize },
}

/// Block geometry, component code and decoder schedule.
#[derive(Debug, Clone)]
pub struct StaircaseParams {
    code: Arc<ComponentCode>,
    rows: usize,
    cols: usize,
    pad: usize,
    window: usize,
    max_iters: usize,
}

impl StaircaseParams {
    pub fn new(
        code: Arc<ComponentCode>,
        cols: usize,
        pad: usize,
        window: usize,
        max_iters: usize,
    ) -> Result<StaircaseParams, StaircaseError> {
        let rows = cols + pad;
        if code.n() != rows + cols {
            return Err(StaircaseError::LengthMismatch {
                n: code.n(),
                rows,
                cols,
            });
        }
        if code.r() >= cols {
            return Err(StaircaseError::NoInformation { r: code.r(), cols });
        }
        if window == 0 || max_iters == 0 {
            return Err(StaircaseError::EmptyWindow);
        }
        Ok(StaircaseParams {
            code,
            rows,
            cols,
            pad,
            window,
            max_iters,
        })
    }

    /// 512x510 blocks over the (1022, 990) component code, L = 7.
    pub fn g709() -> StaircaseParams {
        StaircaseParams::new(Arc::new(ComponentCode::g709()), 510, 2, 7, 7)
            .expect("valid G.709 geometry")
    }

    /// Square `m x m` blocks; `code` must have length `2m`.
    pub fn square(
        code: Arc<ComponentCode>,
        window: usize,
        max_iters: usize,
    ) -> Result<StaircaseParams, StaircaseError> {
        let m = code.n() / 2;
        StaircaseParams::new(code, m, 0, window, max_iters)
    }

    pub fn with_window(mut self, window: usize) -> Result<StaircaseParams, StaircaseError> {
        if window == 0 {
            return Err(StaircaseError::EmptyWindow);
        }
        self.window = window;
        Ok(self)
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Result<StaircaseParams, StaircaseError> {
        if max_iters == 0 {
            return Err(StaircaseError::EmptyWindow);
        }
        self.max_iters = max_iters;
        Ok(self)
    }

    /// Same geometry with a different component decoder configuration.
    pub fn with_code(mut self, code: Arc<ComponentCode>) -> Result<StaircaseParams, StaircaseError> {
        if code.n() != self.code.n() || code.r() != self.code.r() {
            return Err(StaircaseError::LengthMismatch {
                n: code.n(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        self.code = code;
        Ok(self)
    }

    pub fn code(&self) -> &Arc<ComponentCode> {
        &self.code
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    /// Information columns per block, `cols - r`.
    pub fn info_cols(&self) -> usize {
        self.cols - self.code.r()
    }

    pub fn info_bits_per_block(&self) -> usize {
        self.rows * self.info_cols()
    }

    pub fn bits_per_block(&self) -> usize {
        self.rows * self.cols
    }

    /// `(cols - r) / cols`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.info_cols() as u64, self.cols as u64)
    }

    /// Rate of the product code built from the same component code,
    /// `(k / n)^2`; for square blocks this is `1 - r/m + r^2/(4 m^2)`.
    pub fn related_product_rate(&self) -> Ratio<u64> {
        let r = Ratio::new(self.code.k() as u64, self.code.n() as u64);
        r * r
    }

    #[inline]
    fn n(&self) -> usize {
        self.rows + self.cols
    }
}

/// Staircase rate `1 - r/m` for square `m x m` blocks.
pub fn staircase_rate(m: u64, r: u64) -> Ratio<u64> {
    Ratio::new(m - r, m)
}

/// Rate of the related product code, `((2m - r) / 2m)^2`.
pub fn related_product_rate(m: u64, r: u64) -> Ratio<u64> {
    let x = Ratio::new(2 * m - r, 2 * m);
    x * x
}

/// One staircase block with its stream index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: u64,
    pub bits: BitMatrix,
}

/// Location of a codeword bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    /// Padding position, always zero and never stored.
    Virtual,
    Bit { block: u64, row: usize, col: usize },
}

/// Bits of the codeword terminating in `block` at `row`, in layout order:
/// `rows` positions from the previous block, then `cols` from this one.
pub fn codeword_geometry(
    params: &StaircaseParams,
    block: u64,
    row: usize,
) -> Result<Vec<Coord>, StaircaseError> {
    if block == 0 || row >= params.rows {
        return Err(StaircaseError::CodewordOutOfRange { block, row });
    }
    let mut out = Vec::with_capacity(params.n());
    for c in 0..params.rows {
        out.push(if row < params.pad {
            Coord::Virtual
        } else {
            Coord::Bit {
                block: block - 1,
                row: c,
                col: row - params.pad,
            }
        });
    }
    for b in 0..params.cols {
        out.push(Coord::Bit { block, row, col: b });
    }
    Ok(out)
}

/// Recursive staircase encoder. `B_0` is the all-zero reference block.
#[derive(Debug, Clone)]
pub struct Encoder {
    params: StaircaseParams,
    prev: BitMatrix,
    next_index: u64,
}

impl Encoder {
    pub fn new(params: StaircaseParams) -> Encoder {
        let prev = BitMatrix::zeros(params.rows, params.cols);
        Encoder {
            params,
            prev,
            next_index: 1,
        }
    }

    pub fn params(&self) -> &StaircaseParams {
        &self.params
    }

    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    /// Encodes `rows x (cols - r)` information bits into the next block.
    pub fn encode_block(&mut self, info: &BitMatrix) -> Result<Block, StaircaseError> {
        let p = &self.params;
        let info_cols = p.info_cols();
        if info.rows() != p.rows || info.cols() != info_cols {
            return Err(StaircaseError::Dimension {
                expected_rows: p.rows,
                expected_cols: info_cols,
                rows: info.rows(),
                cols: info.cols(),
            });
        }
        let r = p.code.r();
        let mut block = BitMatrix::zeros(p.rows, p.cols);
        for j in 0..p.rows {
            let prev = &self.prev;
            let head = (0..p.rows).map(move |c| j >= p.pad && prev.get(c, j - p.pad));
            let body = (0..info_cols).map(|c| info.get(j, c));
            let parity = p.code.parity_msb_first(head.chain(body));
            for c in info.row_ones(j) {
                block.set(j, c, true);
            }
            for q in 0..r {
                if (parity >> (r - 1 - q)) & 1 == 1 {
                    block.set(j, info_cols + q, true);
                }
            }
        }
        let out = Block {
            index: self.next_index,
            bits: block.clone(),
        };
        self.prev = block;
        self.next_index += 1;
        Ok(out)
    }

    /// Appends `window - 1` blocks carrying all-zero information, so the
    /// last data block is decoded with a full window behind it.
    pub fn flush(&mut self) -> Vec<Block> {
        let zeros = BitMatrix::zeros(self.params.rows, self.params.info_cols());
        (1..self.params.window)
            .map(|_| self.encode_block(&zeros).expect("dimensions match"))
            .collect()
    }
}

/// Counters for one or more `decode` calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowStats {
    /// Component decodings of dirty nonzero syndromes.
    pub decodings: u64,
    /// Decodings whose correction was applied.
    pub corrections: u64,
    pub bits_flipped: u64,
    /// Decodings that returned failure.
    pub failures: u64,
    /// Failures caused by the extension-bit veto.
    pub vetoed: u64,
    /// Corrections discarded because they touched padding or emitted bits.
    pub rejected: u64,
    pub passes: u64,
    /// Calls that ended with nonzero syndromes and nothing left to try.
    pub stalls: u64,
    /// Calls that ended because the iteration cap was reached.
    pub capped: u64,
}

impl WindowStats {
    pub fn merge(&mut self, other: &WindowStats) {
        self.decodings += other.decodings;
        self.corrections += other.corrections;
        self.bits_flipped += other.bits_flipped;
        self.failures += other.failures;
        self.vetoed += other.vetoed;
        self.rejected += other.rejected;
        self.passes += other.passes;
        self.stalls += other.stalls;
        self.capped += other.capped;
    }
}

/// Receives every bit flip the decoder applies.
pub trait FlipObserver {
    fn on_flip(&mut self, block: u64, row: usize, col: usize, new_value: bool);
}

impl FlipObserver for () {
    fn on_flip(&mut self, _: u64, _: usize, _: usize, _: bool) {}
}

#[derive(Debug, Clone)]
struct Slot {
    index: u64,
    bits: BitMatrix,
    // syndromes of the codewords terminating in this block, one per row
    syn: Vec<Syndrome>,
    dirty: Vec<bool>,
}

/// Sliding-window decoder over at most `window` received blocks.
///
/// The block just before the window (the last emitted one, or the all-zero
/// `B_0` at stream start) is kept read-only: codewords reaching into it
/// treat those bits as known.
#[derive(Debug, Clone)]
pub struct WindowDecoder {
    params: StaircaseParams,
    history: Block,
    slots: VecDeque<Slot>,
    totals: WindowStats,
}

impl WindowDecoder {
    pub fn new(params: StaircaseParams) -> WindowDecoder {
        let history = Block {
            index: 0,
            bits: BitMatrix::zeros(params.rows, params.cols),
        };
        WindowDecoder {
            params,
            history,
            slots: VecDeque::new(),
            totals: WindowStats::default(),
        }
    }

    pub fn params(&self) -> &StaircaseParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.params.window
    }

    /// Cumulative counters over every `decode` call.
    pub fn totals(&self) -> &WindowStats {
        &self.totals
    }

    /// Stream index expected for the next pushed block.
    pub fn next_index(&self) -> u64 {
        self.slots
            .back()
            .map_or(self.history.index, |s| s.index)
            + 1
    }

    fn prev_bits(&self, slot: usize) -> &BitMatrix {
        if slot == 0 {
            &self.history.bits
        } else {
            &self.slots[slot - 1].bits
        }
    }

    fn compute_syndromes(&self, prev: &BitMatrix, cur: &BitMatrix) -> Vec<Syndrome> {
        let p = &self.params;
        let code = &p.code;
        let n = p.n();
        let mut syn = vec![Syndrome::ZERO; p.rows];
        for (a, b) in prev.ones() {
            syn[b + p.pad] ^= code.mask(n - 1 - a);
        }
        for (j, s) in syn.iter_mut().enumerate() {
            for b in cur.row_ones(j) {
                *s ^= code.mask(p.cols - 1 - b);
            }
        }
        syn
    }

    /// Admits a received block. Its index is assigned from the stream order.
    pub fn push(&mut self, bits: BitMatrix) -> Result<(), StaircaseError> {
        let p = &self.params;
        if self.is_full() {
            return Err(StaircaseError::WindowFull(p.window));
        }
        if bits.rows() != p.rows || bits.cols() != p.cols {
            return Err(StaircaseError::Dimension {
                expected_rows: p.rows,
                expected_cols: p.cols,
                rows: bits.rows(),
                cols: bits.cols(),
            });
        }
        let syn = self.compute_syndromes(self.prev_bits(self.slots.len()), &bits);
        let index = self.next_index();
        self.slots.push_back(Slot {
            index,
            bits,
            dirty: vec![true; syn.len()],
            syn,
        });
        Ok(())
    }

    /// Emits the oldest block, which becomes read-only history.
    pub fn slide(&mut self) -> Option<Block> {
        let slot = self.slots.pop_front()?;
        let block = Block {
            index: slot.index,
            bits: slot.bits,
        };
        self.history = block.clone();
        Some(block)
    }

    /// Iterative decoding of the window: newest block to oldest, rows in
    /// ascending order, until no syndrome changes or the iteration cap is
    /// reached.
    pub fn decode(&mut self) -> WindowStats {
        self.decode_observed(&mut ())
    }

    pub fn decode_observed(&mut self, observer: &mut dyn FlipObserver) -> WindowStats {
        let mut stats = WindowStats::default();
        let mut converged = false;
        for _ in 0..self.params.max_iters {
            stats.passes += 1;
            let mut changed = false;
            for w in (0..self.slots.len()).rev() {
                for j in 0..self.params.rows {
                    changed |= self.decode_codeword(w, j, &mut stats, observer);
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }
        if !converged {
            converged = self.slots.iter().all(|s| s.dirty.iter().all(|d| !d));
        }
        if converged {
            if self
                .slots
                .iter()
                .any(|s| s.syn.iter().any(|x| !x.is_zero()))
            {
                stats.stalls += 1;
            }
        } else {
            stats.capped += 1;
        }
        self.totals.merge(&stats);
        stats
    }

    /// Resolves a codeword position to the stored bit it refers to, as
    /// `(slot holding the bit, row, col, crossing codeword)`. The crossing
    /// codeword is `(slot, row)` of the other codeword through that bit, if
    /// it lives in the window. `None` for padding and history bits.
    #[inline]
    fn locate(&self, w: usize, j: usize, exponent: usize) -> Option<Located> {
        let p = &self.params;
        let c = p.n() - 1 - exponent;
        if c < p.rows {
            if j < p.pad || w == 0 {
                return None;
            }
            let col = j - p.pad;
            Some(Located {
                slot: w - 1,
                row: c,
                col,
                cross: Some((w - 1, c, p.cols - 1 - col)),
            })
        } else {
            let col = c - p.rows;
            let cross = (w + 1 < self.slots.len()).then_some((w + 1, col + p.pad, p.n() - 1 - j));
            Some(Located {
                slot: w,
                row: j,
                col,
                cross,
            })
        }
    }

    fn decode_codeword(
        &mut self,
        w: usize,
        j: usize,
        stats: &mut WindowStats,
        observer: &mut dyn FlipObserver,
    ) -> bool {
        let slot = &mut self.slots[w];
        if !slot.dirty[j] {
            return false;
        }
        slot.dirty[j] = false;
        let syn = slot.syn[j];
        if syn.is_zero() {
            return false;
        }
        stats.decodings += 1;
        let out = self.params.code.decode(&syn);
        let fix = match out.kind {
            DecodeKind::Corrected(fix) => fix,
            DecodeKind::NoError => return false,
            DecodeKind::Failure => {
                stats.failures += 1;
                stats.vetoed += out.vetoed as u64;
                return false;
            }
        };
        let mut targets = [None; 3];
        for (t, e) in targets.iter_mut().zip(fix.iter()) {
            match self.locate(w, j, e) {
                Some(loc) => *t = Some((e, loc)),
                None => {
                    stats.rejected += 1;
                    return false;
                }
            }
        }
        let code = Arc::clone(&self.params.code);
        for (e, loc) in targets.iter().flatten() {
            let slot = &mut self.slots[loc.slot];
            let v = slot.bits.flip(loc.row, loc.col);
            observer.on_flip(slot.index, loc.row, loc.col, v);
            self.slots[w].syn[j] ^= code.mask(*e);
            if let Some((cw, cj, ce)) = loc.cross {
                let cs = &mut self.slots[cw];
                cs.syn[cj] ^= code.mask(ce);
                cs.dirty[cj] = true;
            }
        }
        debug_assert!(self.slots[w].syn[j].bch_is_zero());
        debug_assert!(!code.extension_check() || self.slots[w].syn[j].is_zero());
        stats.corrections += 1;
        stats.bits_flipped += fix.len() as u64;
        true
    }

    fn slot_of(&self, block: u64) -> Result<usize, StaircaseError> {
        let first = self.slots.front().map(|s| s.index).unwrap_or(u64::MAX);
        if block < first || block >= first + self.slots.len() as u64 {
            return Err(StaircaseError::NotInWindow(block));
        }
        Ok((block - first) as usize)
    }

    /// Current working value of a bit in the window.
    pub fn bit(&self, block: u64, row: usize, col: usize) -> Result<bool, StaircaseError> {
        let w = self.slot_of(block)?;
        Ok(self.slots[w].bits.get(row, col))
    }

    /// Working copy of a block in the window.
    pub fn block_bits(&self, block: u64) -> Result<&BitMatrix, StaircaseError> {
        Ok(&self.slots[self.slot_of(block)?].bits)
    }

    /// Flips a bit inside the window and updates both affected syndromes
    /// incrementally, marking them dirty. Models an error arriving after
    /// the syndromes were computed.
    pub fn toggle(&mut self, block: u64, row: usize, col: usize) -> Result<(), StaircaseError> {
        let w = self.slot_of(block)?;
        let p = &self.params;
        if row >= p.rows || col >= p.cols {
            return Err(StaircaseError::CodewordOutOfRange { block, row });
        }
        let n = p.n();
        let (cols, pad) = (p.cols, p.pad);
        let code = Arc::clone(&p.code);
        let own = code.mask(cols - 1 - col);
        let cross = code.mask(n - 1 - row);
        let has_next = w + 1 < self.slots.len();
        let slot = &mut self.slots[w];
        slot.bits.flip(row, col);
        slot.syn[row] ^= own;
        slot.dirty[row] = true;
        if has_next {
            let next = &mut self.slots[w + 1];
            next.syn[col + pad] ^= cross;
            next.dirty[col + pad] = true;
        }
        Ok(())
    }

    /// True when every stored syndrome equals the syndrome recomputed from
    /// the current working bits.
    pub fn is_coherent(&self) -> bool {
        (0..self.slots.len()).all(|w| {
            let fresh = self.compute_syndromes(self.prev_bits(w), &self.slots[w].bits);
            fresh == self.slots[w].syn
        })
    }

    /// Number of nonzero syndromes currently in the window.
    pub fn nonzero_syndromes(&self) -> usize {
        self.slots
            .iter()
            .map(|s| s.syn.iter().filter(|x| !x.is_zero()).count())
            .sum()
    }

    /// Pushes a block and, once the window is full, decodes and emits the
    /// oldest block.
    pub fn process(&mut self, bits: BitMatrix) -> Result<Option<Block>, StaircaseError> {
        self.process_observed(bits, &mut ())
    }

    pub fn process_observed(
        &mut self,
        bits: BitMatrix,
        observer: &mut dyn FlipObserver,
    ) -> Result<Option<Block>, StaircaseError> {
        self.push(bits)?;
        if self.is_full() {
            self.decode_observed(observer);
            return Ok(self.slide());
        }
        Ok(None)
    }

    /// Decodes and emits everything left in the window.
    pub fn finish(&mut self) -> Vec<Block> {
        self.finish_observed(&mut ())
    }

    pub fn finish_observed(&mut self, observer: &mut dyn FlipObserver) -> Vec<Block> {
        let mut out = Vec::with_capacity(self.slots.len());
        while !self.slots.is_empty() {
            self.decode_observed(observer);
            out.extend(self.slide());
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Located {
    slot: usize,
    row: usize,
    col: usize,
    cross: Option<(usize, usize, usize)>,
}

/// Positions of a minimal stall: four codewords terminating in block
/// `block + 1` (indexed by their column `cols[k]` in `block`) each crossed
/// by four others, `rows_here.len()` of them rows of `block` and the rest
/// columns of `block + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalStall {
    pub block: u64,
    pub cols: [usize; 4],
    pub rows_here: Vec<usize>,
    pub cols_next: Vec<usize>,
}

impl MinimalStall {
    /// All 16 positions as `(block, row, col)`.
    pub fn positions(&self, params: &StaircaseParams) -> Vec<(u64, usize, usize)> {
        let mut out = Vec::with_capacity(16);
        for &c in &self.cols {
            for &a in &self.rows_here {
                out.push((self.block, a, c));
            }
            for &b in &self.cols_next {
                out.push((self.block + 1, c + params.pad, b));
            }
        }
        out
    }
}
