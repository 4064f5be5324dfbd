//! Dense bit matrix with 64-bit row-aligned storage.

use std::fmt;

/// Row-major bit matrix. Each row starts on a fresh 64-bit word; unused tail
/// bits are kept zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> BitMatrix {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Overwrites every bit from a word source, 64 columns per call.
    pub fn fill_words(&mut self, mut next: impl FnMut() -> u64) {
        let tail = self.cols % 64;
        for r in 0..self.rows {
            let row = &mut self.words[r * self.stride..(r + 1) * self.stride];
            for w in row.iter_mut() {
                *w = next();
            }
            if tail != 0 {
                if let Some(last) = row.last_mut() {
                    *last &= (1u64 << tail) - 1;
                }
            }
        }
    }

    /// Number of set bits in columns `0..cols` of every row.
    pub fn count_ones_left(&self, cols: usize) -> usize {
        let cols = cols.min(self.cols);
        let (full, rest) = (cols / 64, cols % 64);
        (0..self.rows)
            .map(|r| {
                let row = &self.words[r * self.stride..(r + 1) * self.stride];
                let mut n: u32 = row[..full].iter().map(|w| w.count_ones()).sum();
                if rest != 0 {
                    n += (row[full] & ((1u64 << rest) - 1)).count_ones();
                }
                n as usize
            })
            .sum()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        (self.words[row * self.stride + col / 64] >> (col % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let w = &mut self.words[row * self.stride + col / 64];
        let bit = 1u64 << (col % 64);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    /// Toggles a bit and returns its new value.
    #[inline]
    pub fn flip(&mut self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        let w = &mut self.words[row * self.stride + col / 64];
        let bit = 1u64 << (col % 64);
        *w ^= bit;
        *w & bit != 0
    }

    /// Column indices of the set bits in `row`, ascending.
    pub fn row_ones(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        let base = row * self.stride;
        self.words[base..base + self.stride]
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| {
                let mut bits = w;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        return None;
                    }
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                })
            })
    }

    /// All set bits as `(row, col)`, row-major.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| self.row_ones(r).map(move |c| (r, c)))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitMatrix) -> usize {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn xor_assign(&mut self, other: &BitMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for (r, c) in self.ones() {
            t.set(c, r, true);
        }
        t
    }

    /// Packs bits row-major, most significant bit first within each byte.
    /// The final byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (r, c) in self.ones() {
            let k = r * self.cols + c;
            out[k / 8] |= 0x80 >> (k % 8);
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes). Returns `None` when `bytes`
    /// is shorter than the packed size.
    pub fn from_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Option<BitMatrix> {
        if bytes.len() < (rows * cols).div_ceil(8) {
            return None;
        }
        let mut m = BitMatrix::zeros(rows, cols);
        for k in 0..rows * cols {
            if bytes[k / 8] & (0x80 >> (k % 8)) != 0 {
                m.set(k / cols, k % cols, true);
            }
        }
        Some(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BitMatrix({}x{}, {} ones)",
            self.rows,
            self.cols,
            self.count_ones()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_flip() {
        let mut m = BitMatrix::zeros(3, 130);
        m.set(2, 129, true);
        assert!(m.get(2, 129));
        assert!(!m.flip(2, 129));
        assert!(m.flip(0, 64));
        assert_eq!(m.ones().collect::<Vec<_>>(), vec![(0, 64)]);
        assert_eq!(m.count_ones(), 1);
    }

    #[test]
    fn byte_packing_is_msb_first_row_major() {
        let m = BitMatrix::from_fn(2, 5, |r, c| (r, c) == (0, 0) || (r, c) == (1, 4));
        // bit 0 and bit 9
        assert_eq!(m.to_bytes(), vec![0x80, 0x40]);
        assert_eq!(BitMatrix::from_bytes(2, 5, &m.to_bytes()).unwrap(), m);
        assert!(BitMatrix::from_bytes(2, 5, &[0]).is_none());
    }

    #[test]
    fn word_fill_masks_tail_and_counts_prefix() {
        let mut m = BitMatrix::zeros(3, 70);
        m.fill_words(|| u64::MAX);
        assert_eq!(m.count_ones(), 210);
        assert_eq!(m.count_ones_left(65), 195);
        assert_eq!(m.count_ones_left(64), 192);
        assert_eq!(m.count_ones_left(500), 210);
        let naive = m.ones().filter(|&(_, c)| c < 5).count();
        assert_eq!(m.count_ones_left(5), naive);
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = BitMatrix::from_fn(7, 70, |r, c| (r * 31 + c * 7) % 5 == 0);
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().get(69, 6), m.get(6, 69));
    }
}
