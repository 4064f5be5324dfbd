//! Binary polynomials and GF(2^m) arithmetic.
//!
//! Field elements are stored in polynomial basis as `m`-bit integers and
//! multiplied through log/antilog tables. The field is built from a caller
//! supplied primitive polynomial, whose primitivity is checked when the
//! tables are generated.

use std::fmt;
use std::ops::{Add, AddAssign};

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("extension degree {0} outside supported range 2..=16")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly} has degree {found}, expected {expected}")]
    DegreeMismatch {
        poly: BinPoly,
        expected: u32,
        found: usize,
    },
    #[error("polynomial {poly} is reducible (divisible by {factor})")]
    Reducible { poly: BinPoly, factor: BinPoly },
    #[error("polynomial {poly} is irreducible but not primitive: x has order {order}, expected {expected}")]
    NotPrimitive {
        poly: BinPoly,
        order: usize,
        expected: usize,
    },
    #[error("division by the zero polynomial")]
    ZeroModulus,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Polynomial over GF(2). Bit `j` of the packed words is the coefficient of
/// `x^j`; trailing zero words are always trimmed, so the zero polynomial is
/// the empty word vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinPoly {
    words: Vec<u64>,
}

impl BinPoly {
    pub fn zero() -> Self {
        BinPoly { words: Vec::new() }
    }

    pub fn one() -> Self {
        BinPoly::from_u64(1)
    }

    /// Polynomial whose coefficients are the bits of `bits`.
    pub fn from_u64(bits: u64) -> Self {
        let mut p = BinPoly { words: vec![bits] };
        p.trim();
        p
    }

    /// Sum of `x^e` over the given exponents. Repeated exponents cancel.
    pub fn from_exponents(exponents: &[usize]) -> Self {
        let mut p = BinPoly::zero();
        for &e in exponents {
            p.flip(e);
        }
        p
    }

    /// Coefficients listed from `x^0` upwards.
    pub fn from_coeffs<I: IntoIterator<Item = bool>>(coeffs: I) -> Self {
        let mut p = BinPoly::zero();
        for (j, c) in coeffs.into_iter().enumerate() {
            if c {
                p.flip(j);
            }
        }
        p
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn coeff(&self, j: usize) -> bool {
        self.words
            .get(j / 64)
            .is_some_and(|w| (w >> (j % 64)) & 1 == 1)
    }

    /// Toggles the coefficient of `x^j`.
    pub fn flip(&mut self, j: usize) {
        let w = j / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (j % 64);
        self.trim();
    }

    /// Low 64 coefficients packed into an integer.
    pub fn low_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Exponents with a nonzero coefficient, ascending.
    pub fn exponents(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
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

    fn shl_xor(&mut self, other: &BinPoly, shift: usize) {
        let ws = shift / 64;
        let bs = shift % 64;
        let need = other.words.len() + ws + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + ws] ^= w << bs;
            if bs != 0 {
                self.words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
        self.trim();
    }

    /// Carry-less product.
    pub fn mul(&self, other: &BinPoly) -> BinPoly {
        let mut out = BinPoly::zero();
        for e in self.exponents() {
            out.shl_xor(other, e);
        }
        out
    }

    /// Quotient and remainder of division by `modulus`.
    pub fn div_rem(&self, modulus: &BinPoly) -> Result<(BinPoly, BinPoly), GfError> {
        let dm = modulus.degree().ok_or(GfError::ZeroModulus)?;
        let mut rem = self.clone();
        let mut quo = BinPoly::zero();
        while let Some(dr) = rem.degree() {
            if dr < dm {
                break;
            }
            let shift = dr - dm;
            rem.shl_xor(modulus, shift);
            quo.flip(shift);
        }
        Ok((quo, rem))
    }

    /// Remainder of division by `modulus`; degree is below that of `modulus`.
    pub fn rem(&self, modulus: &BinPoly) -> Result<BinPoly, GfError> {
        self.div_rem(modulus).map(|(_, r)| r)
    }
}

impl Add for &BinPoly {
    type Output = BinPoly;

    fn add(self, rhs: &BinPoly) -> BinPoly {
        let mut out = self.clone();
        out.shl_xor(rhs, 0);
        out
    }
}

impl fmt::Display for BinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let exps: Vec<usize> = self.exponents().collect();
        for (i, &e) in exps.iter().rev().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match e {
                0 => write!(f, "1")?,
                1 => write!(f, "x")?,
                _ => write!(f, "x^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinPoly({self})")
    }
}

/// Element of GF(2^m) in polynomial basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf(pub u16);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf({:#x})", self.0)
    }
}

impl Add for Gf {
    type Output = Gf;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

/// Log/antilog tables for GF(2^m). Immutable once built.
#[derive(Clone)]
pub struct Field {
    m: u32,
    poly: BinPoly,
    order: usize,
    // Doubled so that exp[log a + log b] needs no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m)
            .field("poly", &self.poly)
            .finish()
    }
}

impl Field {
    /// Builds GF(2^m) from a primitive polynomial of degree `m`.
    pub fn new(m: u32, poly: BinPoly) -> Result<Field, GfError> {
        if !(2..=MAX_DEGREE).contains(&m) {
            return Err(GfError::UnsupportedDegree(m));
        }
        match poly.degree() {
            Some(d) if d == m as usize => {}
            found => {
                return Err(GfError::DegreeMismatch {
                    poly,
                    expected: m,
                    found: found.unwrap_or(0),
                })
            }
        }
        let size = 1usize << m;
        let order = size - 1;
        let reduce = poly.low_u64() as u32 & (size as u32 - 1);

        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x: u32 = 1;
        let mut cycle = 0usize;
        for k in 0..order {
            if k > 0 && x == 1 {
                cycle = k;
                break;
            }
            exp[k] = x as u16;
            log[x as usize] = k as u16;
            x <<= 1;
            if x & size as u32 != 0 {
                x = (x ^ size as u32) ^ reduce;
            }
            if x == 0 {
                break;
            }
        }
        if cycle == 0 && x == 1 {
            cycle = order;
        }
        if cycle != order {
            return Err(match small_factor(&poly) {
                Some(factor) => GfError::Reducible { poly, factor },
                None => GfError::NotPrimitive {
                    poly,
                    order: cycle,
                    expected: order,
                },
            });
        }
        for k in order..2 * order {
            exp[k] = exp[k - order];
        }
        Ok(Field {
            m,
            poly,
            order,
            exp,
            log,
        })
    }

    /// GF(2^10) generated by x^10 + x^3 + 1.
    pub fn gf1024() -> Field {
        Field::new(10, BinPoly::from_exponents(&[10, 3, 0])).expect("x^10+x^3+1 is primitive")
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> &BinPoly {
        &self.poly
    }

    /// Number of field elements, 2^m.
    pub fn size(&self) -> usize {
        self.order + 1
    }

    /// Multiplicative group order, 2^m - 1.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf> {
        (0..self.size() as u32).map(|v| Gf(v as u16))
    }

    /// alpha^k for any k (reduced modulo the group order).
    #[inline]
    pub fn alpha_pow(&self, k: usize) -> Gf {
        Gf(self.exp[k % self.order])
    }

    /// Discrete log base alpha, `None` for zero.
    #[inline]
    pub fn log(&self, a: Gf) -> Option<usize> {
        if a.is_zero() {
            None
        } else {
            Some(self.log[a.0 as usize] as usize)
        }
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.is_zero() || b.is_zero() {
            return Gf::ZERO;
        }
        Gf(self.exp[self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize])
    }

    #[inline]
    pub fn square(&self, a: Gf) -> Gf {
        self.mul(a, a)
    }

    pub fn inv(&self, a: Gf) -> Result<Gf, GfError> {
        let l = self.log(a).ok_or(GfError::ZeroInverse)?;
        Ok(Gf(self.exp[(self.order - l) % self.order]))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf, GfError> {
        let lb = self.log(b).ok_or(GfError::ZeroInverse)?;
        Ok(match self.log(a) {
            None => Gf::ZERO,
            Some(la) => Gf(self.exp[la + self.order - lb]),
        })
    }

    /// a^k for signed k; 0^0 = 1 and 0^k = 0 for k > 0. Negative powers of
    /// zero are rejected.
    pub fn pow(&self, a: Gf, k: i64) -> Result<Gf, GfError> {
        match self.log(a) {
            None if k == 0 => Ok(Gf::ONE),
            None if k > 0 => Ok(Gf::ZERO),
            None => Err(GfError::ZeroInverse),
            Some(l) => {
                let e = (l as i128 * k as i128).rem_euclid(self.order as i128) as usize;
                Ok(Gf(self.exp[e]))
            }
        }
    }

    /// Unique square root (squaring is a bijection in characteristic 2).
    pub fn sqrt(&self, a: Gf) -> Gf {
        match self.log(a) {
            None => Gf::ZERO,
            // order is odd, so halving the log is always possible
            Some(l) => {
                let half = if l % 2 == 0 { l / 2 } else { (l + self.order) / 2 };
                Gf(self.exp[half])
            }
        }
    }

    /// Absolute trace Tr(a) = a + a^2 + ... + a^(2^(m-1)), an element of GF(2).
    pub fn trace(&self, a: Gf) -> bool {
        let mut acc = Gf::ZERO;
        let mut x = a;
        for _ in 0..self.m {
            acc += x;
            x = self.square(x);
        }
        debug_assert!(acc.0 <= 1);
        acc == Gf::ONE
    }

    /// Evaluates a binary polynomial at `alpha^e`.
    pub fn eval_at_alpha_pow(&self, p: &BinPoly, e: usize) -> Gf {
        let mut acc = Gf::ZERO;
        for j in p.exponents() {
            acc += self.alpha_pow((j * e) % self.order);
        }
        acc
    }

    /// Exponents in the cyclotomic coset of `e` modulo 2^m - 1.
    pub fn cyclotomic_coset(&self, e: usize) -> Vec<usize> {
        let mut coset = vec![e % self.order];
        let mut x = (2 * e) % self.order;
        while x != coset[0] {
            coset.push(x);
            x = (2 * x) % self.order;
        }
        coset
    }

    /// Minimal polynomial of alpha^e over GF(2).
    pub fn minimal_polynomial(&self, e: usize) -> BinPoly {
        // coefficients in GF(2^m), lowest first
        let mut coeffs = vec![Gf::ONE];
        for c in self.cyclotomic_coset(e) {
            let root = self.alpha_pow(c);
            let mut next = vec![Gf::ZERO; coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] += self.mul(a, root);
            }
            coeffs = next;
        }
        BinPoly::from_coeffs(coeffs.iter().map(|c| {
            debug_assert!(c.0 <= 1, "minimal polynomial must have binary coefficients");
            *c == Gf::ONE
        }))
    }
}

/// Finds a factor of degree 1..=deg/2 by trial division, if any.
fn small_factor(poly: &BinPoly) -> Option<BinPoly> {
    let d = poly.degree()?;
    for deg in 1..=d / 2 {
        for low in 0u64..(1 << deg) {
            let cand = BinPoly::from_u64((1 << deg) | low);
            if poly.rem(&cand).ok()?.is_zero() {
                return Some(cand);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf16() -> Field {
        Field::new(4, BinPoly::from_exponents(&[4, 1, 0])).unwrap()
    }

    // schoolbook carry-less multiply on bool vectors
    fn naive_mul(a: &BinPoly, b: &BinPoly) -> BinPoly {
        let (Some(da), Some(db)) = (a.degree(), b.degree()) else {
            return BinPoly::zero();
        };
        let mut out = vec![false; da + db + 1];
        for i in 0..=da {
            for j in 0..=db {
                out[i + j] ^= a.coeff(i) & b.coeff(j);
            }
        }
        BinPoly::from_coeffs(out)
    }

    fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> BinPoly {
        let d = rng.random_range(0..=max_deg);
        BinPoly::from_coeffs((0..=d).map(|_| rng.random_bool(0.5)))
    }

    #[test]
    fn poly_mul_examples() {
        let x1 = BinPoly::from_exponents(&[1, 0]);
        assert_eq!(x1.mul(&x1), BinPoly::from_exponents(&[2, 0]));
        let a = BinPoly::from_exponents(&[7, 3, 1]);
        assert_eq!(a.mul(&BinPoly::one()), a);
        let p = BinPoly::from_exponents(&[10, 3, 0]);
        let q = BinPoly::from_exponents(&[2, 0]);
        assert_eq!(p.mul(&q), BinPoly::from_exponents(&[12, 10, 5, 3, 2, 0]));
        assert_eq!(p.mul(&q), naive_mul(&p, &q));
        assert!(p.mul(&BinPoly::zero()).is_zero());
    }

    #[test]
    fn poly_mod_examples() {
        let p = BinPoly::from_exponents(&[10, 3, 0]);
        let x10 = BinPoly::from_exponents(&[10]);
        assert_eq!(x10.rem(&p).unwrap(), BinPoly::from_exponents(&[3, 0]));
        assert!(p.rem(&p).unwrap().is_zero());
        assert_eq!(x10.rem(&BinPoly::zero()), Err(GfError::ZeroModulus));
    }

    #[test]
    fn poly_ops_match_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let a = random_poly(&mut rng, 200);
            let b = random_poly(&mut rng, 150);
            let prod = a.mul(&b);
            assert_eq!(prod, naive_mul(&a, &b));
            if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
                assert_eq!(prod.degree(), Some(da + db));
            }
            let modulus = random_poly(&mut rng, 90);
            if modulus.is_zero() {
                continue;
            }
            let (q, r) = a.div_rem(&modulus).unwrap();
            assert!(r.degree().is_none_or(|d| d < modulus.degree().unwrap()));
            assert_eq!(&q.mul(&modulus) + &r, a);
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(BinPoly::from_exponents(&[10, 3, 0]).to_string(), "x^10+x^3+1");
        assert_eq!(BinPoly::from_exponents(&[1]).to_string(), "x");
        assert_eq!(BinPoly::zero().to_string(), "0");
    }

    #[test]
    fn builds_gf1024_with_full_order() {
        let f = Field::gf1024();
        assert_eq!(f.order(), 1023);
        let a = f.alpha_pow(1);
        assert_eq!(f.pow(a, 1023).unwrap(), Gf::ONE);
        for k in 1..1023 {
            assert_ne!(f.pow(a, k).unwrap(), Gf::ONE, "alpha^{k} = 1");
        }
    }

    #[test]
    fn gf16_order_by_brute_force() {
        let f = gf16();
        // repeated multiplication by x in the quotient ring, independent of the tables
        let mut x = 1u32;
        let mut seen = std::collections::HashSet::new();
        for _ in 0..15 {
            seen.insert(x);
            x <<= 1;
            if x & 16 != 0 {
                x ^= 0b10011;
            }
        }
        assert_eq!(seen.len(), 15);
        assert_eq!(x, 1);
        assert_eq!(f.order(), 15);
    }

    #[test]
    fn rejects_reducible_and_non_primitive() {
        let err = Field::new(4, BinPoly::from_exponents(&[4, 2, 0])).unwrap_err();
        match err {
            GfError::Reducible { factor, .. } => {
                assert_eq!(factor, BinPoly::from_exponents(&[2, 1, 0]))
            }
            other => panic!("unexpected {other:?}"),
        }
        // x^4+x^3+x^2+x+1 is irreducible with x of order 5
        let err = Field::new(4, BinPoly::from_exponents(&[4, 3, 2, 1, 0])).unwrap_err();
        assert!(matches!(err, GfError::NotPrimitive { order: 5, .. }));
        assert!(matches!(
            Field::new(4, BinPoly::from_exponents(&[4, 1])),
            Err(GfError::Reducible { .. })
        ));
        assert!(matches!(
            Field::new(5, BinPoly::from_exponents(&[4, 1, 0])),
            Err(GfError::DegreeMismatch { .. })
        ));
        assert!(matches!(
            Field::new(17, BinPoly::from_exponents(&[17, 3, 0])),
            Err(GfError::UnsupportedDegree(17))
        ));
    }

    fn check_field_exhaustive(f: &Field) {
        let n = f.order();
        for a in f.elements() {
            assert_eq!(f.sqrt(f.square(a)), a);
            assert_eq!(f.square(f.sqrt(a)), a);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), Gf::ONE);
                assert_eq!(f.alpha_pow(f.log(a).unwrap()), a);
            }
            for b in f.elements() {
                let ab = f.mul(a, b);
                assert_eq!(ab, f.mul(b, a));
                assert_eq!(f.square(a + b), f.square(a) + f.square(b));
                if let (Some(la), Some(lb)) = (f.log(a), f.log(b)) {
                    assert_eq!(f.log(ab), Some((la + lb) % n));
                }
            }
        }
    }

    #[test]
    fn gf16_invariants_exhaustive() {
        check_field_exhaustive(&gf16());
    }

    #[test]
    fn gf32_invariants_exhaustive() {
        check_field_exhaustive(&Field::new(5, BinPoly::from_exponents(&[5, 2, 0])).unwrap());
    }

    #[test]
    fn gf1024_table_mul_matches_polynomial_mod() {
        let f = Field::gf1024();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let a = Gf(rng.random_range(0..1024));
            let b = Gf(rng.random_range(0..1024));
            let pa = BinPoly::from_u64(a.0 as u64);
            let pb = BinPoly::from_u64(b.0 as u64);
            let reference = pa.mul(&pb).rem(f.primitive_poly()).unwrap();
            assert_eq!(f.mul(a, b).0 as u64, reference.low_u64());

            assert_eq!(f.square(a + b), f.square(a) + f.square(b));
            assert_eq!(f.square(f.sqrt(a)), a);
            if let (Some(la), Some(lb)) = (f.log(a), f.log(b)) {
                assert_eq!(f.log(f.mul(a, b)), Some((la + lb) % 1023));
                assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
            }
        }
        assert_eq!(f.inv(Gf::ZERO), Err(GfError::ZeroInverse));
        assert_eq!(f.pow(Gf::ZERO, -1), Err(GfError::ZeroInverse));
        assert_eq!(f.pow(Gf::ZERO, 0), Ok(Gf::ONE));
    }

    #[test]
    fn trace_is_linear_and_balanced() {
        let f = Field::gf1024();
        let ones = f.elements().filter(|&a| f.trace(a)).count();
        assert_eq!(ones, 512);
        assert!(!f.trace(Gf::ZERO));
    }

    #[test]
    fn minimal_polynomials_of_gf1024() {
        let f = Field::gf1024();
        assert_eq!(f.minimal_polynomial(1), BinPoly::from_exponents(&[10, 3, 0]));
        assert_eq!(
            f.minimal_polynomial(3),
            BinPoly::from_exponents(&[10, 3, 2, 1, 0])
        );
        assert_eq!(
            f.minimal_polynomial(5),
            BinPoly::from_exponents(&[10, 8, 3, 2, 0])
        );
        let g16 = gf16();
        assert_eq!(g16.minimal_polynomial(5), BinPoly::from_exponents(&[2, 1, 0]));
        assert_eq!(g16.cyclotomic_coset(3), vec![3, 6, 12, 9]);
    }
}
