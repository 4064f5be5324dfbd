//! Union-bound error-floor estimate from stall-pattern multiplicities.
//!
//! A `(K, L)`-stall involves `L` codewords terminating in block `i + 1` and
//! `K` crossing codewords, `m >= 1` of them terminating in block `i` and the
//! rest in block `i + 2`. The pattern count is an over-bound and every stall
//! is assumed to be uncorrectable.
//!
//! Contributions are computed twice: exactly, as a big-integer numerator
//! over a power of two, and independently in the log domain.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Errors each stall codeword must carry: `t + 1` for `t = 3`.
pub const STALL_WEIGHT: u64 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FloorError {
    #[error("stall class ({k}, {l}) needs both sides at least {min}")]
    ClassTooSmall { k: u64, l: u64, min: u64 },
    #[error("pattern size {size} outside [{lo}, {hi}] for class ({k}, {l})")]
    SizeOutOfRange { k: u64, l: u64, size: u64, lo: u64, hi: u64 },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("code dimension {0} smaller than the stall weight")]
    DimensionTooSmall(u64),
}

/// Candidate codeword counts on each side of a stall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StallGeometry {
    /// Codewords terminating in block `i + 1`, one per column of block `i`.
    pub cols: u64,
    /// Codewords terminating in block `i`, one per row of block `i`.
    pub rows: u64,
    /// Codewords terminating in block `i + 2`, one per column of block `i + 1`.
    pub next_cols: u64,
}

impl StallGeometry {
    pub fn square(m_code: u64) -> StallGeometry {
        StallGeometry {
            cols: m_code,
            rows: m_code,
            next_cols: m_code,
        }
    }

    /// 512x510 blocks. An approximation: the same formulas with
    /// rectangular counts.
    pub fn g709() -> StallGeometry {
        StallGeometry {
            cols: 510,
            rows: 512,
            next_cols: 510,
        }
    }

    /// Stored bits per block, the normalization of the bit error rate.
    pub fn bits_per_block(&self) -> u64 {
        self.rows * self.cols
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(m,4) * sum_{j=1..4} C(m,j) C(m,4-j)`.
pub fn minimal_stall_multiplicity(m_code: u64) -> BigUint {
    stall_class_count(STALL_WEIGHT, STALL_WEIGHT, m_code).expect("minimal class is valid")
}

/// Number of ways to choose the involved codewords of a `(K, L)`-stall.
pub fn stall_class_count(k: u64, l: u64, m_code: u64) -> Result<BigUint, FloorError> {
    stall_class_count_in(&StallGeometry::square(m_code), k, l)
}

pub fn stall_class_count_in(geom: &StallGeometry, k: u64, l: u64) -> Result<BigUint, FloorError> {
    check_class(k, l)?;
    let sum: BigUint = (1..=k)
        .map(|m| binomial(geom.rows, m) * binomial(geom.next_cols, k - m))
        .sum();
    Ok(binomial(geom.cols, l) * sum)
}

fn check_class(k: u64, l: u64) -> Result<(), FloorError> {
    if k < STALL_WEIGHT || l < STALL_WEIGHT {
        return Err(FloorError::ClassTooSmall {
            k,
            l,
            min: STALL_WEIGHT,
        });
    }
    Ok(())
}

/// Valid pattern sizes `4 max(K,L) ..= K L`.
pub fn size_range(k: u64, l: u64) -> std::ops::RangeInclusive<u64> {
    STALL_WEIGHT * k.max(l)..=k * l
}

/// Over-bound on the number of `(K, L)`-stalls with `size` positions:
/// `A * C(min,4)^max * C(KL - 4 max, size - 4 max)`.
pub fn stall_pattern_count(k: u64, l: u64, size: u64, m_code: u64) -> Result<BigUint, FloorError> {
    stall_pattern_count_in(&StallGeometry::square(m_code), k, l, size)
}

pub fn stall_pattern_count_in(
    geom: &StallGeometry,
    k: u64,
    l: u64,
    size: u64,
) -> Result<BigUint, FloorError> {
    check_class(k, l)?;
    let range = size_range(k, l);
    if !range.contains(&size) {
        return Err(FloorError::SizeOutOfRange {
            k,
            l,
            size,
            lo: *range.start(),
            hi: *range.end(),
        });
    }
    let (lo, hi) = (k.min(l), k.max(l));
    let a = stall_class_count_in(geom, k, l)?;
    let per_line = binomial(lo, STALL_WEIGHT).pow(hi as u32);
    let fill = binomial(k * l - STALL_WEIGHT * hi, size - STALL_WEIGHT * hi);
    Ok(a * per_line * fill)
}

/// Natural log of a positive big integer.
fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// A positive real stored as its natural log, with zero as `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogReal(pub f64);

impl LogReal {
    pub const ZERO: LogReal = LogReal(f64::NEG_INFINITY);

    pub fn from_f64(x: f64) -> LogReal {
        LogReal(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn log10(self) -> f64 {
        self.0 / std::f64::consts::LN_10
    }

    /// Value as `f64`; underflows to zero below the subnormal range.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn sum(items: impl IntoIterator<Item = LogReal>) -> LogReal {
        items.into_iter().fold(LogReal::ZERO, |a, b| a + b)
    }

    /// Mantissa in `[1, 10)` and decimal exponent, for display.
    pub fn scientific(self) -> (f64, i64) {
        if self.0 == f64::NEG_INFINITY {
            return (0.0, 0);
        }
        let l = self.log10();
        let e = l.floor();
        (10f64.powf(l - e), e as i64)
    }
}

impl std::ops::Add for LogReal {
    type Output = LogReal;

    /// Log-sum-exp.
    fn add(self, other: LogReal) -> LogReal {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if lo == f64::NEG_INFINITY {
            return LogReal(hi);
        }
        LogReal(hi + (lo - hi).exp().ln_1p())
    }
}

impl std::fmt::Display for LogReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (m, e) = self.scientific();
        let prec = f.precision().unwrap_or(3);
        write!(f, "{m:.prec$}e{e}")
    }
}

fn check_prob(x: f64) -> Result<(), FloorError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(FloorError::Probability(x))
    }
}

/// Splits a nonnegative finite `f64` into `mantissa * 2^-exp` exactly.
fn dyadic(x: f64) -> (BigUint, u64) {
    if x == 0.0 {
        return (BigUint::zero(), 0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e2) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    // x = mant * 2^e2; callers pass x <= 1 so e2 < 0 unless mant is tiny
    if e2 >= 0 {
        (BigUint::from(mant) << e2 as u64, 0)
    } else {
        (BigUint::from(mant), (-e2) as u64)
    }
}

/// `sum_size (size / bits) * M^size * x^size` evaluated exactly with
/// `x = p + zeta` taken as the rounded `f64` sum.
pub fn class_contribution_exact(
    geom: &StallGeometry,
    k: u64,
    l: u64,
    x: f64,
) -> Result<LogReal, FloorError> {
    check_class(k, l)?;
    check_prob(x)?;
    if x == 0.0 {
        return Ok(LogReal::ZERO);
    }
    let (a, e) = dyadic(x);
    let top = k * l;
    // S = sum size * M * a^size * 2^(e (top - size)); result = S / (bits * 2^(e top))
    let mut s = BigUint::zero();
    for size in size_range(k, l) {
        let m = stall_pattern_count_in(geom, k, l, size)?;
        s += ((m * size) * a.pow(size as u32)) << (e * (top - size));
    }
    if s.is_zero() {
        return Ok(LogReal::ZERO);
    }
    let ln = ln_big(&s)
        - (geom.bits_per_block() as f64).ln()
        - (e * top) as f64 * std::f64::consts::LN_2;
    Ok(LogReal(ln))
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Log-domain evaluation of the same sum, independent of the big-integer
/// path.
pub fn class_contribution_log(
    geom: &StallGeometry,
    k: u64,
    l: u64,
    x: f64,
) -> Result<LogReal, FloorError> {
    check_class(k, l)?;
    check_prob(x)?;
    if x == 0.0 {
        return Ok(LogReal::ZERO);
    }
    let ln_sum = LogReal::sum(
        (1..=k).map(|m| LogReal(ln_binomial(geom.rows, m) + ln_binomial(geom.next_cols, k - m))),
    );
    let ln_a = ln_binomial(geom.cols, l) + ln_sum.0;
    let (lo, hi) = (k.min(l), k.max(l));
    let ln_line = hi as f64 * ln_binomial(lo, STALL_WEIGHT);
    let base = ln_a + ln_line - (geom.bits_per_block() as f64).ln();
    Ok(LogReal::sum(size_range(k, l).map(|size| {
        LogReal(
            base + (size as f64).ln()
                + ln_binomial(k * l - STALL_WEIGHT * hi, size - STALL_WEIGHT * hi)
                + size as f64 * x.ln(),
        )
    })))
}

/// Contribution of the `(K, L)` class on an `m x m` staircase.
pub fn class_contribution(k: u64, l: u64, p: f64, zeta: f64, m_code: u64) -> Result<LogReal, FloorError> {
    check_prob(p)?;
    check_prob(zeta)?;
    if m_code < STALL_WEIGHT {
        return Err(FloorError::DimensionTooSmall(m_code));
    }
    class_contribution_exact(&StallGeometry::square(m_code), k, l, p + zeta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassContribution {
    pub k: u64,
    pub l: u64,
    pub value: LogReal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorEstimate {
    pub p: f64,
    pub zeta: f64,
    pub geometry: StallGeometry,
    pub k_max: u64,
    pub l_max: u64,
    /// One entry per ordered pair, `K` outer, `L` inner.
    pub contributions: Vec<ClassContribution>,
    pub total: LogReal,
    /// Sum over the outermost included classes (`K = k_max` or
    /// `L = l_max`); the omitted remainder is expected to be smaller.
    pub tail: LogReal,
}

impl FloorEstimate {
    pub fn get(&self, k: u64, l: u64) -> Option<LogReal> {
        self.contributions
            .iter()
            .find(|c| c.k == k && c.l == l)
            .map(|c| c.value)
    }
}

/// Sums every class with `4 <= K <= k_max`, `4 <= L <= l_max`.
pub fn total_floor_in(
    geom: &StallGeometry,
    p: f64,
    zeta: f64,
    k_max: u64,
    l_max: u64,
) -> Result<FloorEstimate, FloorError> {
    check_prob(p)?;
    check_prob(zeta)?;
    check_class(k_max, l_max)?;
    let x = p + zeta;
    let mut contributions = Vec::new();
    for k in STALL_WEIGHT..=k_max {
        for l in STALL_WEIGHT..=l_max {
            contributions.push(ClassContribution {
                k,
                l,
                value: class_contribution_exact(geom, k, l, x)?,
            });
        }
    }
    let total = LogReal::sum(contributions.iter().map(|c| c.value));
    let tail = LogReal::sum(
        contributions
            .iter()
            .filter(|c| c.k == k_max || c.l == l_max)
            .map(|c| c.value),
    );
    Ok(FloorEstimate {
        p,
        zeta,
        geometry: *geom,
        k_max,
        l_max,
        contributions,
        total,
        tail,
    })
}

pub fn total_floor(p: f64, zeta: f64, k_max: u64, l_max: u64, m_code: u64) -> Result<FloorEstimate, FloorError> {
    if m_code < STALL_WEIGHT {
        return Err(FloorError::DimensionTooSmall(m_code));
    }
    total_floor_in(&StallGeometry::square(m_code), p, zeta, k_max, l_max)
}

/// Reference operating point and per-class values for the `m = 510`
/// staircase code.
pub mod reference {
    pub const P: f64 = 4.8e-3;
    pub const ZETA: f64 = 5.8e-4;
    pub const M_CODE: u64 = 510;
    pub const TOTAL: f64 = 3.8e-21;
    /// Rectangular-block floor quoted for the 512x510 variant.
    pub const G709_TOTAL: f64 = 4.0e-21;
    pub const CLASSES: [(u64, u64, f64); 8] = [
        (4, 4, 3.55e-21),
        (4, 5, 7.81e-28),
        (5, 5, 2.54e-22),
        (5, 6, 2.21e-28),
        (6, 6, 1.40e-23),
        (6, 7, 1.49e-29),
        (7, 7, 8.53e-25),
        (7, 8, 1.83e-32),
    ];
    /// Stall persistence probabilities for `l = 0, 1, 2` missing positions.
    pub const PERSISTENCE: [f64; 3] = [149.0 / 150.0, 1.0 / 1725.0, 1.0 / (1772.0 * 1772.0)];
}

/// A reference class value compared against both label orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCheck {
    pub k: u64,
    pub l: u64,
    pub reference: f64,
    pub as_labeled: f64,
    pub transposed: f64,
}

impl ClassCheck {
    pub fn rel_err_labeled(&self) -> f64 {
        (self.as_labeled - self.reference).abs() / self.reference
    }

    pub fn rel_err_transposed(&self) -> f64 {
        (self.transposed - self.reference).abs() / self.reference
    }

    /// Smaller of the two relative errors.
    pub fn best_rel_err(&self) -> f64 {
        self.rel_err_labeled().min(self.rel_err_transposed())
    }
}

/// Evaluates every reference class at the reference point. The `(K, L)`
/// labels of off-diagonal classes are ambiguous, so both orientations
/// are reported.
pub fn reference_checks() -> Vec<ClassCheck> {
    let x = reference::P + reference::ZETA;
    let g = StallGeometry::square(reference::M_CODE);
    reference::CLASSES
        .iter()
        .map(|&(k, l, v)| ClassCheck {
            k,
            l,
            reference: v,
            as_labeled: class_contribution_exact(&g, k, l, x).expect("valid").value(),
            transposed: class_contribution_exact(&g, l, k, x).expect("valid").value(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() < rel
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(4, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(510, 4), BigUint::from(2_785_790_085u64));
    }

    #[test]
    fn minimal_multiplicity_small_and_vandermonde() {
        assert_eq!(minimal_stall_multiplicity(4), BigUint::from(69u32));
        let m = 510;
        let sum = binomial(2 * m, 4) - binomial(m, 4);
        assert_eq!(minimal_stall_multiplicity(m), binomial(m, 4) * sum);
        assert_eq!(stall_class_count(4, 4, m).unwrap(), minimal_stall_multiplicity(m));
    }

    #[test]
    fn class_count_is_monotone() {
        for k in 4..10 {
            for l in 4..10 {
                let a = stall_class_count(k, l, 510).unwrap();
                assert!(stall_class_count(k + 1, l, 510).unwrap() > a);
                assert!(stall_class_count(k, l + 1, 510).unwrap() > a);
            }
        }
        assert!(stall_class_count(3, 4, 510).is_err());
    }

    #[test]
    fn class_count_matches_enumeration() {
        // choose L of the m columns and K of the 2m crossing codewords with at
        // least one terminating in block i
        for m_code in 4..=6u64 {
            for k in 4..=6u64 {
                for l in 4..=m_code {
                    let mut count = 0u64;
                    for cross in 0u32..(1 << (2 * m_code)) {
                        if cross.count_ones() as u64 != k || cross & ((1 << m_code) - 1) == 0 {
                            continue;
                        }
                        for cols in 0u32..(1 << m_code) {
                            if cols.count_ones() as u64 == l {
                                count += 1;
                            }
                        }
                    }
                    assert_eq!(
                        stall_class_count(k, l, m_code).unwrap(),
                        BigUint::from(count),
                        "m={m_code} K={k} L={l}"
                    );
                }
            }
        }
    }

    /// Exact count of `k x l` 0/1 grids with every line holding at least
    /// four ones, by total weight.
    fn grid_stalls(k: usize, l: usize) -> Vec<u64> {
        let rows: Vec<u32> = (0u32..1 << l).filter(|r| r.count_ones() >= 4).collect();
        let mut by_weight = vec![0u64; k * l + 1];
        let mut idx = vec![0usize; k];
        loop {
            let mut colsum = vec![0u32; l];
            let mut w = 0;
            for &i in &idx {
                let r = rows[i];
                w += r.count_ones() as usize;
                for (c, s) in colsum.iter_mut().enumerate() {
                    *s += (r >> c) & 1;
                }
            }
            if colsum.iter().all(|&s| s >= 4) {
                by_weight[w] += 1;
            }
            let mut d = 0;
            loop {
                if d == k {
                    return by_weight;
                }
                idx[d] += 1;
                if idx[d] < rows.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    #[test]
    fn pattern_count_overbounds_true_grids() {
        for (k, l) in [(4u64, 4u64), (4, 5), (5, 4), (5, 5), (5, 6), (6, 5)] {
            let exact = grid_stalls(k as usize, l as usize);
            let a = stall_class_count(k, l, 6).unwrap();
            for size in size_range(k, l) {
                let bound = stall_pattern_count(k, l, size, 6).unwrap();
                assert!(bound >= &a * exact[size as usize], "K={k} L={l} size={size}");
            }
            for (w, &n) in exact.iter().enumerate() {
                if n > 0 {
                    assert!(size_range(k, l).contains(&(w as u64)));
                }
            }
        }
    }

    #[test]
    fn pattern_count_boundaries() {
        let m = 510;
        assert_eq!(stall_pattern_count(4, 4, 16, m).unwrap(), minimal_stall_multiplicity(m));
        assert_eq!(stall_pattern_count(4, 5, 20, m).unwrap(), stall_class_count(4, 5, m).unwrap());
        assert!(matches!(
            stall_pattern_count(5, 4, 21, m),
            Err(FloorError::SizeOutOfRange { .. })
        ));
        assert!(stall_pattern_count(4, 4, 15, m).is_err());
    }

    #[test]
    fn exact_and_log_paths_agree() {
        let g = StallGeometry::square(510);
        for k in 4..=12 {
            for l in 4..=12 {
                for x in [5.38e-3, 1e-2, 1e-5, 0.3] {
                    let a = class_contribution_exact(&g, k, l, x).unwrap();
                    let b = class_contribution_log(&g, k, l, x).unwrap();
                    assert!(((a.0 - b.0) / a.0).abs() < 1e-12, "K={k} L={l} x={x}");
                    assert!((a.0 - b.0).abs() < 1e-10 * a.0.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn minimal_class_closed_form() {
        let (p, z) = (4.8e-3, 5.8e-4);
        let c = class_contribution(4, 4, p, z, 510).unwrap();
        let m = minimal_stall_multiplicity(510).to_f64().unwrap();
        let direct = 16.0 / (510.0 * 510.0) * m * (p + z).powi(16);
        assert!(approx(c.value(), direct, 1e-12));
        assert!(approx(c.value(), 3.55e-21, 0.01));
    }

    #[test]
    fn zero_probability_gives_zero() {
        assert_eq!(class_contribution(4, 4, 0.0, 0.0, 510).unwrap(), LogReal::ZERO);
        assert_eq!(class_contribution(4, 4, 0.0, 0.0, 510).unwrap().value(), 0.0);
        assert!(class_contribution(4, 4, 1.5, 0.0, 510).is_err());
    }

    #[test]
    fn contribution_increases_with_p_and_zeta() {
        let base = class_contribution(5, 6, 4.8e-3, 5.8e-4, 510).unwrap();
        assert!(class_contribution(5, 6, 4.9e-3, 5.8e-4, 510).unwrap() > base);
        assert!(class_contribution(5, 6, 4.8e-3, 5.9e-4, 510).unwrap() > base);
    }

    #[test]
    fn total_and_truncation() {
        let (p, z) = (4.8e-3, 5.8e-4);
        let e8 = total_floor(p, z, 8, 8, 510).unwrap();
        assert_eq!(e8.contributions.len(), 25);
        assert!(e8.total >= e8.get(4, 4).unwrap());
        assert!(approx(e8.total.value(), 3.8e-21, 0.05));
        let e16 = total_floor(p, z, 16, 16, 510).unwrap();
        assert!(((e16.total.value() - e8.total.value()) / e8.total.value()).abs() < 0.01);
        assert!(e8.tail < e8.total);
    }

    #[test]
    fn rectangular_variant_is_close_to_square() {
        let g = total_floor_in(&StallGeometry::g709(), 4.8e-3, 5.8e-4, 8, 8).unwrap();
        let s = total_floor(4.8e-3, 5.8e-4, 8, 8, 510).unwrap();
        let ratio = g.total.value() / s.total.value();
        assert!(ratio > 1.0 && ratio < 1.1, "{ratio}");
    }

    #[test]
    fn log_real_arithmetic() {
        let a = LogReal::from_f64(2.0) + LogReal::from_f64(3.0);
        assert!(approx(a.value(), 5.0, 1e-15));
        assert_eq!(LogReal::ZERO + LogReal::ZERO, LogReal::ZERO);
        assert_eq!(format!("{:.2}", LogReal::from_f64(3.55e-21)), "3.55e-21");
        // far below f64 range
        let tiny = LogReal(-2000.0);
        assert_eq!(tiny.value(), 0.0);
        assert!(tiny.log10() < -800.0);
    }

    #[test]
    fn dyadic_split_is_exact() {
        for x in [5.38e-3, 0.5, 1.0, 1e-300] {
            let (m, e) = dyadic(x);
            let back = m.to_f64().unwrap() * 2f64.powi(-(e as i32));
            if e < 1000 {
                assert_eq!(back, x);
            }
        }
    }
}
