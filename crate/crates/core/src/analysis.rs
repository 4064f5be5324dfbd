//! Decoder data-flow estimates, hard-decision capacity, Q-factor conversion
//! and net coding gain.
//!
//! Rates are in bits per second, frequencies in hertz.

use statrs::function::erf::{erfc, erfc_inv};

pub const GBPS: f64 = 1e9;
pub const TBPS: f64 = 1e12;

/// Message-passing decoder parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpcFlowParams {
    /// Information rate.
    pub d: f64,
    /// Code rate.
    pub r: f64,
    pub iterations: f64,
    /// Message width in bits.
    pub q: f64,
    /// Average variable-node degree.
    pub d_av: f64,
}

impl LdpcFlowParams {
    /// 100 Gb/s, rate 239/255, 20 iterations of 4-bit messages, degree 3.
    pub fn preset() -> LdpcFlowParams {
        LdpcFlowParams {
            d: 100.0 * GBPS,
            r: 239.0 / 255.0,
            iterations: 20.0,
            q: 4.0,
            d_av: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpcFlow {
    /// Channel hard decisions, `D/R`.
    pub loading: f64,
    /// Message traffic, `2 N D q d_av / R`; also the dominant-term
    /// approximation.
    pub iterative: f64,
    pub total: f64,
}

pub fn ldpc_dataflow(p: &LdpcFlowParams) -> LdpcFlow {
    let loading = p.d / p.r;
    let iterative = 2.0 * p.iterations * p.d * p.q * p.d_av / p.r;
    LdpcFlow {
        loading,
        iterative,
        total: loading + iterative,
    }
}

/// Syndrome-domain product decoder parameters. Index 1 is the row code,
/// index 2 the column code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductFlowParams {
    pub d: f64,
    pub r: f64,
    /// Decoder clock.
    pub f_c: f64,
    /// Average decodings per component codeword.
    pub v: f64,
    pub n1: u64,
    pub n2: u64,
    pub r1: u64,
    pub r2: u64,
    pub t1: u64,
    pub t2: u64,
}

impl ProductFlowParams {
    /// 100 Gb/s, rate 239/255, 400 MHz clock, `n = 1000`, `r = 32`, `t = 3`,
    /// four decodings per codeword.
    pub fn preset() -> ProductFlowParams {
        ProductFlowParams {
            d: 100.0 * GBPS,
            r: 239.0 / 255.0,
            f_c: 400e6,
            v: 4.0,
            n1: 1000,
            n2: 1000,
            r1: 32,
            r2: 32,
            t1: 3,
            t2: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductFlow {
    pub loading: f64,
    /// Syndrome accumulation, `(r1 + r2) f_c`.
    pub syndromes: f64,
    /// Row decodings: locations out, mask updates of both syndromes.
    pub row_side: f64,
    pub col_side: f64,
    pub total: f64,
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u64 {
    assert!(n > 0);
    (u64::BITS - (n - 1).leading_zeros()) as u64
}

pub fn product_dataflow(p: &ProductFlowParams) -> ProductFlow {
    let loading = p.d / p.r;
    let syndromes = (p.r1 + p.r2) as f64 * p.f_c;
    let (l1, l2) = (ceil_log2(p.n1), ceil_log2(p.n2));
    let row_bits = p.t1 * l1 + p.t1 * l2 + p.r1 + p.t1 * p.r2;
    let col_bits = p.t2 * l1 + p.t2 * l2 + p.r2 + p.t2 * p.r1;
    let row_side = p.d * p.v / (p.r * p.n1 as f64) * row_bits as f64;
    let col_side = p.d * p.v / (p.r * p.n2 as f64) * col_bits as f64;
    ProductFlow {
        loading,
        syndromes,
        row_side,
        col_side,
        total: loading + syndromes + row_side + col_side,
    }
}

/// Table-lookup component decoder traffic, `4 m v D / (n R)`.
pub fn lookup_decoder_dataflow(m: u32, v: f64, d: f64, n: u64, r: f64) -> f64 {
    4.0 * m as f64 * v * d / (n as f64 * r)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

pub fn bsc_capacity(p: f64) -> f64 {
    1.0 - binary_entropy(p)
}

/// Largest crossover probability whose BSC capacity still reaches `rate`,
/// by bisection to a relative tolerance of `1e-12`.
pub fn bsc_capacity_threshold(rate: f64) -> f64 {
    assert!(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 * lo.max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if bsc_capacity(mid) >= rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Q` in dB for a hard-decision error rate, `p = erfc(Q / sqrt 2) / 2`.
pub fn q_from_p(p: f64) -> f64 {
    let q = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    20.0 * q.log10()
}

pub fn p_from_q(q_db: f64) -> f64 {
    let q = 10f64.powf(q_db / 20.0);
    0.5 * erfc(q / std::f64::consts::SQRT_2)
}

/// Net coding gain in dB: the `Q` gain from `p_threshold` to the target
/// output error rate, less the rate penalty.
pub fn net_coding_gain(ber_out_target: f64, p_threshold: f64, rate: f64) -> f64 {
    q_from_p(ber_out_target) - q_from_p(p_threshold) + 10.0 * rate.log10()
}

/// Net coding gain of a capacity-achieving hard-decision code.
pub fn shannon_ncg(ber_out_target: f64, rate: f64) -> f64 {
    net_coding_gain(ber_out_target, bsc_capacity_threshold(rate), rate)
}

/// Quoted coding gains at rate 239/255 (dB) and their stated gap to
/// capacity. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotedGain {
    pub scheme: &'static str,
    pub ncg_db: f64,
    pub gap_db: f64,
    pub ber_out: f64,
}

pub const QUOTED_GAINS: [QuotedGain; 6] = [
    QuotedGain { scheme: "RS(255,239)", ncg_db: 6.2, gap_db: 3.77, ber_out: 1e-15 },
    QuotedGain { scheme: "G.975.1 I.3", ncg_db: 8.99, gap_db: 0.98, ber_out: 1e-15 },
    QuotedGain { scheme: "G.975.1 I.4", ncg_db: 8.67, gap_db: 1.3, ber_out: 1e-15 },
    QuotedGain { scheme: "G.975.1 I.5", ncg_db: 8.5, gap_db: 1.47, ber_out: 1e-15 },
    QuotedGain { scheme: "G.975.1 I.9", ncg_db: 8.67, gap_db: 1.3, ber_out: 2e-14 },
    QuotedGain { scheme: "staircase 512x510", ncg_db: 9.41, gap_db: 0.56, ber_out: 1e-15 },
];
