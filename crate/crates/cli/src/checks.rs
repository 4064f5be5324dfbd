//! Deterministic golden-number checks.

use num_rational::Ratio;
use staircase_core::analysis::{
    ldpc_dataflow, lookup_decoder_dataflow, product_dataflow, shannon_ncg, LdpcFlowParams,
    ProductFlowParams, GBPS, TBPS,
};
use staircase_core::component::{g709_generator_factors, ComponentCode};
use staircase_core::floor::{reference, reference_checks, total_floor};
use staircase_core::gf::Field;
use staircase_core::staircase::{related_product_rate, staircase_rate, StaircaseParams};

/// Relative tolerance on each reference stall class.
pub const CLASS_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckLine {
        CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Stall-class contributions and the total floor at the reference point.
pub fn floor_checks() -> Vec<CheckLine> {
    let mut out = Vec::new();
    for c in reference_checks() {
        let ok = c.best_rel_err() <= CLASS_TOLERANCE;
        out.push(CheckLine::new(
            format!("floor class ({},{})", c.k, c.l),
            ok,
            format!(
                "reference {:.3e}; computed {:.4e} as labeled ({:.2}%), {:.4e} transposed ({:.2}%)",
                c.reference,
                c.as_labeled,
                100.0 * c.rel_err_labeled(),
                c.transposed,
                100.0 * c.rel_err_transposed()
            ),
        ));
    }
    let est = total_floor(reference::P, reference::ZETA, 8, 8, reference::M_CODE).expect("valid");
    let total = est.total.value();
    // the reference total is quoted as 3.8e-21
    let ok = (total / 1e-21 * 10.0).round() / 10.0 == 3.8;
    out.push(CheckLine::new(
        "floor total K,L<=8",
        ok,
        format!("{total:.4e} against {:.1e}", reference::TOTAL),
    ));
    out
}

pub fn dataflow_checks() -> Vec<CheckLine> {
    let p = product_dataflow(&ProductFlowParams::preset());
    let l = ldpc_dataflow(&LdpcFlowParams::preset());
    let lp = LdpcFlowParams::preset();
    let dr = lp.d / lp.r;
    let lookup = lookup_decoder_dataflow(10, 4.0, 100.0 * GBPS, 1000, 239.0 / 255.0);
    vec![
        CheckLine::new(
            "product data-flow",
            rel(p.total, 293.0 * GBPS) <= 0.01,
            format!("{:.3} Gb/s against 293 Gb/s +-1%", p.total / GBPS),
        ),
        CheckLine::new(
            "LDPC data-flow",
            l.total >= 48.0 * TBPS && rel(l.total, 480.0 * dr) <= 0.01,
            format!(
                "{:.3} Tb/s = {:.1} D/R against >= 48 Tb/s and 480 D/R +-1%",
                l.total / TBPS,
                l.total / dr
            ),
        ),
        CheckLine::new(
            "lookup data-flow",
            rel(lookup, 17.1 * GBPS) <= 0.005,
            format!("{:.3} Gb/s against 17.1 Gb/s +-0.5%", lookup / GBPS),
        ),
        CheckLine::new(
            "LDPC / product ratio",
            l.total / p.total > 100.0,
            format!("{:.1} against > 100", l.total / p.total),
        ),
    ]
}

pub fn ncg_checks() -> Vec<CheckLine> {
    let ncg = shannon_ncg(1e-15, 239.0 / 255.0);
    vec![CheckLine::new(
        "capacity NCG at 1e-15",
        (ncg - 9.97).abs() <= 0.05,
        format!("{ncg:.4} dB against 9.41 + 0.56 = 9.97 dB +-0.05"),
    )]
}

pub fn framing_checks() -> Vec<CheckLine> {
    let p = StaircaseParams::g709();
    let (m, r) = (510u64, 32u64);
    let diff = related_product_rate(m, r) - staircase_rate(m, r);
    vec![
        CheckLine::new(
            "staircase rate",
            p.rate() == Ratio::new(239, 255),
            format!("{} against 239/255", p.rate()),
        ),
        CheckLine::new(
            "payload per block",
            p.info_bits_per_block() == 244_736 && p.info_bits_per_block() == 2 * 122_368,
            format!("{} bits against 2 x 122368", p.info_bits_per_block()),
        ),
        CheckLine::new(
            "component length",
            p.code().n() == 1022 && p.rows() + p.cols() == 1022,
            format!("{} = {} + {}", p.code().n(), p.cols(), p.rows()),
        ),
        CheckLine::new(
            "product minus staircase rate",
            diff == Ratio::new(r * r, 4 * m * m),
            format!("{diff} against r^2/4m^2 = {}", Ratio::new(r * r, 4 * m * m)),
        ),
    ]
}

pub fn component_checks() -> Vec<CheckLine> {
    let code = ComponentCode::g709();
    let field = Field::gf1024();
    let factors = g709_generator_factors();
    let product = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.mul(f));
    let minimal = [1usize, 3, 5]
        .iter()
        .all(|&e| factors.contains(&field.minimal_polynomial(e)));
    vec![
        CheckLine::new(
            "component generator",
            &product == code.generator() && minimal,
            format!("degree {}, factors are minimal polynomials of alpha^1,3,5", code.r()),
        ),
        CheckLine::new(
            "component dimensions",
            (code.n(), code.k(), code.r()) == (1022, 990, 32),
            format!("({}, {}), r = {}", code.n(), code.k(), code.r()),
        ),
    ]
}

/// Every deterministic check, in report order.
pub fn golden_checks() -> Vec<CheckLine> {
    let mut v = floor_checks();
    v.extend(dataflow_checks());
    v.extend(ncg_checks());
    v.extend(framing_checks());
    v.extend(component_checks());
    v
}
