//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use staircase_core::analysis::{
    bsc_capacity_threshold, ldpc_dataflow, lookup_decoder_dataflow, net_coding_gain, p_from_q,
    product_dataflow, q_from_p, shannon_ncg, LdpcFlowParams, ProductFlowParams, GBPS,
    QUOTED_GAINS,
};
use staircase_core::component::ComponentCode;
use staircase_core::floor::{reference, reference_checks, total_floor_in, StallGeometry};
use staircase_core::staircase::StaircaseParams;
use staircase_sim::stall::{persistence_probability, PersistenceConfig};
use staircase_sim::zeta::{estimate_zeta, ZetaConfig};
use staircase_sim::{CodeChoice, SimConfig, SimResult, Simulator};

use crate::args::*;
use crate::checks::golden_checks;
use crate::fileio::{decode_bytes, encode_bytes};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Simulate(a) => simulate(a),
        Command::Floor(a) => floor(a),
        Command::Stall(a) => stall(a),
        Command::Zeta(a) => zeta(a),
        Command::Dataflow(a) => dataflow(a),
        Command::Capacity(a) => capacity(a),
        Command::Check(a) => check(a),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn g709_params(window: usize, max_iters: usize) -> Result<StaircaseParams> {
    Ok(StaircaseParams::g709()
        .with_window(window)?
        .with_max_iters(max_iters)?)
}

fn encode(a: EncodeArgs) -> Result<i32> {
    let params = g709_params(a.window, 1)?;
    let payload = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let coded = encode_bytes(&params, &payload)?;
    fs::write(&a.output, &coded).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!(
        "encoded {} bytes into {} bytes ({} blocks)",
        payload.len(),
        coded.len(),
        coded.len() / crate::fileio::block_bytes(&params)
    );
    Ok(EXIT_OK)
}

fn decode(a: DecodeArgs) -> Result<i32> {
    let params = g709_params(a.window, a.max_iters)?;
    let coded = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let (payload, flips) = decode_bytes(&params, &coded, a.p, a.seed)?;
    fs::write(&a.output, &payload).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!("decoded {} bytes; channel flips {flips}", payload.len());
    Ok(EXIT_OK)
}

/// One CSV row per sweep point.
#[derive(Debug, Serialize)]
struct CsvRow {
    p: f64,
    q_db: f64,
    bits: u64,
    errors_out: u64,
    ber_out: f64,
    ci_low: f64,
    ci_high: f64,
    stalls: u64,
    elapsed_s: f64,
}

impl From<&SimResult> for CsvRow {
    fn from(r: &SimResult) -> CsvRow {
        CsvRow {
            p: r.p,
            q_db: r.q_db,
            bits: r.bits,
            errors_out: r.bit_errors_out,
            ber_out: r.ber_out,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            stalls: r.stalls,
            elapsed_s: r.elapsed_s,
        }
    }
}

#[derive(Debug, Serialize)]
struct SimReport<'a> {
    config: &'a SimConfig,
    rate: f64,
    results: &'a [SimResult],
}

pub fn sim_config(a: &SimulateArgs) -> SimConfig {
    let code = match a.code {
        CodeKind::G709 => CodeChoice::G709,
        CodeKind::Square => CodeChoice::Square {
            m: a.m,
            t: a.t,
            extended: !a.no_extension,
            shorten: a.shorten,
        },
        CodeKind::Product => CodeChoice::Product {
            m: a.m,
            t: a.t,
            extended: !a.no_extension,
            shorten: a.shorten,
        },
        CodeKind::Uncoded => CodeChoice::Uncoded {
            frame_bits: a.frame_bits,
        },
    };
    let points = if a.p.is_empty() {
        a.q_db.iter().map(|&q| p_from_q(q)).collect()
    } else {
        a.p.clone()
    };
    SimConfig {
        code,
        points,
        window: a.window,
        max_iters: a.max_iters,
        bits_budget: a.bits,
        target_errors: a.target_errors,
        base_seed: a.seed,
        workers: a.workers.resolve(),
        chunk_blocks: a.chunk_blocks,
        extension_check: !a.no_extension_check,
    }
}

fn simulate(a: SimulateArgs) -> Result<i32> {
    let cfg = sim_config(&a);
    let sim = Simulator::new(cfg.clone())?;
    let sink: Box<dyn Write> = match &a.csv {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(io::stdout()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    let mut failed = None;
    let results = sim.run_sweep_with(|r| {
        let mut row = CsvRow::from(r);
        if a.no_timing {
            row.elapsed_s = 0.0;
        }
        if failed.is_none() {
            failed = csv.serialize(&row).and_then(|_| Ok(csv.flush()?)).err();
        }
        eprintln!(
            "p={:.4e} Q={:.3} dB bits={} errors={} ber={:.3e} stalls={}",
            r.p, r.q_db, r.bits, r.bit_errors_out, r.ber_out, r.stalls
        );
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    if let Some(path) = &a.json {
        let mut results = results;
        if a.no_timing {
            results.iter_mut().for_each(|r| r.elapsed_s = 0.0);
        }
        let report = SimReport {
            config: &cfg,
            rate: sim.system().rate(),
            results: &results,
        };
        write_json(path, &report)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct FloorRow {
    k: u64,
    l: u64,
    contribution: f64,
}

#[derive(Debug, Serialize)]
struct FloorSummary {
    p: f64,
    zeta: f64,
    geometry: &'static str,
    approximation: bool,
    rows: u64,
    cols: u64,
    k_max: u64,
    l_max: u64,
    total: f64,
    tail: f64,
    reference_total: f64,
    classes: Vec<FloorRow>,
}

fn floor(a: FloorArgs) -> Result<i32> {
    let (geom, name, approx, reference_total) = match a.geometry {
        GeometryKind::Square => (
            StallGeometry::square(a.m_code),
            "square",
            false,
            reference::TOTAL,
        ),
        GeometryKind::G709 => (StallGeometry::g709(), "g709", true, reference::G709_TOTAL),
    };
    let est = total_floor_in(&geom, a.p, a.zeta, a.k_max, a.l_max)?;
    let classes: Vec<FloorRow> = est
        .contributions
        .iter()
        .map(|c| FloorRow {
            k: c.k,
            l: c.l,
            contribution: c.value.value(),
        })
        .collect();
    let at_reference = a.p == reference::P && a.zeta == reference::ZETA;
    println!(
        "p = {:e}, zeta = {:e}, geometry {name} ({}x{}){}",
        a.p,
        a.zeta,
        geom.rows,
        geom.cols,
        if approx { ", rectangular approximation" } else { "" }
    );
    println!("{:>3} {:>3} {:>12} {:>12}", "K", "L", "contribution", "reference");
    for c in &est.contributions {
        let reference = reference_checks()
            .into_iter()
            .find(|r| {
                let labeled = r.rel_err_labeled() <= r.rel_err_transposed();
                if labeled { (r.k, r.l) == (c.k, c.l) } else { (r.l, r.k) == (c.k, c.l) }
            })
            .filter(|_| at_reference && !approx)
            .map_or(String::new(), |r| format!("{:.2e}", r.reference));
        println!("{:>3} {:>3} {:>12} {:>12}", c.k, c.l, c.value, reference);
    }
    println!("total {} (tail {})", est.total, est.tail);
    if at_reference {
        println!("reference total {reference_total:.1e}");
    }
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["K", "L", "contribution"])?;
        for c in &classes {
            w.write_record([c.k.to_string(), c.l.to_string(), format!("{:e}", c.contribution)])?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.json {
        let summary = FloorSummary {
            p: a.p,
            zeta: a.zeta,
            geometry: name,
            approximation: approx,
            rows: geom.rows,
            cols: geom.cols,
            k_max: a.k_max,
            l_max: a.l_max,
            total: est.total.value(),
            tail: est.tail.value(),
            reference_total,
            classes,
        };
        write_json(path, &summary)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct StallRow {
    missing: usize,
    trials: u64,
    occurred: u64,
    persisted: u64,
    occurred_rate: f64,
    persisted_rate: f64,
    occurred_ci: (f64, f64),
    persisted_ci: (f64, f64),
    reference: Option<f64>,
    ci_method: String,
}

fn stall(a: StallArgs) -> Result<i32> {
    let params = g709_params(a.window, a.max_iters)?;
    let workers = a.workers.resolve();
    let mut rows = Vec::new();
    for &missing in &a.missing {
        let cfg = PersistenceConfig {
            p: a.p,
            missing,
            trials: a.trials,
            warmup: a.warmup,
            base_seed: a.seed,
            workers,
        };
        let r = persistence_probability(&params, &cfg)?;
        let reference = reference::PERSISTENCE.get(missing).copied();
        println!(
            "missing {missing}: persisted {}/{} = {:.4e} [{:.3e}, {:.3e}], occurred {}/{} = {:.4e} [{:.3e}, {:.3e}]{}",
            r.persisted,
            r.trials,
            r.persisted_rate(),
            r.persisted_ci.0,
            r.persisted_ci.1,
            r.occurred,
            r.trials,
            r.occurred_rate(),
            r.occurred_ci.0,
            r.occurred_ci.1,
            reference.map_or(String::new(), |v| format!(", reference {v:.4e}")),
        );
        rows.push(StallRow {
            missing,
            trials: r.trials,
            occurred: r.occurred,
            persisted: r.persisted,
            occurred_rate: r.occurred_rate(),
            persisted_rate: r.persisted_rate(),
            occurred_ci: r.occurred_ci,
            persisted_ci: r.persisted_ci,
            reference,
            ci_method: r.ci_method,
        });
    }
    if let Some(path) = &a.json {
        write_json(path, &rows)?;
    }
    Ok(EXIT_OK)
}

fn zeta(a: ZetaArgs) -> Result<i32> {
    let code = ComponentCode::g709().with_extension_check(!a.no_extension_check);
    let params = g709_params(a.window, a.max_iters)?.with_code(Arc::new(code))?;
    let cfg = ZetaConfig {
        p: a.p,
        blocks_per_chunk: a.blocks,
        chunks: a.chunks,
        base_seed: a.seed,
        workers: a.workers.resolve(),
    };
    let z = estimate_zeta(&params, &cfg)?;
    println!(
        "zeta = {:.4e} [{:.3e}, {:.3e}] from {} wrong flips over {} positions ({} right flips); {}",
        z.zeta, z.ci_low, z.ci_high, z.wrong_flips, z.positions, z.right_flips, z.definition
    );
    if let Some(path) = &a.json {
        write_json(path, &z)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Term {
    name: &'static str,
    bits_per_s: f64,
}

fn dataflow(a: DataflowArgs) -> Result<i32> {
    let (kind, terms, total) = match a.which {
        DataflowKind::Ldpc {
            preset: Preset::Reference,
            d_gbps,
            rate,
            iterations,
            q,
            d_av,
        } => {
            let mut p = LdpcFlowParams::preset();
            p.d = d_gbps.map_or(p.d, |d| d * GBPS);
            p.r = rate.unwrap_or(p.r);
            p.iterations = iterations.unwrap_or(p.iterations);
            p.q = q.unwrap_or(p.q);
            p.d_av = d_av.unwrap_or(p.d_av);
            let f = ldpc_dataflow(&p);
            let terms = vec![
                Term { name: "loading", bits_per_s: f.loading },
                Term { name: "iterative", bits_per_s: f.iterative },
            ];
            ("ldpc", terms, f.total)
        }
        DataflowKind::Product {
            preset: Preset::Reference,
            d_gbps,
            rate,
            f_mhz,
            v,
            n,
            r,
            t,
        } => {
            let mut p = ProductFlowParams::preset();
            p.d = d_gbps.map_or(p.d, |d| d * GBPS);
            p.r = rate.unwrap_or(p.r);
            p.f_c = f_mhz.map_or(p.f_c, |f| f * 1e6);
            p.v = v.unwrap_or(p.v);
            if let Some(n) = n {
                (p.n1, p.n2) = (n, n);
            }
            if let Some(r) = r {
                (p.r1, p.r2) = (r, r);
            }
            if let Some(t) = t {
                (p.t1, p.t2) = (t, t);
            }
            let f = product_dataflow(&p);
            let terms = vec![
                Term { name: "loading", bits_per_s: f.loading },
                Term { name: "syndromes", bits_per_s: f.syndromes },
                Term { name: "row_side", bits_per_s: f.row_side },
                Term { name: "col_side", bits_per_s: f.col_side },
            ];
            ("product", terms, f.total)
        }
        DataflowKind::Lookup {
            preset: Preset::Reference,
            m,
            v,
            d_gbps,
            n,
            rate,
        } => {
            let total = lookup_decoder_dataflow(m, v, d_gbps * GBPS, n, rate);
            let terms = vec![Term { name: "lookup", bits_per_s: total }];
            ("lookup", terms, total)
        }
    };
    if a.json {
        #[derive(Serialize)]
        struct Report<'a> {
            decoder: &'a str,
            terms: &'a [Term],
            total_bits_per_s: f64,
        }
        print_json(&Report {
            decoder: kind,
            terms: &terms,
            total_bits_per_s: total,
        })?;
    } else {
        for t in &terms {
            println!("{:<10} {:>12.3} Gb/s", t.name, t.bits_per_s / GBPS);
        }
        println!("{:<10} {:>12.3} Gb/s", "total", total / GBPS);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CapacityReport {
    rate: f64,
    ber_out: f64,
    p_star: f64,
    q_star_db: f64,
    q_out_db: f64,
    shannon_ncg_db: f64,
    code_ncg_db: Option<f64>,
}

fn capacity(a: CapacityArgs) -> Result<i32> {
    let p_star = bsc_capacity_threshold(a.rate);
    let report = CapacityReport {
        rate: a.rate,
        ber_out: a.ber_out,
        p_star,
        q_star_db: q_from_p(p_star),
        q_out_db: q_from_p(a.ber_out),
        shannon_ncg_db: shannon_ncg(a.ber_out, a.rate),
        code_ncg_db: a.p_threshold.map(|p| net_coding_gain(a.ber_out, p, a.rate)),
    };
    if a.json {
        print_json(&report)?;
        return Ok(EXIT_OK);
    }
    println!("rate {:.6}", report.rate);
    println!("capacity threshold p* = {:.6e} (Q = {:.4} dB)", p_star, report.q_star_db);
    println!("Q at output {:e} = {:.4} dB", a.ber_out, report.q_out_db);
    println!("capacity NCG {:.4} dB", report.shannon_ncg_db);
    if let Some(ncg) = report.code_ncg_db {
        println!(
            "code NCG {ncg:.4} dB, gap {:.4} dB",
            report.shannon_ncg_db - ncg
        );
    }
    if (a.rate - 239.0 / 255.0).abs() < 1e-12 {
        for g in QUOTED_GAINS.iter().filter(|g| g.ber_out == a.ber_out) {
            println!(
                "  {:<20} NCG {:.2} dB, gap {:.2} dB",
                g.scheme,
                g.ncg_db,
                report.shannon_ncg_db - g.ncg_db
            );
        }
    }
    Ok(EXIT_OK)
}

fn check(a: CheckArgs) -> Result<i32> {
    let lines = golden_checks();
    let passed = lines.iter().all(|l| l.passed);
    if a.json {
        #[derive(Serialize)]
        struct Line<'a> {
            name: &'a str,
            passed: bool,
            detail: &'a str,
        }
        let v: Vec<Line> = lines
            .iter()
            .map(|l| Line {
                name: &l.name,
                passed: l.passed,
                detail: &l.detail,
            })
            .collect();
        print_json(&v)?;
    } else {
        for l in &lines {
            println!("{l}");
        }
        let n_fail = lines.iter().filter(|l| !l.passed).count();
        println!("{} checks, {} failed", lines.len(), n_fail);
    }
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
