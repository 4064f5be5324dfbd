//! Simulation configuration and per-point results.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use staircase_core::component::{CodeSpec, ComponentCode};
use staircase_core::product::ProductParams;
use staircase_core::staircase::StaircaseParams;

use crate::SimError;

/// System under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeChoice {
    /// 512x510 staircase over the (1022, 990) component code.
    G709,
    /// Square staircase; the component length must be even.
    Square {
        m: u32,
        t: usize,
        extended: bool,
        shorten: usize,
    },
    /// Product code with the same component on rows and columns.
    Product {
        m: u32,
        t: usize,
        extended: bool,
        shorten: usize,
    },
    /// Channel only, in frames of `frame_bits` bits.
    Uncoded { frame_bits: usize },
}

impl CodeChoice {
    /// Product code over the (1022, 990) component.
    pub fn g709_product() -> CodeChoice {
        CodeChoice::Product {
            m: 10,
            t: 3,
            extended: true,
            shorten: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: CodeChoice,
    /// Crossover probabilities, one sweep point each.
    pub points: Vec<f64>,
    pub window: usize,
    pub max_iters: usize,
    /// Information bits per point before stopping.
    pub bits_budget: u64,
    /// Output bit errors per point before stopping.
    pub target_errors: u64,
    pub base_seed: u64,
    pub workers: usize,
    /// Data blocks (or frames) per independent chunk.
    pub chunk_blocks: usize,
    pub extension_check: bool,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig {
            code: CodeChoice::G709,
            points: vec![4.8e-3],
            window: 7,
            max_iters: 7,
            bits_budget: 100_000_000,
            target_errors: 100,
            base_seed: 1,
            workers: 1,
            chunk_blocks: 32,
            extension_check: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.points.is_empty() {
            return Err(SimError::Config("no sweep points".into()));
        }
        if let Some(&p) = self.points.iter().find(|&&p| !(p > 0.0 && p < 0.5)) {
            return Err(SimError::Crossover(p));
        }
        if self.bits_budget == 0 || self.target_errors == 0 {
            return Err(SimError::Config("budgets must be positive".into()));
        }
        if self.workers == 0 || self.chunk_blocks == 0 {
            return Err(SimError::Config("workers and chunk size must be positive".into()));
        }
        if self.window == 0 || self.max_iters == 0 {
            return Err(SimError::Config("window and iteration cap must be positive".into()));
        }
        if let CodeChoice::Uncoded { frame_bits: 0 } = self.code {
            return Err(SimError::Config("frame size must be positive".into()));
        }
        Ok(())
    }
}

/// Code objects built from a configuration.
#[derive(Debug, Clone)]
pub enum System {
    Staircase(StaircaseParams),
    Product(ProductParams),
    Uncoded(usize),
}

impl System {
    pub fn build(cfg: &SimConfig) -> Result<System, SimError> {
        let component = |spec: &CodeSpec| -> Result<Arc<ComponentCode>, SimError> {
            let code = ComponentCode::new(spec).map_err(|e| SimError::Config(e.to_string()))?;
            Ok(Arc::new(code.with_extension_check(cfg.extension_check)))
        };
        Ok(match &cfg.code {
            CodeChoice::G709 => {
                let code = component(&CodeSpec::g709())?;
                System::Staircase(
                    StaircaseParams::new(code, 510, 2, cfg.window, cfg.max_iters)
                        .map_err(|e| SimError::Config(e.to_string()))?,
                )
            }
            &CodeChoice::Square {
                m,
                t,
                extended,
                shorten,
            } => {
                let code = component(&CodeSpec::toy(m, t, extended, shorten))?;
                if code.n() % 2 != 0 {
                    return Err(SimError::Config(format!(
                        "component length {} is odd",
                        code.n()
                    )));
                }
                System::Staircase(
                    StaircaseParams::square(code, cfg.window, cfg.max_iters)
                        .map_err(|e| SimError::Config(e.to_string()))?,
                )
            }
            &CodeChoice::Product {
                m,
                t,
                extended,
                shorten,
            } => {
                let code = component(&CodeSpec::toy(m, t, extended, shorten))?;
                System::Product(
                    ProductParams::square(code, cfg.max_iters)
                        .map_err(|e| SimError::Config(e.to_string()))?,
                )
            }
            &CodeChoice::Uncoded { frame_bits } => System::Uncoded(frame_bits),
        })
    }

    /// Information bits carried by one data block or frame.
    pub fn payload_bits(&self) -> usize {
        match self {
            System::Staircase(p) => p.info_bits_per_block(),
            System::Product(p) => p.info_bits(),
            System::Uncoded(n) => *n,
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            System::Staircase(p) => {
                let r = p.rate();
                *r.numer() as f64 / *r.denom() as f64
            }
            System::Product(p) => {
                let r = p.rate();
                *r.numer() as f64 / *r.denom() as f64
            }
            System::Uncoded(_) => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    BitsBudget,
    TargetErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub p: f64,
    pub q_db: f64,
    /// Information bits simulated.
    pub bits: u64,
    /// Data blocks or frames.
    pub frames: u64,
    pub chunks: u64,
    /// Channel flips over every transmitted bit, flush blocks included.
    pub bit_errors_in: u64,
    pub bit_errors_out: u64,
    /// Frames with at least one output error.
    pub frame_errors: u64,
    /// Decoder runs that ended with undecodable syndromes left.
    pub stalls: u64,
    pub decode_failures: u64,
    pub vetoed: u64,
    /// Corrections discarded for touching padding or emitted bits.
    pub rejected: u64,
    pub corrections: u64,
    pub ber_out: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_method: String,
    pub stop_reason: StopReason,
    pub elapsed_s: f64,
}
