//! Monte-Carlo experiments over the binary symmetric channel: BER sweeps,
//! stall persistence and erroneous-flip estimation. Every experiment is
//! reproducible from its seed regardless of the worker count.

pub mod channel;
pub mod config;
pub mod run;
pub mod stall;
pub mod stats;
pub mod zeta;

use thiserror::Error;

pub use config::{CodeChoice, SimConfig, SimResult, StopReason, System};
pub use run::Simulator;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("crossover probability {0} outside the allowed range")]
    Crossover(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
}
