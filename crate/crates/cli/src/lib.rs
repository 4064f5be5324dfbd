//! Command-line front end: file coding, simulation sweeps and analysis
//! reports.

pub mod args;
pub mod checks;
pub mod commands;
pub mod fileio;
