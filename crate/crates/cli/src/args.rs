//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "staircase",
    version,
    about = "Staircase FEC: file encode/decode, BSC simulation, error-floor and data-flow analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a file into packed 512x510 staircase blocks.
    Encode(EncodeArgs),
    /// Decode packed blocks back into the original file.
    Decode(DecodeArgs),
    /// Monte-Carlo BER sweep over a binary symmetric channel.
    Simulate(SimulateArgs),
    /// Union-bound error-floor estimate per stall class.
    Floor(FloorArgs),
    /// Minimal-stall injection and persistence measurement.
    Stall(StallArgs),
    /// Estimate the decoder's erroneous-flip probability.
    Zeta(ZetaArgs),
    /// Decoder data-flow calculators.
    Dataflow(DataflowArgs),
    /// Hard-decision capacity threshold, Q conversion and coding gain.
    Capacity(CapacityArgs),
    /// Run every deterministic golden-number check.
    Check(CheckArgs),
}

/// Parses an integer count, accepting forms such as `1e8`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("not a nonnegative integer: {s}"))
    }
}

/// Parses a rate given as `a/b` or a decimal.
pub fn parse_rate(s: &str) -> Result<f64, String> {
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad numerator in {s}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad denominator in {s}"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("not a rate: {s}"))?,
    };
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(format!("rate {s} outside (0, 1)"))
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Decoder window the flush is sized for.
    #[arg(long, default_value_t = 7)]
    pub window: usize,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    #[arg(long, default_value_t = 7)]
    pub max_iters: usize,
    /// Pass the blocks through a BSC with this crossover before decoding.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodeKind {
    /// 512x510 staircase over the (1022, 990) component.
    G709,
    /// Square staircase over a component given by --m, --t, --shorten.
    Square,
    /// Product code over a component given by --m, --t, --shorten.
    Product,
    /// Channel only.
    Uncoded,
}

#[derive(Debug, Args)]
pub struct WorkerArgs {
    /// Worker threads; results do not depend on this.
    #[arg(long, env = "STAIRCASE_WORKERS")]
    pub workers: Option<usize>,
}

impl WorkerArgs {
    pub fn resolve(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = CodeKind::G709)]
    pub code: CodeKind,
    /// Field degree of the component code.
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub shorten: usize,
    /// Use the plain BCH generator without the (x^2 + 1) factor.
    #[arg(long)]
    pub no_extension: bool,
    /// Keep the extension parity but ignore it when decoding.
    #[arg(long)]
    pub no_extension_check: bool,
    /// Uncoded frame size in bits.
    #[arg(long, default_value_t = 244_736)]
    pub frame_bits: usize,
    /// Crossover probabilities.
    #[arg(long, value_delimiter = ',', required_unless_present = "q_db")]
    pub p: Vec<f64>,
    /// Channel Q values in dB, converted to crossover probabilities.
    #[arg(long, value_delimiter = ',', conflicts_with = "p")]
    pub q_db: Vec<f64>,
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    #[arg(long, default_value_t = 7)]
    pub max_iters: usize,
    /// Information bits per point.
    #[arg(long, value_parser = parse_count, default_value = "1e8")]
    pub bits: u64,
    /// Output errors per point.
    #[arg(long, value_parser = parse_count, default_value = "100")]
    pub target_errors: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub workers: WorkerArgs,
    /// Data blocks per independent chunk.
    #[arg(long, default_value_t = 32)]
    pub chunk_blocks: usize,
    /// CSV output path; standard output when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON output path with the configuration echo.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write 0 for elapsed time so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryKind {
    /// Square m x m blocks.
    Square,
    /// 512x510 blocks, an approximation with rectangular counts.
    G709,
}

#[derive(Debug, Args)]
pub struct FloorArgs {
    #[arg(long, default_value_t = 4.8e-3)]
    pub p: f64,
    #[arg(long, default_value_t = 5.8e-4)]
    pub zeta: f64,
    #[arg(long, default_value_t = 8)]
    pub k_max: u64,
    #[arg(long, default_value_t = 8)]
    pub l_max: u64,
    /// Block dimension for square geometry.
    #[arg(long, default_value_t = 510)]
    pub m_code: u64,
    #[arg(long, value_enum, default_value_t = GeometryKind::Square)]
    pub geometry: GeometryKind,
    /// CSV of K, L, contribution.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StallArgs {
    #[arg(long, default_value_t = 4.8e-3)]
    pub p: f64,
    /// Stall positions received correctly, one experiment each.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub missing: Vec<usize>,
    #[arg(long, value_parser = parse_count, default_value = "3000")]
    pub trials: u64,
    /// Blocks decoded ahead of the stall.
    #[arg(long, default_value_t = 4)]
    pub warmup: usize,
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    #[arg(long, default_value_t = 7)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ZetaArgs {
    #[arg(long, default_value_t = 4.8e-3)]
    pub p: f64,
    #[arg(long, default_value_t = 32)]
    pub blocks: usize,
    #[arg(long, default_value_t = 4)]
    pub chunks: u64,
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    #[arg(long, default_value_t = 7)]
    pub max_iters: usize,
    #[arg(long)]
    pub no_extension_check: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 100 Gb/s at rate 239/255 with the standard decoder parameters.
    Reference,
}

#[derive(Debug, Args)]
pub struct DataflowArgs {
    #[command(subcommand)]
    pub which: DataflowKind,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum DataflowKind {
    /// Message-passing decoder.
    Ldpc {
        #[arg(long, value_enum, default_value_t = Preset::Reference)]
        preset: Preset,
        /// Information rate in Gb/s.
        #[arg(long)]
        d_gbps: Option<f64>,
        #[arg(long, value_parser = parse_rate)]
        rate: Option<f64>,
        #[arg(long)]
        iterations: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        d_av: Option<f64>,
    },
    /// Syndrome-domain product decoder.
    Product {
        #[arg(long, value_enum, default_value_t = Preset::Reference)]
        preset: Preset,
        #[arg(long)]
        d_gbps: Option<f64>,
        #[arg(long, value_parser = parse_rate)]
        rate: Option<f64>,
        /// Decoder clock in MHz.
        #[arg(long)]
        f_mhz: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long)]
        t: Option<u64>,
    },
    /// Table-lookup component decoder.
    Lookup {
        #[arg(long, value_enum, default_value_t = Preset::Reference)]
        preset: Preset,
        #[arg(long, default_value_t = 10)]
        m: u32,
        #[arg(long, default_value_t = 4.0)]
        v: f64,
        #[arg(long, default_value_t = 100.0)]
        d_gbps: f64,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, value_parser = parse_rate, default_value = "239/255")]
        rate: f64,
    },
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long, value_parser = parse_rate, default_value = "239/255")]
    pub rate: f64,
    /// Output error rate for the coding-gain figure.
    #[arg(long, default_value_t = 1e-15)]
    pub ber_out: f64,
    /// Crossover probability at which the code reaches `ber_out`, for its
    /// coding gain.
    #[arg(long)]
    pub p_threshold: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub json: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_rates() {
        assert_eq!(parse_count("1e8"), Ok(100_000_000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
        assert!((parse_rate("239/255").unwrap() - 239.0 / 255.0).abs() < 1e-15);
        assert_eq!(parse_rate("0.5"), Ok(0.5));
        assert!(parse_rate("2").is_err());
    }

    #[test]
    fn grammar_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
