//! Staircase forward error correction.
//!
//! - [`gf`]: binary polynomials and GF(2^m) arithmetic.
//! - [`component`]: the shortened, doubly-extended BCH component code and its
//!   table-driven decoder.
//! - [`staircase`]: block encoder and sliding-window syndrome decoder.
//! - [`product`]: baseline product code with the same component machinery.
//! - [`floor`]: stall-pattern counting and union-bound error-floor estimates.
//! - [`analysis`]: decoder data-flow, BSC capacity, Q-factor and NCG helpers.

pub mod analysis;
pub mod bits;
pub mod component;
pub mod floor;
pub mod gf;
pub mod product;
pub mod staircase;

pub use component::{CodeSpec, ComponentCode, DecodeKind, DecodeOutcome, Syndrome};
pub use gf::{BinPoly, Field, Gf};
