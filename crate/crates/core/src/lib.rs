//! Bit-accurate functional simulator and energy model of a digital in-SRAM
//! stochastic-computing MatMul engine using the compressed Bent-Pyramid
//! (BP8) number format.
//!
//! The crate is organized bottom up:
//!
//! - [`bp_format`]: BP digits and codes, BP10/BP8 compression, AND-popcount
//!   multiplication, quantization, and code-table derivation.
//! - [`sram_core`]: a 256-column x 128-row subarray with split decoder,
//!   lower-address latch, and bitline AND.
//! - [`accumulator`]: segmented parallel counters, adder tree, and the
//!   two-stage pipeline that turns AND results into binary partial sums.
//! - [`engine`]: tiling, execution, and accuracy evaluation of whole MatMul
//!   jobs over a bank of subarrays.
//! - [`energy_perf`]: per-operation energies and the derived efficiency and
//!   throughput figures, with technology scaling.
//! - [`verify`]: a runnable self-check suite.

pub mod accumulator;
pub mod bp_format;
pub mod energy_perf;
pub mod engine;
mod error;
pub mod matrix;
pub mod sram_core;
pub mod verify;

pub use bp_format::{BPCode, BPCodeTable, BPDigit, Bias, CodeWidth};
pub use engine::{CycleStats, EngineConfig, MatMulJob};
pub use error::{Dimension, Error, Result};
pub use matrix::Matrix;
