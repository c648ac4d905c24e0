//! Bent-Pyramid (BP) quasi-stochastic number format.
//!
//! A BP digit `k` in `0..=9` stands for the probability `k/10`. Each digit has
//! two complementary 10-bit codes, one per dataset (left- and right-biased),
//! and multiplication of two digits is the popcount of the AND of one code
//! from each dataset. The compressed BP8 form drops the outermost two bits of
//! every 10-bit code from storage; they survive as implicit bits that are
//! folded back in on the accumulation side, so BP8 products are exactly the
//! BP10 products.

mod code;
mod quantize;
mod search;
mod table;

pub use code::{compress_10_to_8, expand_8_to_10, mul_popcount, BPCode, BPDigit, Bias, CodeWidth};
pub use quantize::{quantize_matrix, QuantStrategy, QuantizedMatrix, QuantizedValue};
pub use search::{
    derive_code_table, evaluate_table, thermometer_table, Objective, SearchConfig, TableScore,
};
pub use table::{BPCodeTable, TableMetadata, TableViolation};
