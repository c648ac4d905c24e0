use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A BP digit `k`, representing probability `k/10`. There is no digit for 1.0.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(try_from = "u8", into = "u8")]
pub struct BPDigit(u8);

impl BPDigit {
    pub const MAX: u8 = 9;
    pub const ZERO: BPDigit = BPDigit(0);

    pub fn new(k: u8) -> Result<Self> {
        if k > Self::MAX {
            return Err(Error::DigitOutOfRange(k as u32));
        }
        Ok(Self(k))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn probability(self) -> f64 {
        self.0 as f64 / 10.0
    }

    pub fn all() -> impl Iterator<Item = BPDigit> {
        (0..=Self::MAX).map(BPDigit)
    }
}

impl TryFrom<u8> for BPDigit {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        Self::new(k)
    }
}

impl From<BPDigit> for u8 {
    fn from(d: BPDigit) -> u8 {
        d.0
    }
}

impl fmt::Display for BPDigit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which of the two complementary datasets a code belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bias {
    LeftBiased,
    RightBiased,
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bias::LeftBiased => f.write_str("left"),
            Bias::RightBiased => f.write_str("right"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeWidth {
    W10,
    W8,
}

impl CodeWidth {
    pub fn bits(self) -> usize {
        match self {
            CodeWidth::W10 => 10,
            CodeWidth::W8 => 8,
        }
    }

    pub fn from_bits(bits: usize) -> Result<Self> {
        match bits {
            10 => Ok(CodeWidth::W10),
            8 => Ok(CodeWidth::W8),
            other => Err(Error::Table(format!("unsupported code width {other}"))),
        }
    }

    fn mask(self) -> u16 {
        (1u16 << self.bits()) - 1
    }
}

/// One BP code. Bit index 0 is the leftmost bit and lives in the least
/// significant position of `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BPCode {
    pub bias: Bias,
    pub width: CodeWidth,
    bits: u16,
    /// Only meaningful for [`CodeWidth::W8`].
    pub implicit_left: bool,
    /// Only meaningful for [`CodeWidth::W8`].
    pub implicit_right: bool,
}

impl BPCode {
    /// A 10-bit code from its raw bit mask (bit `i` = column `i` from the left).
    pub fn w10(bias: Bias, bits: u16) -> Self {
        Self {
            bias,
            width: CodeWidth::W10,
            bits: bits & CodeWidth::W10.mask(),
            implicit_left: false,
            implicit_right: false,
        }
    }

    pub fn w8(bias: Bias, bits: u8, implicit_left: bool, implicit_right: bool) -> Self {
        Self {
            bias,
            width: CodeWidth::W8,
            bits: bits as u16,
            implicit_left,
            implicit_right,
        }
    }

    pub fn zero(bias: Bias, width: CodeWidth) -> Self {
        Self {
            bias,
            width,
            bits: 0,
            implicit_left: false,
            implicit_right: false,
        }
    }

    /// Parses a `'0'`/`'1'` string, leftmost character first.
    pub fn parse(bias: Bias, width: CodeWidth, s: &str) -> Result<Self> {
        if s.len() != width.bits() {
            return Err(Error::BadCodeWidth {
                expected: width.bits(),
                got: s.len(),
            });
        }
        let mut bits = 0u16;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::BadBitString(s.to_string())),
            }
        }
        Ok(Self {
            bias,
            width,
            bits,
            implicit_left: false,
            implicit_right: false,
        })
    }

    pub fn with_implicits(mut self, left: bool, right: bool) -> Self {
        self.implicit_left = left;
        self.implicit_right = right;
        self
    }

    /// The stored (physical) bits as a mask; bit `i` is column `i`.
    pub fn raw_bits(&self) -> u16 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn bit_string(&self) -> String {
        (0..self.width.bits())
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect()
    }

    pub fn stored_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Ones including the implicit positions of a BP8 code.
    pub fn total_ones(&self) -> u32 {
        match self.width {
            CodeWidth::W10 => self.stored_ones(),
            CodeWidth::W8 => {
                self.stored_ones() + self.implicit_left as u32 + self.implicit_right as u32
            }
        }
    }

    /// Stored bits and implicit bits compared, bias ignored.
    pub(crate) fn same_pattern(&self, other: &BPCode) -> bool {
        self.width == other.width
            && self.bits == other.bits
            && (self.width == CodeWidth::W10
                || (self.implicit_left == other.implicit_left
                    && self.implicit_right == other.implicit_right))
    }
}

impl fmt::Display for BPCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.width {
            CodeWidth::W10 => f.write_str(&self.bit_string()),
            CodeWidth::W8 => write!(
                f,
                "({}){}({})",
                self.implicit_left as u8,
                self.bit_string(),
                self.implicit_right as u8
            ),
        }
    }
}

/// Drops bit 0 and bit 9 from storage, keeping them as implicit bits.
/// A width-8 input is returned unchanged.
pub fn compress_10_to_8(code: &BPCode) -> BPCode {
    if code.width == CodeWidth::W8 {
        return *code;
    }
    BPCode {
        bias: code.bias,
        width: CodeWidth::W8,
        bits: (code.bits >> 1) & CodeWidth::W8.mask(),
        implicit_left: code.bit(0),
        implicit_right: code.bit(9),
    }
}

/// Inverse of [`compress_10_to_8`]. A width-10 input is returned unchanged.
pub fn expand_8_to_10(code: &BPCode) -> BPCode {
    if code.width == CodeWidth::W10 {
        return *code;
    }
    let bits = (code.bits << 1) | code.implicit_left as u16 | (code.implicit_right as u16) << 9;
    BPCode::w10(code.bias, bits)
}

/// Popcount of the AND of two codes. For BP8 the implicit bit pairs are
/// ANDed and added, which reproduces the BP10 result exactly.
pub fn mul_popcount(a: &BPCode, b: &BPCode) -> Result<u32> {
    if a.width != b.width {
        return Err(Error::WidthMismatch(a.width.bits(), b.width.bits()));
    }
    let stored = (a.bits & b.bits).count_ones();
    Ok(match a.width {
        CodeWidth::W10 => stored,
        CodeWidth::W8 => {
            stored
                + (a.implicit_left && b.implicit_left) as u32
                + (a.implicit_right && b.implicit_right) as u32
        }
    })
}
