use serde::{Deserialize, Serialize};

use super::code::BPDigit;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Largest representable probability.
const CEILING: f64 = 0.9;

/// A digit together with the scale it is relative to: value = digit/10 * scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedValue {
    pub digit: BPDigit,
    pub scale: f64,
}

impl QuantizedValue {
    pub fn value(&self) -> f64 {
        self.digit.probability() * self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuantStrategy {
    /// Scale so the largest entry lands on digit 9.
    MaxAbs,
    /// Caller-chosen scale; entries above `0.9 * scale` saturate at digit 9.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    pub digits: Matrix<BPDigit>,
    pub scale: f64,
}

impl QuantizedMatrix {
    pub fn dequantize(&self) -> Matrix<f64> {
        self.digits.map(|d| d.probability() * self.scale)
    }
}

/// Round-to-nearest onto the 0.1 grid of a unipolar scale.
pub fn quantize_matrix(m: &Matrix<f64>, strategy: QuantStrategy) -> Result<QuantizedMatrix> {
    for (row, col, &value) in m.indexed() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::UnipolarViolation { row, col, value });
        }
    }
    let scale = match strategy {
        QuantStrategy::Fixed(s) => {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::BadScale(s));
            }
            s
        }
        QuantStrategy::MaxAbs => {
            let max = m.iter().copied().fold(0.0, f64::max);
            if max == 0.0 {
                1.0
            } else {
                max / CEILING
            }
        }
    };
    let digits = m.map(|&v| {
        let k = (v / scale * 10.0).round().min(BPDigit::MAX as f64);
        BPDigit::new(k as u8).expect("clamped to 0..=9")
    });
    Ok(QuantizedMatrix { digits, scale })
}
