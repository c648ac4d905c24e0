use std::fmt;

use thiserror::Error;

/// Matrix dimension named in capacity errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    M,
    K,
    N,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::M => f.write_str("M"),
            Dimension::K => f.write_str("K"),
            Dimension::N => f.write_str("N"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("digit {0} outside 0..=9")]
    DigitOutOfRange(u32),
    #[error("code width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("popcount {0} exceeds the largest digit (9)")]
    PopcountOverflow(u32),
    #[error("expected a {expected}-bit code, got {got} bits")]
    BadCodeWidth { expected: usize, got: usize },
    #[error("invalid bit string {0:?}")]
    BadBitString(String),
    #[error("unipolar domain violation at ({row}, {col}): {value}")]
    UnipolarViolation { row: usize, col: usize, value: f64 },
    #[error("scale must be finite and positive, got {0}")]
    BadScale(f64),
    #[error("row {row} out of range (subarray has {rows} rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("decoder constraint violated: rows {l_row} and {u_row} are not one L-region row and one U-region row")]
    RegionViolation { l_row: usize, u_row: usize },
    #[error("latch reuse requested for row {requested} but the lower latch holds {held:?}")]
    LatchMismatch {
        requested: usize,
        held: Option<usize>,
    },
    #[error("scheduling constraint violated: L row {l_row} reappears at program entry {index} after its group ended")]
    NonContiguousGroup { l_row: usize, index: usize },
    #[error("segment width {0} does not evenly divide 256")]
    BadSegmentWidth(usize),
    #[error("correction vector has {got} entries, expected {expected}")]
    CorrectionLength { expected: usize, got: usize },
    #[error("correction entry {0} exceeds 2")]
    CorrectionValue(u8),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("job needs {required} subarray tiles but the engine has {available}; limiting dimension {dimension}")]
    Capacity {
        dimension: Dimension,
        required: usize,
        available: usize,
    },
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("unknown technology node {0:?}")]
    UnknownNode(String),
    #[error("code table: {0}")]
    Table(String),
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
