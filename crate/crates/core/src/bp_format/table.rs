use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::code::{
    compress_10_to_8, expand_8_to_10, mul_popcount, BPCode, BPDigit, Bias, CodeWidth,
};
use crate::error::{Error, Result};

const DEFAULT_BP10: &str = include_str!("../../data/default_bp10.toml");

/// Free-form provenance plus the search outcome, when the table came from
/// [`derive_code_table`](super::derive_code_table).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TableMetadata {
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_abs_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_error: Option<f64>,
}

/// A broken table invariant, naming the offending entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableViolation {
    Popcount { bias: Bias, digit: u8, ones: u32 },
    Duplicate { bias: Bias, digit: u8, other: u8 },
    WrongBias { bias: Bias, digit: u8 },
    WrongWidth { bias: Bias, digit: u8 },
    ImplicitOnWide { bias: Bias, digit: u8 },
}

impl fmt::Display for TableViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableViolation::Popcount { bias, digit, ones } => {
                write!(
                    f,
                    "{bias} digit {digit}: code has {ones} ones, expected {digit}"
                )
            }
            TableViolation::Duplicate { bias, digit, other } => {
                write!(f, "{bias} digit {digit}: code duplicates digit {other}")
            }
            TableViolation::WrongBias { bias, digit } => {
                write!(
                    f,
                    "{bias} digit {digit}: code is tagged with the other dataset"
                )
            }
            TableViolation::WrongWidth { bias, digit } => {
                write!(
                    f,
                    "{bias} digit {digit}: code width differs from the table width"
                )
            }
            TableViolation::ImplicitOnWide { bias, digit } => {
                write!(
                    f,
                    "{bias} digit {digit}: implicit bits set on a 10-bit code"
                )
            }
        }
    }
}

/// The two complementary datasets, one code per digit each.
///
/// Tables are immutable once built; share them by reference or `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct BPCodeTable {
    width: CodeWidth,
    left: [BPCode; 10],
    right: [BPCode; 10],
    pub metadata: TableMetadata,
}

impl BPCodeTable {
    /// Builds a table and checks every invariant.
    pub fn new(
        width: CodeWidth,
        left: [BPCode; 10],
        right: [BPCode; 10],
        metadata: TableMetadata,
    ) -> Result<Self> {
        let table = Self::new_unchecked(width, left, right, metadata);
        let violations = table.validate();
        if let Some(v) = violations.first() {
            return Err(Error::Table(v.to_string()));
        }
        Ok(table)
    }

    pub fn new_unchecked(
        width: CodeWidth,
        left: [BPCode; 10],
        right: [BPCode; 10],
        metadata: TableMetadata,
    ) -> Self {
        Self {
            width,
            left,
            right,
            metadata,
        }
    }

    /// The shipped search-derived BP10 table.
    pub fn default_bp10() -> Self {
        Self::from_toml_str(DEFAULT_BP10).expect("embedded default table is valid")
    }

    /// The shipped table compressed to BP8.
    pub fn default_bp8() -> Self {
        Self::default_bp10().compress()
    }

    pub fn width(&self) -> CodeWidth {
        self.width
    }

    pub fn dataset(&self, bias: Bias) -> &[BPCode; 10] {
        match bias {
            Bias::LeftBiased => &self.left,
            Bias::RightBiased => &self.right,
        }
    }

    pub fn encode(&self, digit: BPDigit, bias: Bias) -> &BPCode {
        &self.dataset(bias)[digit.get() as usize]
    }

    /// Exact table match first, popcount otherwise.
    pub fn decode(&self, code: &BPCode) -> Result<BPDigit> {
        let hit = self
            .left
            .iter()
            .chain(self.right.iter())
            .position(|c| c.same_pattern(code));
        if let Some(idx) = hit {
            return BPDigit::new((idx % 10) as u8);
        }
        let ones = code.total_ones();
        if ones > BPDigit::MAX as u32 {
            return Err(Error::PopcountOverflow(ones));
        }
        BPDigit::new(ones as u8)
    }

    /// All broken invariants, in digit order.
    pub fn validate(&self) -> Vec<TableViolation> {
        let mut out = Vec::new();
        for bias in [Bias::LeftBiased, Bias::RightBiased] {
            let set = self.dataset(bias);
            for (k, code) in set.iter().enumerate() {
                let digit = k as u8;
                if code.bias != bias {
                    out.push(TableViolation::WrongBias { bias, digit });
                }
                if code.width != self.width {
                    out.push(TableViolation::WrongWidth { bias, digit });
                }
                if code.width == CodeWidth::W10 && (code.implicit_left || code.implicit_right) {
                    out.push(TableViolation::ImplicitOnWide { bias, digit });
                }
                let ones = code.total_ones();
                if ones != k as u32 {
                    out.push(TableViolation::Popcount { bias, digit, ones });
                }
                if let Some(other) = set[..k].iter().position(|c| c.same_pattern(code)) {
                    out.push(TableViolation::Duplicate {
                        bias,
                        digit,
                        other: other as u8,
                    });
                }
            }
        }
        out
    }

    pub fn compress(&self) -> Self {
        Self {
            width: CodeWidth::W8,
            left: self.left.map(|c| compress_10_to_8(&c)),
            right: self.right.map(|c| compress_10_to_8(&c)),
            metadata: self.metadata.clone(),
        }
    }

    pub fn expand(&self) -> Self {
        Self {
            width: CodeWidth::W10,
            left: self.left.map(|c| expand_8_to_10(&c)),
            right: self.right.map(|c| expand_8_to_10(&c)),
            metadata: self.metadata.clone(),
        }
    }

    /// `product[i][j] = mul_popcount(left_i, right_j)`.
    pub fn product_matrix(&self) -> [[u32; 10]; 10] {
        let mut out = [[0; 10]; 10];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = mul_popcount(&self.left[i], &self.right[j]).expect("uniform width");
            }
        }
        out
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = TableFile {
            width: self.width.bits() as u32,
            metadata: self.metadata.clone(),
            left: DatasetFile::from_codes(&self.left, self.width),
            right: DatasetFile::from_codes(&self.right, self.width),
        };
        Ok(toml::to_string(&file)?)
    }

    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table = Self::from_toml_str_unchecked(text)?;
        if let Some(v) = table.validate().first() {
            return Err(Error::Table(v.to_string()));
        }
        Ok(table)
    }

    /// Parses the structure only; invariants are left to [`validate`](Self::validate).
    pub fn from_toml_str_unchecked(text: &str) -> Result<Self> {
        let file: TableFile = toml::from_str(text)?;
        let width = CodeWidth::from_bits(file.width as usize)?;
        let left = file.left.to_codes(Bias::LeftBiased, width)?;
        let right = file.right.to_codes(Bias::RightBiased, width)?;
        Ok(Self::new_unchecked(width, left, right, file.metadata))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn load_unchecked(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str_unchecked(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    width: u32,
    metadata: TableMetadata,
    left: DatasetFile,
    right: DatasetFile,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    codes: Vec<String>,
    /// Two characters per code, `<left><right>`; width 8 only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    implicit: Option<Vec<String>>,
}

impl DatasetFile {
    fn from_codes(codes: &[BPCode; 10], width: CodeWidth) -> Self {
        let implicit = (width == CodeWidth::W8).then(|| {
            codes
                .iter()
                .map(|c| format!("{}{}", c.implicit_left as u8, c.implicit_right as u8))
                .collect()
        });
        Self {
            codes: codes.iter().map(BPCode::bit_string).collect(),
            implicit,
        }
    }

    fn to_codes(&self, bias: Bias, width: CodeWidth) -> Result<[BPCode; 10]> {
        if self.codes.len() != 10 {
            return Err(Error::Table(format!(
                "{bias} dataset has {} codes, expected 10",
                self.codes.len()
            )));
        }
        let implicit = match (width, &self.implicit) {
            (CodeWidth::W8, Some(v)) if v.len() == 10 => Some(v),
            (CodeWidth::W8, _) => {
                return Err(Error::Table(format!(
                    "{bias} dataset needs 10 implicit-bit entries for width 8"
                )))
            }
            (CodeWidth::W10, Some(_)) => {
                return Err(Error::Table(format!(
                    "{bias} dataset carries implicit bits at width 10"
                )))
            }
            (CodeWidth::W10, None) => None,
        };
        let mut out = [BPCode::zero(bias, width); 10];
        for (k, s) in self.codes.iter().enumerate() {
            let mut code = BPCode::parse(bias, width, s)?;
            if let Some(imp) = implicit {
                let (l, r) = match imp[k].as_str() {
                    "00" => (false, false),
                    "01" => (false, true),
                    "10" => (true, false),
                    "11" => (true, true),
                    other => return Err(Error::BadBitString(other.to_string())),
                };
                code = code.with_implicits(l, r);
            }
            out[k] = code;
        }
        Ok(out)
    }
}
