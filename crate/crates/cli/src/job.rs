//! Job spec files for `disca matmul`.
//!
//! ```toml
//! m = 64
//! k = 64
//! n = 64
//! seed = 0
//! # or explicit operands:
//! # l_csv = "l.csv"
//! # u_csv = "u.csv"
//! # or digit matrices with their scales:
//! # l_digits = [[1, 2], [3, 4]]
//! # u_digits = [[5], [6]]
//! # scale_l = 1.0
//! # scale_u = 1.0
//! table = "codes.toml"
//!
//! [engine]
//! banks = 8
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use disca_core::engine::random_operands;
use disca_core::{BPDigit, EngineConfig, Matrix};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub l_csv: Option<PathBuf>,
    pub u_csv: Option<PathBuf>,
    pub l_digits: Option<Vec<Vec<u8>>>,
    pub u_digits: Option<Vec<Vec<u8>>>,
    pub scale_l: Option<f64>,
    pub scale_u: Option<f64>,
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub engine: EngineConfig,
}

pub enum Operands {
    /// Real non-negative matrices, quantized with max-abs scaling.
    Real(Matrix<f64>, Matrix<f64>),
    /// Already-quantized digits and their scales.
    Digits {
        l: Matrix<BPDigit>,
        u: Matrix<BPDigit>,
        scale_l: f64,
        scale_u: f64,
    },
}

impl JobSpec {
    /// Relative paths inside the file are taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec: JobSpec =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut spec.l_csv, &mut spec.u_csv, &mut spec.table]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(spec)
    }

    pub fn operands(&self) -> Result<Operands> {
        match (&self.l_csv, &self.u_csv, &self.l_digits, &self.u_digits) {
            (Some(l), Some(u), None, None) => Ok(Operands::Real(read_csv(l)?, read_csv(u)?)),
            (None, None, Some(l), Some(u)) => Ok(Operands::Digits {
                l: digit_matrix(l)?,
                u: digit_matrix(u)?,
                scale_l: self.scale_l.unwrap_or(1.0),
                scale_u: self.scale_u.unwrap_or(1.0),
            }),
            (None, None, None, None) => {
                let shape = (
                    self.m.unwrap_or(64),
                    self.k.unwrap_or(64),
                    self.n.unwrap_or(64),
                );
                let (l, u) = random_operands(shape, self.seed.unwrap_or(0));
                Ok(Operands::Real(l, u))
            }
            _ => bail!("give both l_csv and u_csv, or both l_digits and u_digits, or neither"),
        }
    }
}

fn read_csv(path: &Path) -> Result<Matrix<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Matrix::from_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn digit_matrix(rows: &[Vec<u8>]) -> Result<Matrix<BPDigit>> {
    let rows = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&d| BPDigit::new(d))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows)?)
}
