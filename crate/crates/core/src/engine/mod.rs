//! MatMul engine built from subarrays.
//!
//! `L` (M x K) rows and `U` (K x N) columns are cut into K-chunks of 32 BP8
//! codes, one chunk per 256-bit wordline. A tile pins a block of L wordlines
//! and a block of U wordlines of the same chunk to one subarray, which then
//! ANDs every L row against every resident U row while the accumulator
//! reduces each result to a binary partial sum.

mod accuracy;
mod plan;
mod run;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use accuracy::{
    accuracy_eval, compare_outputs, evaluate_accuracy, random_matrix, random_operands,
    AccuracyReport, TrialError,
};
pub use plan::{plan_tiling, plan_tiling_with, Tile, TilePlan, TileShape};
pub use run::{run_matmul, run_plan, RunOutput, TileTrace};

use crate::accumulator::SegmentConfig;
use crate::bp_format::{mul_popcount, BPCodeTable, BPDigit, Bias, CodeWidth, QuantizedMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sram_core::{COLS, ROWS};

/// Throughput derate that brings the ideal 8.192 TOPS down to 7.9 TOPS.
pub const DEFAULT_THROUGHPUT_DERATE: f64 = 1.0 - 7.9 / 8.192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub banks: usize,
    pub subarrays_per_bank: usize,
    /// Rows per subarray; columns are fixed at 256.
    pub rows: usize,
    pub clock_hz: f64,
    pub segment: SegmentConfig,
    /// Reload the array in several passes when the job does not fit at once.
    pub multipass: bool,
    /// Fraction removed from the ideal peak to get the effective peak.
    pub throughput_derate: f64,
}

impl Default for EngineConfig {
    /// 128KB: 8 banks x 4 subarrays of 256C x 128R at 500 MHz.
    fn default() -> Self {
        Self {
            banks: 8,
            subarrays_per_bank: 4,
            rows: ROWS,
            clock_hz: 500e6,
            segment: SegmentConfig::default(),
            multipass: false,
            throughput_derate: DEFAULT_THROUGHPUT_DERATE,
        }
    }
}

impl EngineConfig {
    pub fn subarrays(&self) -> usize {
        self.banks * self.subarrays_per_bank
    }

    pub fn capacity_bytes(&self) -> usize {
        self.subarrays() * self.rows * COLS / 8
    }

    pub fn validate(&self) -> Result<()> {
        if self.subarrays() == 0 {
            return Err(Error::Config("engine has no subarrays".into()));
        }
        crate::sram_core::LayoutMap::new(self.rows)?;
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(Error::Config(format!("clock {} Hz", self.clock_hz)));
        }
        if !(0.0..1.0).contains(&self.throughput_derate) {
            return Err(Error::Config(format!("derate {}", self.throughput_derate)));
        }
        Ok(())
    }
}

/// Quantized operands plus the BP8 table that encodes them.
#[derive(Debug, Clone)]
pub struct MatMulJob {
    pub l: Matrix<BPDigit>,
    pub u: Matrix<BPDigit>,
    pub scale_l: f64,
    pub scale_u: f64,
    table: Arc<BPCodeTable>,
}

impl MatMulJob {
    /// A 10-bit table is compressed to BP8 on the way in.
    pub fn new(
        l: Matrix<BPDigit>,
        u: Matrix<BPDigit>,
        scale_l: f64,
        scale_u: f64,
        table: Arc<BPCodeTable>,
    ) -> Result<Self> {
        if l.cols() != u.rows() {
            return Err(Error::Shape(format!(
                "L is {}x{} but U is {}x{}",
                l.rows(),
                l.cols(),
                u.rows(),
                u.cols()
            )));
        }
        for s in [scale_l, scale_u] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::BadScale(s));
            }
        }
        let table = match table.width() {
            CodeWidth::W8 => table,
            CodeWidth::W10 => Arc::new(table.compress()),
        };
        Ok(Self {
            l,
            u,
            scale_l,
            scale_u,
            table,
        })
    }

    pub fn from_quantized(
        l: QuantizedMatrix,
        u: QuantizedMatrix,
        table: Arc<BPCodeTable>,
    ) -> Result<Self> {
        Self::new(l.digits, u.digits, l.scale, u.scale, table)
    }

    pub fn table(&self) -> &BPCodeTable {
        &self.table
    }

    pub fn m(&self) -> usize {
        self.l.rows()
    }

    pub fn k(&self) -> usize {
        self.l.cols()
    }

    pub fn n(&self) -> usize {
        self.u.cols()
    }
}

/// Event and cycle totals of a run. Every event covers one wordline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CycleStats {
    pub write_ops: u64,
    pub read_ops: u64,
    pub scmul_ops: u64,
    pub latch_loads: u64,
    pub decode_events: u64,
    pub accumulate_ops: u64,
    pub pipeline_cycles: u64,
    pub wall_cycles: u64,
    pub passes: u64,
    pub subarrays_used: u64,
}

/// Direct triple loop over `mul_popcount`; no array, decoder or pipeline.
pub fn oracle_matmul(job: &MatMulJob) -> Matrix<u64> {
    let table = job.table();
    Matrix::from_fn(job.m(), job.n(), |i, j| {
        (0..job.k())
            .map(|k| {
                let l = table.encode(*job.l.get(i, k), Bias::LeftBiased);
                let u = table.encode(*job.u.get(k, j), Bias::RightBiased);
                mul_popcount(l, u).expect("uniform width") as u64
            })
            .sum()
    })
}

/// A popcount over 10 code bits is a product probability in tenths.
pub fn dequantize_output(o_int: &Matrix<u64>, scale_l: f64, scale_u: f64) -> Matrix<f64> {
    o_int.map(|&v| v as f64 * scale_l * scale_u / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digits(rows: Vec<Vec<u8>>) -> Matrix<BPDigit> {
        Matrix::from_rows(rows)
            .unwrap()
            .map(|&k| BPDigit::new(k).unwrap())
    }

    #[test]
    fn default_config_is_128kb() {
        let c = EngineConfig::default();
        assert_eq!(c.subarrays(), 32);
        assert_eq!(c.capacity_bytes(), 128 * 1024);
        c.validate().unwrap();
        assert!((8.192 * (1.0 - c.throughput_derate) - 7.9).abs() < 1e-12);
    }

    #[test]
    fn job_shape_checks() {
        let t = Arc::new(BPCodeTable::default_bp8());
        let l = digits(vec![vec![1, 2]]);
        let u = digits(vec![vec![3]]);
        assert!(MatMulJob::new(l.clone(), u, 1.0, 1.0, t.clone()).is_err());
        let u = digits(vec![vec![3], vec![4]]);
        assert!(MatMulJob::new(l.clone(), u.clone(), 0.0, 1.0, t.clone()).is_err());
        let job = MatMulJob::new(l, u, 1.0, 1.0, Arc::new(BPCodeTable::default_bp10())).unwrap();
        assert_eq!(job.table().width(), CodeWidth::W8);
    }

    #[test]
    fn oracle_hand_checkable() {
        let t = Arc::new(BPCodeTable::default_bp8());
        let p = t.product_matrix();
        let l = digits(vec![vec![9, 0], vec![0, 9]]);
        let u = digits(vec![vec![9, 0], vec![0, 9]]);
        let o = oracle_matmul(&MatMulJob::new(l, u, 1.0, 1.0, t).unwrap());
        assert_eq!(o.as_slice(), &[p[9][9] as u64, 0, 0, p[9][9] as u64]);
    }

    #[test]
    fn dequantize_units() {
        // Eight of ten bits set after the AND: product probability 0.8.
        let o = Matrix::from_rows(vec![vec![0u64, 8]]).unwrap();
        let d = dequantize_output(&o, 1.0, 1.0);
        assert_eq!(*d.get(0, 0), 0.0);
        assert!((d.get(0, 1) - 0.8).abs() < 1e-12);
        assert!((dequantize_output(&o, 2.0, 0.5).get(0, 1) - 0.8).abs() < 1e-12);
    }
}
