use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dequantize_output, run_matmul, EngineConfig, MatMulJob};
use crate::bp_format::{quantize_matrix, BPCodeTable, QuantStrategy};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Entries smaller than this fraction of the largest exact output are left
/// out of the relative-error average.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialError {
    /// `mean |approx - exact| / max |exact|`.
    pub normalized_mae: f64,
    /// Mean of `|approx - exact| / |exact|` over entries above the floor.
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub seed: u64,
    pub shape: (usize, usize, usize),
    pub trials: Vec<TrialError>,
    pub mean_normalized_mae: f64,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
}

pub fn compare_outputs(approx: &Matrix<f64>, exact: &Matrix<f64>) -> Result<TrialError> {
    if (approx.rows(), approx.cols()) != (exact.rows(), exact.cols()) {
        return Err(Error::Shape(
            "approximate and exact outputs differ in shape".into(),
        ));
    }
    let count = exact.as_slice().len();
    let peak = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if count == 0 || peak == 0.0 {
        let identical = approx.iter().zip(exact.iter()).all(|(a, e)| a == e);
        let e = if identical { 0.0 } else { f64::INFINITY };
        return Ok(TrialError {
            normalized_mae: e,
            mean_relative_error: e,
            max_relative_error: e,
        });
    }
    let mae = approx
        .iter()
        .zip(exact.iter())
        .map(|(a, e)| (a - e).abs())
        .sum::<f64>()
        / count as f64;
    let floor = RELATIVE_ERROR_FLOOR * peak;
    let rel: Vec<f64> = approx
        .iter()
        .zip(exact.iter())
        .filter(|(_, e)| e.abs() > floor)
        .map(|(a, e)| (a - e).abs() / e.abs())
        .collect();
    Ok(TrialError {
        normalized_mae: mae / peak,
        mean_relative_error: rel.iter().sum::<f64>() / rel.len().max(1) as f64,
        max_relative_error: rel.iter().copied().fold(0.0, f64::max),
    })
}

/// Quantize both operands (max-abs), run on the engine, dequantize, and
/// compare against the exact real product. Also returns the engine output.
pub fn evaluate_accuracy(
    l: &Matrix<f64>,
    u: &Matrix<f64>,
    table: Arc<BPCodeTable>,
    config: &EngineConfig,
) -> Result<(TrialError, Matrix<f64>)> {
    let exact = l.matmul(u)?;
    let ql = quantize_matrix(l, QuantStrategy::MaxAbs)?;
    let qu = quantize_matrix(u, QuantStrategy::MaxAbs)?;
    let job = MatMulJob::from_quantized(ql, qu, table)?;
    let (o_int, _) = run_matmul(&job, config)?;
    let approx = dequantize_output(&o_int, job.scale_l, job.scale_u);
    Ok((compare_outputs(&approx, &exact)?, approx))
}

/// Uniform `[0, 1)` entries.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.gen::<f64>())
}

/// One `M x K` by `K x N` pair of uniform operands from `seed`.
pub fn random_operands((m, k, n): (usize, usize, usize), seed: u64) -> (Matrix<f64>, Matrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = random_matrix(&mut rng, m, k);
    let u = random_matrix(&mut rng, k, n);
    (l, u)
}

/// `trials` random non-negative `M x K` by `K x N` jobs drawn from one
/// seeded stream; L then U for each trial.
pub fn accuracy_eval(
    (m, k, n): (usize, usize, usize),
    trials: usize,
    seed: u64,
    table: Arc<BPCodeTable>,
    config: &EngineConfig,
) -> Result<AccuracyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(trials);
    for _ in 0..trials {
        let l = random_matrix(&mut rng, m, k);
        let u = random_matrix(&mut rng, k, n);
        results.push(evaluate_accuracy(&l, &u, table.clone(), config)?.0);
    }
    let mean = |f: fn(&TrialError) -> f64| {
        results.iter().map(f).sum::<f64>() / results.len().max(1) as f64
    };
    Ok(AccuracyReport {
        seed,
        shape: (m, k, n),
        mean_normalized_mae: mean(|t| t.normalized_mae),
        mean_relative_error: mean(|t| t.mean_relative_error),
        max_relative_error: results
            .iter()
            .map(|t| t.max_relative_error)
            .fold(0.0, f64::max),
        trials: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp_format::evaluate_table;

    #[test]
    fn zero_operand_gives_zero_error() {
        let t = Arc::new(BPCodeTable::default_bp8());
        let l = Matrix::filled(4, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = random_matrix(&mut rng, 8, 3);
        let (e, approx) = evaluate_accuracy(&l, &u, t, &EngineConfig::default()).unwrap();
        assert_eq!(e, TrialError::default());
        assert!(approx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_inputs_rejected() {
        let t = Arc::new(BPCodeTable::default_bp8());
        let l = Matrix::filled(1, 1, -1.0);
        let u = Matrix::filled(1, 1, 1.0);
        assert!(matches!(
            evaluate_accuracy(&l, &u, t, &EngineConfig::default()),
            Err(Error::UnipolarViolation { .. })
        ));
    }

    #[test]
    fn digit_exact_inputs_bounded_by_table_error() {
        // With digit-exact operands only the product deviation remains; each
        // term is off by at most the table's worst pair error.
        let t = Arc::new(BPCodeTable::default_bp8());
        let worst = evaluate_table(&t).max_abs;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = 16;
        let mut l = Matrix::from_fn(3, k, |_, _| rng.gen_range(0..10) as f64 / 10.0);
        let mut u = Matrix::from_fn(k, 2, |_, _| rng.gen_range(0..10) as f64 / 10.0);
        // Pin the max of each operand to 0.9 so max-abs scaling is 1.
        *u.get_mut(0, 0) = 0.9;
        *l.get_mut(0, 0) = 0.9;
        let (_, approx) = evaluate_accuracy(&l, &u, t, &EngineConfig::default()).unwrap();
        let exact = l.matmul(&u).unwrap();
        for (a, e) in approx.iter().zip(exact.iter()) {
            assert!((a - e).abs() <= k as f64 * worst + 1e-9);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let t = Arc::new(BPCodeTable::default_bp8());
        let cfg = EngineConfig::default();
        let a = accuracy_eval((4, 40, 4), 3, 7, t.clone(), &cfg).unwrap();
        let b = accuracy_eval((4, 40, 4), 3, 7, t, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 3);
    }
}
