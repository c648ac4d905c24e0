use std::sync::Arc;

use disca_core::bp_format::{compress_10_to_8, expand_8_to_10, quantize_matrix, QuantStrategy};
use disca_core::energy_perf::{job_energy, EnergyConstants};
use disca_core::engine::{
    oracle_matmul, plan_tiling, plan_tiling_with, run_matmul, run_plan, TileShape,
};
use disca_core::sram_core::{DecoderState, Subarray, Wordline};
use disca_core::{BPCodeTable, BPDigit, Bias, Dimension, EngineConfig, Error, MatMulJob, Matrix};
use proptest::prelude::*;

fn digit_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<BPDigit>> {
    prop::collection::vec(0u8..10, rows * cols).prop_map(move |v| {
        Matrix::from_vec(
            rows,
            cols,
            v.into_iter().map(|d| BPDigit::new(d).unwrap()).collect(),
        )
        .unwrap()
    })
}

fn job_strategy(max_m: usize, max_k: usize, max_n: usize) -> impl Strategy<Value = MatMulJob> {
    (1..=max_m, 1..=max_k, 1..=max_n).prop_flat_map(|(m, k, n)| {
        (digit_matrix(m, k), digit_matrix(k, n)).prop_map(|(l, u)| {
            MatMulJob::new(l, u, 1.0, 1.0, Arc::new(BPCodeTable::default_bp10())).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_equals_oracle(job in job_strategy(12, 80, 12)) {
        let (o, stats) = run_matmul(&job, &EngineConfig::default()).unwrap();
        prop_assert_eq!(&o, &oracle_matmul(&job));
        prop_assert_eq!(stats.scmul_ops, (job.m() * job.n() * job.k().div_ceil(32)) as u64);
    }

    #[test]
    fn any_tile_shape_gives_same_output(
        job in job_strategy(10, 70, 10),
        rows in 1usize..=64,
        cols in 1usize..=64,
    ) {
        let cfg = EngineConfig { multipass: true, ..EngineConfig::default() };
        let plan = plan_tiling_with(job.m(), job.k(), job.n(), &cfg, TileShape { l_rows: rows, u_cols: cols }).unwrap();
        prop_assert!(plan.covers_exactly_once());
        let out = run_plan(&job, &cfg, &plan, false).unwrap();
        prop_assert_eq!(out.o_int, oracle_matmul(&job));
    }

    #[test]
    fn wall_cycles_monotone(m in 1usize..40, k in 1usize..200, n in 1usize..40, grow in 0usize..3) {
        let cfg = EngineConfig { multipass: true, ..EngineConfig::default() };
        let cycles = |m, k, n| {
            let l = Matrix::filled(m, k, BPDigit::ZERO);
            let u = Matrix::filled(k, n, BPDigit::ZERO);
            let job = MatMulJob::new(l, u, 1.0, 1.0, Arc::new(BPCodeTable::default_bp8())).unwrap();
            run_matmul(&job, &cfg).unwrap().1.wall_cycles
        };
        let base = cycles(m, k, n);
        let bigger = match grow {
            0 => cycles(m + 1, k, n),
            1 => cycles(m, k + 32, n),
            _ => cycles(m, k, n + 1),
        };
        prop_assert!(bigger >= base);
    }

    #[test]
    fn and_matches_word_and(a in any::<[u64; 4]>(), b in any::<[u64; 4]>()) {
        let mut s = Subarray::new();
        let (wa, wb) = (Wordline::from_words(a), Wordline::from_words(b));
        s.write_row(64, wa).unwrap();
        s.write_row(3, wb).unwrap();
        let got = s.compute_and(&mut DecoderState::default(), 64, 3, false).unwrap();
        let expect: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x & y).collect();
        prop_assert_eq!(got.words().as_slice(), expect.as_slice());
        prop_assert_eq!(s.peek_row(64).unwrap(), wa);
        prop_assert_eq!(s.peek_row(3).unwrap(), wb);
    }

    #[test]
    fn quantization_error_bounded(values in prop::collection::vec(0.0f64..1e3, 1..40)) {
        let m = Matrix::from_vec(1, values.len(), values.clone()).unwrap();
        let q = quantize_matrix(&m, QuantStrategy::MaxAbs).unwrap();
        for (v, d) in values.iter().zip(q.dequantize().iter()) {
            prop_assert!((v - d).abs() <= q.scale / 20.0 + 1e-9);
        }
    }
}

#[test]
fn code_width_round_trip() {
    let t = BPCodeTable::default_bp10();
    for bias in [Bias::LeftBiased, Bias::RightBiased] {
        for code in t.dataset(bias) {
            assert_eq!(&expand_8_to_10(&compress_10_to_8(code)), code);
            assert_eq!(
                t.decode(code).unwrap(),
                t.decode(&compress_10_to_8(code)).unwrap()
            );
        }
    }
}

#[test]
fn table_file_round_trip() {
    for t in [BPCodeTable::default_bp10(), BPCodeTable::default_bp8()] {
        let text = t.to_toml_string().unwrap();
        assert_eq!(BPCodeTable::from_toml_str(&text).unwrap(), t);
    }
}

#[test]
fn corrupted_table_names_the_digit() {
    let text = BPCodeTable::default_bp10().to_toml_string().unwrap();
    // Digit 3 of the left dataset gains a fourth one.
    let bad = text.replacen("\"0011100000\"", "\"0011110000\"", 1);
    assert_ne!(bad, text);
    let err = BPCodeTable::from_toml_str(&bad).unwrap_err();
    assert!(err.to_string().contains("digit 3"), "{err}");
}

#[test]
fn single_row_job_energy() {
    // One L row against 64 U columns over one K chunk: 64 ANDs and 65 writes.
    let d = BPDigit::new(4).unwrap();
    let job = MatMulJob::new(
        Matrix::filled(1, 32, d),
        Matrix::filled(32, 64, d),
        1.0,
        1.0,
        Arc::new(BPCodeTable::default_bp10()),
    )
    .unwrap();
    let (_, stats) = run_matmul(&job, &EngineConfig::default()).unwrap();
    let c = EnergyConstants::default();
    let r = job_energy(&stats, &c);
    let per_mac = c.scmul_fj_per_bit + c.decode_shared_fj_per_bit + c.accum_fj_per_bit;
    let expect = 256.0 * (64.0 * per_mac + 65.0 * c.write_fj_per_bit);
    assert!((r.total_fj - expect).abs() < 1e-6 * expect);
    assert_eq!(r.ops, 64 * 256 * 2);
}

#[test]
fn oversized_job_names_limiting_dimension() {
    let l = Matrix::filled(1, 32 * 40, BPDigit::ZERO);
    let u = Matrix::filled(32 * 40, 1, BPDigit::ZERO);
    let job = MatMulJob::new(l, u, 1.0, 1.0, Arc::new(BPCodeTable::default_bp8())).unwrap();
    match plan_tiling(&job, &EngineConfig::default()) {
        Err(Error::Capacity {
            dimension,
            required,
            available,
        }) => {
            assert_eq!(dimension, Dimension::K);
            assert_eq!((required, available), (40, 32));
        }
        other => panic!("expected capacity error, got {other:?}"),
    }
}
