//! Acceptance criteria, one line per criterion. Each check compares the
//! library against a closed form or an oracle written here from scratch.

use std::process::ExitCode;
use std::sync::Arc;

use disca_core::accumulator::{
    accumulate, popcount_segments, run_schedule, CorrectionVector, SegmentConfig,
};
use disca_core::bp_format::{derive_code_table, mul_popcount, thermometer_table, SearchConfig};
use disca_core::energy_perf::{
    accum_energy_from_power, baseline_read_fj_per_bit, efficiency, mac_energy_per_bit,
    peak_throughput, scale_to_node, scmul_read_ratio, scmul_with_decode_per_bit, EnergyConstants,
    ScalingTable,
};
use disca_core::engine::{accuracy_eval, oracle_matmul, run_matmul};
use disca_core::sram_core::{LayoutMap, Subarray, Wordline};
use disca_core::{BPCode, BPCodeTable, BPDigit, Bias, EngineConfig, MatMulJob, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_TRACE: &str = include_str!("golden/latched_sweep_8rows.txt");

/// Mean relative error of the seed-0 accuracy run; regressions must not exceed it.
const FROZEN_MEAN_RELATIVE_ERROR: f64 = 0.018588798398906363;
const ACCURACY_LIMIT: f64 = 0.05;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    if (got - want).abs() <= tol {
        Ok(format!("{name} {got:.6} (want {want} +/- {tol})"))
    } else {
        Err(format!("{name} {got:.6}, want {want} +/- {tol}"))
    }
}

fn energy_composition() -> Outcome {
    let c = EnergyConstants::default();
    let a = within("MAC fJ/bit", mac_energy_per_bit(&c), 557.428, 0.01)?;
    let b = within(
        "SC-MUL+decode fJ/bit",
        scmul_with_decode_per_bit(&c),
        314.15,
        0.01,
    )?;
    Ok(format!("{a}; {b}"))
}

fn efficiency_figures() -> Outcome {
    let e = efficiency(&EnergyConstants::default());
    let a = within("TOPS/W per bit", e.tops_per_w_per_bit, 3.59, 0.01)?;
    let b = within("BP8 GOPS/W", e.gops_per_w_bp8(), 448.5, 448.5 * 0.001)?;
    Ok(format!("{a}; {b}"))
}

fn throughput() -> Outcome {
    let config = EngineConfig::default();
    let t = peak_throughput(&config);
    // 8 banks x 4 subarrays x 256 columns, one MAC (two ops) per cycle.
    let closed_form = 32.0 * 256.0 * 500e6 * 2.0 / 1e12;
    let a = within("ideal TOPS/bit", t.ideal_tops_per_bit, closed_form, 1e-12)?;
    let b = within(
        "effective TOPS/bit",
        t.effective_tops_per_bit,
        7.9,
        7.9 * 0.05,
    )?;
    let c = within(
        "effective BP8 TOPS",
        t.effective_tops_bp8,
        0.988,
        0.988 * 0.01,
    )?;
    Ok(format!("{a}; {b}; {c}"))
}

fn accumulator_constant() -> Outcome {
    let c = EnergyConstants::default();
    within(
        "accumulator fJ/bit",
        accum_energy_from_power(&c),
        243.28,
        0.01,
    )
}

fn ratios() -> Outcome {
    let c = EnergyConstants::default();
    let a = within("SC-MUL/read", scmul_read_ratio(&c), 1.039, 0.002)?;
    let b = within(
        "derived baseline read fJ/bit",
        baseline_read_fj_per_bit(&c),
        289.75 / 1.045,
        1e-9,
    )?;
    Ok(format!("{a}; {b}"))
}

/// Full 10-bit view of a code, implicit bits included, as characters.
fn full_bits(code: &BPCode) -> Vec<bool> {
    let bits = code.bit_string();
    let stored = bits.chars().map(|c| c == '1');
    if code.width.bits() == 10 {
        stored.collect()
    } else {
        std::iter::once(code.implicit_left)
            .chain(stored)
            .chain(std::iter::once(code.implicit_right))
            .collect()
    }
}

fn and_count(a: &BPCode, b: &BPCode) -> u32 {
    full_bits(a)
        .iter()
        .zip(full_bits(b))
        .filter(|(x, y)| **x && *y)
        .count() as u32
}

fn bp8_equivalence() -> Outcome {
    let wide = BPCodeTable::default_bp10();
    let narrow = BPCodeTable::default_bp8();
    for i in BPDigit::all() {
        for j in BPDigit::all() {
            let (l10, u10) = (
                wide.encode(i, Bias::LeftBiased),
                wide.encode(j, Bias::RightBiased),
            );
            let (l8, u8) = (
                narrow.encode(i, Bias::LeftBiased),
                narrow.encode(j, Bias::RightBiased),
            );
            let expect = and_count(l10, u10);
            let w10 = mul_popcount(l10, u10).map_err(|e| e.to_string())?;
            let w8 = mul_popcount(l8, u8).map_err(|e| e.to_string())?;
            if w10 != expect || w8 != expect {
                return Err(format!(
                    "pair ({i}, {j}): width 10 {w10}, width 8 {w8}, bitwise {expect}"
                ));
            }
        }
    }
    Ok("100 pairs identical at widths 8 and 10".into())
}

/// Triple loop over the bit strings of the 10-bit table.
fn bitwise_matmul(l: &Matrix<BPDigit>, u: &Matrix<BPDigit>) -> Matrix<u64> {
    let t = BPCodeTable::default_bp10();
    Matrix::from_fn(l.rows(), u.cols(), |i, j| {
        (0..l.cols())
            .map(|k| {
                and_count(
                    t.encode(*l.get(i, k), Bias::LeftBiased),
                    t.encode(*u.get(k, j), Bias::RightBiased),
                ) as u64
            })
            .sum()
    })
}

fn check_job(
    l: Matrix<BPDigit>,
    u: Matrix<BPDigit>,
    table: &Arc<BPCodeTable>,
) -> Result<(), String> {
    let expect = bitwise_matmul(&l, &u);
    let job = MatMulJob::new(l, u, 1.0, 1.0, table.clone()).map_err(|e| e.to_string())?;
    let (got, _) = run_matmul(&job, &EngineConfig::default()).map_err(|e| e.to_string())?;
    if got != expect || oracle_matmul(&job) != expect {
        return Err(format!(
            "{}x{}x{} job differs from the bitwise oracle",
            job.m(),
            job.k(),
            job.n()
        ));
    }
    Ok(())
}

fn engine_oracle() -> Outcome {
    let table = Arc::new(BPCodeTable::default_bp10());
    for i in BPDigit::all() {
        for j in BPDigit::all() {
            check_job(Matrix::filled(1, 1, i), Matrix::filled(1, 1, j), &table)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (m, k, n) = (
            rng.gen_range(1..=16),
            rng.gen_range(1..=96),
            rng.gen_range(1..=16),
        );
        let mut digits =
            |r, c| Matrix::from_fn(r, c, |_, _| BPDigit::new(rng.gen_range(0..10)).unwrap());
        let l = digits(m, k);
        let u = digits(k, n);
        check_job(l, u, &table)?;
    }
    Ok("100 single-element jobs and 200 random jobs up to 16x96x16 exact".into())
}

fn random_wordline(rng: &mut impl Rng) -> Wordline {
    Wordline::from_words(rng.gen())
}

fn random_correction(rng: &mut impl Rng, n: usize) -> CorrectionVector {
    CorrectionVector::new((0..n).map(|_| rng.gen_range(0..=2)).collect()).unwrap()
}

fn accumulator_properties() -> Outcome {
    let cfg = SegmentConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut schedule = Vec::with_capacity(10_000);
    let mut expected = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let w = random_wordline(&mut rng);
        let corr = random_correction(&mut rng, cfg.count());
        let segments: Vec<u32> = (0..cfg.count())
            .map(|s| {
                (0..cfg.width())
                    .filter(|b| w.get(s * cfg.width() + b))
                    .count() as u32
            })
            .collect();
        if popcount_segments(&w, &cfg) != segments {
            return Err("segment popcounts differ from bit-by-bit counts".into());
        }
        let total: u32 = (0..256).filter(|&c| w.get(c)).count() as u32
            + corr.as_slice().iter().map(|&c| c as u32).sum::<u32>();
        if accumulate(&w, &cfg, &corr).map_err(|e| e.to_string())? != total {
            return Err("accumulate does not conserve ones plus corrections".into());
        }
        // One bubble in four.
        if rng.gen_range(0..4) == 0 {
            schedule.push(None);
            expected.push(None);
        }
        schedule.push(Some((w, corr)));
        expected.push(Some(total));
    }
    let out = run_schedule(cfg, &schedule).map_err(|e| e.to_string())?;
    let mut delayed = vec![None, None];
    delayed.extend(expected);
    if out != delayed {
        return Err("pipeline output is not the input delayed by two steps".into());
    }
    Ok("10000 wordlines conserved; pipeline output = input delayed 2 steps".into())
}

fn accuracy() -> Outcome {
    let config = EngineConfig::default();
    let table = Arc::new(BPCodeTable::default_bp10());
    let report = accuracy_eval((64, 64, 64), 50, 0, table, &config).map_err(|e| e.to_string())?;
    let got = report.mean_relative_error;
    if got > ACCURACY_LIMIT {
        return Err(format!(
            "mean relative error {got:.6} above {ACCURACY_LIMIT}"
        ));
    }
    if got > FROZEN_MEAN_RELATIVE_ERROR {
        return Err(format!(
            "mean relative error {got:?} exceeds frozen {FROZEN_MEAN_RELATIVE_ERROR:?}"
        ));
    }

    let derived = derive_code_table(&SearchConfig::default(), 0);
    if derived != BPCodeTable::default_bp10() {
        return Err("shipped table differs from the seed-0 search result".into());
    }
    let grid_error = |t: &BPCodeTable| {
        let mut sum = 0u32;
        for i in BPDigit::all() {
            for j in BPDigit::all() {
                let p = and_count(
                    t.encode(i, Bias::LeftBiased),
                    t.encode(j, Bias::RightBiased),
                );
                sum += (10 * p).abs_diff(i.get() as u32 * j.get() as u32);
            }
        }
        sum
    };
    let (ours, base) = (grid_error(&derived), grid_error(&thermometer_table()));
    if ours >= base {
        return Err(format!(
            "search table grid error {ours} not below thermometer {base}"
        ));
    }
    Ok(format!(
        "mean relative error {got:.4} over 50 jobs; grid error {ours} vs thermometer {base} (hundredths)"
    ))
}

fn scaling() -> Outcome {
    let c = EnergyConstants::default();
    let scaled = scale_to_node(&c, &ScalingTable::default(), "22nm").map_err(|e| e.to_string())?;
    let gain = efficiency(&scaled).tops_per_w_per_bit / efficiency(&c).tops_per_w_per_bit;
    if gain >= 100.0 {
        Ok(format!("22nm gain {gain:.1}x"))
    } else {
        Err(format!("22nm gain {gain:.1}x below 100x"))
    }
}

fn golden_trace() -> Outcome {
    let mut sub = Subarray::with_layout(LayoutMap::new(8).map_err(|e| e.to_string())?);
    let program: Vec<(usize, usize)> = (0..2).flat_map(|l| (0..4).map(move |u| (l, u))).collect();
    let (_, trace) = sub.issue_trace(&program).map_err(|e| e.to_string())?;
    if trace.dump() == GOLDEN_TRACE {
        Ok(format!("{} events match", trace.events.len()))
    } else {
        Err(format!("trace differs:\n{}", trace.dump()))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("energy composition", energy_composition),
        ("efficiency", efficiency_figures),
        ("throughput", throughput),
        ("accumulator constant", accumulator_constant),
        ("ratio checks", ratios),
        ("BP8/BP10 equivalence", bp8_equivalence),
        ("engine-oracle equivalence", engine_oracle),
        ("accumulator properties", accumulator_properties),
        ("accuracy", accuracy),
        ("node scaling", scaling),
        ("golden trace", golden_trace),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
