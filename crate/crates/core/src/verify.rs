//! Self-check suite: format invariants, bit-level model oracles, and the
//! reference energy arithmetic.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accumulator::{
    accumulate, popcount_segments, run_schedule, CorrectionVector, SegmentConfig,
};
use crate::bp_format::{
    compress_10_to_8, expand_8_to_10, mul_popcount, BPCodeTable, BPDigit, Bias,
};
use crate::energy_perf::{
    accum_energy_from_power, efficiency, mac_energy_per_bit, scale_to_node, scmul_read_ratio,
    scmul_with_decode_per_bit, EnergyConstants, ScalingTable,
};
use crate::engine::{oracle_matmul, run_matmul, EngineConfig, MatMulJob};
use crate::matrix::Matrix;
use crate::sram_core::{DecoderState, Subarray, Wordline, ROWS};

/// Reference figures of the 180nm design and their tolerances.
pub mod reference {
    pub const MAC_FJ_PER_BIT: f64 = 557.428;
    pub const SCMUL_WITH_DECODE_FJ_PER_BIT: f64 = 314.15;
    pub const ENERGY_TOL_FJ: f64 = 0.01;
    pub const TOPS_PER_W_PER_BIT: f64 = 3.59;
    pub const TOPS_PER_W_TOL: f64 = 0.01;
    pub const GOPS_PER_W_BP8: f64 = 448.5;
    pub const BP8_REL_TOL: f64 = 0.001;
    pub const ACCUM_FJ_PER_BIT: f64 = 243.28;
    pub const SCMUL_READ_RATIO: f64 = 1.039;
    pub const RATIO_TOL: f64 = 0.002;
    pub const PEAK_TOPS_PER_BIT: f64 = 7.9;
    pub const PEAK_TOPS_BP8: f64 = 0.988;
    pub const NODE_GAIN_22NM: f64 = 100.0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub struct SuiteInputs<'a> {
    pub table: &'a BPCodeTable,
    pub constants: &'a EnergyConstants,
    pub scaling: &'a ScalingTable,
    pub seed: u64,
}

pub fn run_suite(inputs: &SuiteInputs<'_>) -> SuiteReport {
    let checks = vec![
        check("table invariants", || table_invariants(inputs.table)),
        check("encode/decode round trip", || round_trip(inputs.table)),
        check("BP8/BP10 equivalence", || bp8_equivalence(inputs.table)),
        check("subarray AND oracle", || subarray_and(inputs.seed)),
        check("accumulator conservation", || {
            accumulator_conservation(inputs.seed)
        }),
        check("pipeline delay", || pipeline_delay(inputs.seed)),
        check("engine vs oracle", || {
            engine_oracle(inputs.table, inputs.seed)
        }),
        check("energy reproduction", || {
            energy_reproduction(inputs.constants)
        }),
        check("node scaling", || {
            node_scaling(inputs.constants, inputs.scaling)
        }),
    ];
    SuiteReport { checks }
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

fn table_invariants(table: &BPCodeTable) -> Result<String, String> {
    let v = table.validate();
    if v.is_empty() {
        Ok(format!("20 codes, width {}", table.width().bits()))
    } else {
        Err(v
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; "))
    }
}

fn round_trip(table: &BPCodeTable) -> Result<String, String> {
    for t in [table.clone(), table.compress(), table.expand()] {
        for bias in [Bias::LeftBiased, Bias::RightBiased] {
            for d in BPDigit::all() {
                let back = t.decode(t.encode(d, bias)).map_err(|e| e.to_string())?;
                if back != d {
                    return Err(format!("{bias} digit {d} decoded as {back}"));
                }
            }
        }
    }
    Ok("40 codes at each width".into())
}

fn bp8_equivalence(table: &BPCodeTable) -> Result<String, String> {
    let t10 = table.expand();
    let t8 = table.compress();
    for i in BPDigit::all() {
        for j in BPDigit::all() {
            let l10 = t10.encode(i, Bias::LeftBiased);
            let r10 = t10.encode(j, Bias::RightBiased);
            let wide = mul_popcount(l10, r10).map_err(|e| e.to_string())?;
            let narrow = mul_popcount(
                t8.encode(i, Bias::LeftBiased),
                t8.encode(j, Bias::RightBiased),
            )
            .map_err(|e| e.to_string())?;
            let recompressed = mul_popcount(&compress_10_to_8(l10), &compress_10_to_8(r10))
                .map_err(|e| e.to_string())?;
            if wide != narrow || wide != recompressed {
                return Err(format!(
                    "pair ({i}, {j}): width 10 gives {wide}, width 8 gives {narrow}"
                ));
            }
            if expand_8_to_10(&compress_10_to_8(l10)) != *l10 {
                return Err(format!("left digit {i} does not survive compress/expand"));
            }
        }
    }
    Ok("100 pairs identical".into())
}

fn random_wordline(rng: &mut impl Rng) -> Wordline {
    Wordline::from_words(std::array::from_fn(|_| rng.gen()))
}

fn subarray_and(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Subarray::new();
    for r in 0..ROWS {
        s.write_row(r, random_wordline(&mut rng))
            .map_err(|e| e.to_string())?;
    }
    let mut d = DecoderState::default();
    for _ in 0..1000 {
        let l = rng.gen_range(64..128);
        let u = rng.gen_range(0..64);
        let before = s.clone().peek_row(l).and_then(|a| Ok((a, s.peek_row(u)?)));
        let got = s
            .compute_and(&mut d, l, u, false)
            .map_err(|e| e.to_string())?;
        let a = s.read_row(l).map_err(|e| e.to_string())?;
        let b = s.read_row(u).map_err(|e| e.to_string())?;
        if got != a.and(&b) || before.ok() != Some((a, b)) {
            return Err(format!("rows ({l}, {u}) disagree with independent reads"));
        }
    }
    Ok("1000 random row pairs".into())
}

fn accumulator_conservation(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xACC);
    let cfg = SegmentConfig::default();
    for _ in 0..1000 {
        let w = random_wordline(&mut rng);
        let total: u32 = popcount_segments(&w, &cfg).iter().sum();
        let acc = accumulate(&w, &cfg, &CorrectionVector::zeros(cfg.count()))
            .map_err(|e| e.to_string())?;
        if total != w.count_ones() || acc != total {
            return Err(format!(
                "segment sum {total} vs popcount {}",
                w.count_ones()
            ));
        }
    }
    Ok("1000 random wordlines".into())
}

fn pipeline_delay(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x919E);
    let cfg = SegmentConfig::default();
    let inputs: Vec<_> = (0..200)
        .map(|_| {
            rng.gen_bool(0.7).then(|| {
                let corr = (0..cfg.count()).map(|_| rng.gen_range(0..=2)).collect();
                (
                    random_wordline(&mut rng),
                    CorrectionVector::new(corr).expect("bounded"),
                )
            })
        })
        .collect();
    let out = run_schedule(cfg, &inputs).map_err(|e| e.to_string())?;
    for (t, item) in inputs.iter().enumerate() {
        let expect = match item {
            Some((w, c)) => Some(accumulate(w, &cfg, c).map_err(|e| e.to_string())?),
            None => None,
        };
        if out[t + 2] != expect {
            return Err(format!("cycle {} output differs from input {t}", t + 2));
        }
    }
    if out[0].is_some() || out[1].is_some() {
        return Err("output before the pipeline filled".into());
    }
    Ok("200-cycle schedule with bubbles".into())
}

fn engine_oracle(table: &BPCodeTable, seed: u64) -> Result<String, String> {
    let table = Arc::new(table.compress());
    let cfg = EngineConfig::default();
    let digit = |k: u8| BPDigit::new(k).expect("digit");
    for i in 0..10 {
        for j in 0..10 {
            let job = MatMulJob::new(
                Matrix::filled(1, 1, digit(i)),
                Matrix::filled(1, 1, digit(j)),
                1.0,
                1.0,
                table.clone(),
            )
            .map_err(|e| e.to_string())?;
            let (o, _) = run_matmul(&job, &cfg).map_err(|e| e.to_string())?;
            if o != oracle_matmul(&job) {
                return Err(format!("1x1x1 job ({i}, {j})"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE61);
    for trial in 0..20 {
        let (m, k, n) = (
            rng.gen_range(1..=8),
            rng.gen_range(1..=70),
            rng.gen_range(1..=8),
        );
        let mut d = |r, c| Matrix::from_fn(r, c, |_, _| digit(rng.gen_range(0..10)));
        let l = d(m, k);
        let u = d(k, n);
        let job = MatMulJob::new(l, u, 1.0, 1.0, table.clone()).map_err(|e| e.to_string())?;
        let (o, _) = run_matmul(&job, &cfg).map_err(|e| e.to_string())?;
        if o != oracle_matmul(&job) {
            return Err(format!("random job {trial} ({m}x{k}x{n})"));
        }
    }
    Ok("100 single-element jobs, 20 random jobs".into())
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name} = {got:.4}, expected {want} +/- {tol}"))
    }
}

fn energy_reproduction(c: &EnergyConstants) -> Result<String, String> {
    use reference::*;
    let mac = mac_energy_per_bit(c);
    within("MAC energy", mac, MAC_FJ_PER_BIT, ENERGY_TOL_FJ)?;
    within(
        "SC-MUL with decode",
        scmul_with_decode_per_bit(c),
        SCMUL_WITH_DECODE_FJ_PER_BIT,
        ENERGY_TOL_FJ,
    )?;
    let e = efficiency(c);
    within(
        "efficiency",
        e.tops_per_w_per_bit,
        TOPS_PER_W_PER_BIT,
        TOPS_PER_W_TOL,
    )?;
    within(
        "BP8 efficiency",
        e.gops_per_w_bp8(),
        GOPS_PER_W_BP8,
        GOPS_PER_W_BP8 * BP8_REL_TOL,
    )?;
    within(
        "accumulator from power",
        accum_energy_from_power(c),
        ACCUM_FJ_PER_BIT,
        ENERGY_TOL_FJ,
    )?;
    within(
        "accumulator constant",
        c.accum_fj_per_bit,
        ACCUM_FJ_PER_BIT,
        ENERGY_TOL_FJ,
    )?;
    within(
        "SC-MUL/read ratio",
        scmul_read_ratio(c),
        SCMUL_READ_RATIO,
        RATIO_TOL,
    )?;
    Ok(format!(
        "MAC {mac:.3} fJ/bit, {:.3} TOPS/W per bit, {:.1} GOPS/W at BP8",
        e.tops_per_w_per_bit,
        e.gops_per_w_bp8()
    ))
}

fn node_scaling(c: &EnergyConstants, scaling: &ScalingTable) -> Result<String, String> {
    let base = efficiency(c).tops_per_w_per_bit;
    let s22 = scale_to_node(c, scaling, "22nm").map_err(|e| e.to_string())?;
    let gain = efficiency(&s22).tops_per_w_per_bit / base;
    if gain < reference::NODE_GAIN_22NM {
        return Err(format!(
            "22nm gain {gain:.1}x below {}x",
            reference::NODE_GAIN_22NM
        ));
    }
    let id = scale_to_node(c, scaling, "180nm").map_err(|e| e.to_string())?;
    if id != *c {
        return Err("180nm entry is not the identity".into());
    }
    Ok(format!("22nm gain {gain:.1}x"))
}
