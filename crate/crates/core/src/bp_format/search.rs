//! Search for code tables whose AND-popcount products track `i*j/100`.
//!
//! The error of a pair is `|popcount(L_i & R_j)/10 - i*j/100|`. Internally it
//! is kept as the integer `|10*popcount - i*j|` (hundredths), so objectives
//! compare exactly and the search is bit-for-bit reproducible.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::code::{mul_popcount, BPCode, Bias, CodeWidth};
use super::table::{BPCodeTable, TableMetadata};
use crate::error::Error;

const WIDTH: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Mean absolute pair error over the 100 digit pairs.
    #[default]
    MeanAbs,
    /// Worst pair error, mean as tie-break.
    Max,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::MeanAbs => f.write_str("mean-abs"),
            Objective::Max => f.write_str("max"),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "mean-abs" | "mean" => Ok(Objective::MeanAbs),
            "max" => Ok(Objective::Max),
            other => Err(Error::Table(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub objective: Objective,
    /// Independent random starting tables. At least one is always run.
    pub restarts: usize,
    /// Cap on full best-response sweeps per restart.
    pub max_rounds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            objective: Objective::MeanAbs,
            restarts: 256,
            max_rounds: 64,
        }
    }
}

/// Brute-force score of a table over all 100 digit pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableScore {
    pub mean_abs: f64,
    pub max_abs: f64,
    /// Error of the (5, 5) pair, a handy single-point diagnostic.
    pub center: f64,
}

impl TableScore {
    pub fn objective(&self, objective: Objective) -> f64 {
        match objective {
            Objective::MeanAbs => self.mean_abs,
            Objective::Max => self.max_abs,
        }
    }
}

/// The 100-pair evaluation oracle. Works for either width.
pub fn evaluate_table(table: &BPCodeTable) -> TableScore {
    // Errors in hundredths, |10 * popcount - i * j|, kept integral so the
    // reported scores are exact decimals.
    let mut sum = 0u32;
    let mut max = 0u32;
    let mut center = 0u32;
    for i in 0..10 {
        for j in 0..10 {
            let l = &table.dataset(Bias::LeftBiased)[i];
            let r = &table.dataset(Bias::RightBiased)[j];
            let p = mul_popcount(l, r).expect("uniform width");
            let err = (10 * p).abs_diff((i * j) as u32);
            sum += err;
            max = max.max(err);
            if i == 5 && j == 5 {
                center = err;
            }
        }
    }
    TableScore {
        mean_abs: sum as f64 / 10_000.0,
        max_abs: max as f64 / 100.0,
        center: center as f64 / 100.0,
    }
}

/// Left-aligned ones for the left dataset, right-aligned for the right one.
/// Products collapse to `max(0, i + j - 10)`; used as a quality floor.
pub fn thermometer_table() -> BPCodeTable {
    let left = std::array::from_fn(|k| BPCode::w10(Bias::LeftBiased, (1u16 << k) - 1));
    let right = std::array::from_fn(|k| {
        BPCode::w10(Bias::RightBiased, ((1u16 << k) - 1) << (WIDTH as usize - k))
    });
    BPCodeTable::new_unchecked(
        CodeWidth::W10,
        left,
        right,
        TableMetadata {
            provenance: "thermometer baseline".into(),
            ..TableMetadata::default()
        },
    )
}

/// Derives a BP10 table by multi-start coordinate descent.
///
/// Each step replaces one code by the exact best code for its digit given
/// the other dataset, enumerating all `C(10, k)` placements. Ties prefer
/// ones toward the dataset's side, then the lowest mask. Deterministic for a
/// fixed `(config, seed)`.
pub fn derive_code_table(config: &SearchConfig, seed: u64) -> BPCodeTable {
    let candidates = candidate_sets();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Key, [u16; 10], [u16; 10])> = None;

    for _ in 0..config.restarts.max(1) {
        let mut left: [u16; 10] =
            std::array::from_fn(|k| candidates[k][rng.gen_range(0..candidates[k].len())]);
        let mut right: [u16; 10] =
            std::array::from_fn(|k| candidates[k][rng.gen_range(0..candidates[k].len())]);

        for _ in 0..config.max_rounds.max(1) {
            let mut changed = false;
            for i in 0..10 {
                changed |=
                    best_response(&mut left, i, &right, Bias::LeftBiased, config, &candidates);
            }
            for j in 0..10 {
                changed |=
                    best_response(&mut right, j, &left, Bias::RightBiased, config, &candidates);
            }
            if !changed {
                break;
            }
        }

        let key = table_key(&left, &right, config.objective);
        if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
            best = Some((key, left, right));
        }
    }

    let (_, left, right) = best.expect("at least one restart");
    let left = left.map(|m| BPCode::w10(Bias::LeftBiased, m));
    let right = right.map(|m| BPCode::w10(Bias::RightBiased, m));
    let mut table =
        BPCodeTable::new_unchecked(CodeWidth::W10, left, right, TableMetadata::default());
    let score = evaluate_table(&table);
    table.metadata = TableMetadata {
        provenance: format!(
            "coordinate-descent search, {} restarts, {} max rounds",
            config.restarts.max(1),
            config.max_rounds.max(1)
        ),
        seed: Some(seed),
        objective: Some(config.objective.to_string()),
        objective_value: Some(score.objective(config.objective)),
        mean_abs_error: Some(score.mean_abs),
        max_abs_error: Some(score.max_abs),
    };
    table
}

type Key = (u32, u32, u32);

/// Integer pair error in hundredths.
fn pair_err(ones: u32, i: usize, j: usize) -> u32 {
    (10 * ones as i32 - (i * j) as i32).unsigned_abs()
}

/// Sum of column indices of the ones, mirrored for the right dataset so that
/// smaller always means "closer to the dataset's own side".
fn side_key(mask: u16, bias: Bias) -> u32 {
    (0..WIDTH)
        .filter(|&b| mask >> b & 1 == 1)
        .map(|b| match bias {
            Bias::LeftBiased => b,
            Bias::RightBiased => WIDTH - 1 - b,
        })
        .sum()
}

fn line_key(errs: impl Iterator<Item = u32>, objective: Objective) -> (u32, u32) {
    let (sum, max) = errs.fold((0, 0), |(s, m), e| (s + e, m.max(e)));
    match objective {
        Objective::MeanAbs => (sum, 0),
        Objective::Max => (max, sum),
    }
}

/// Replaces `own[digit]` by its best candidate. Returns whether it changed.
fn best_response(
    own: &mut [u16; 10],
    digit: usize,
    other: &[u16; 10],
    bias: Bias,
    config: &SearchConfig,
    candidates: &[Vec<u16>; 10],
) -> bool {
    let score = |mask: u16| -> Key {
        let errs = other.iter().enumerate().map(|(o, &m)| {
            let (i, j) = match bias {
                Bias::LeftBiased => (digit, o),
                Bias::RightBiased => (o, digit),
            };
            pair_err((mask & m).count_ones(), i, j)
        });
        let (a, b) = line_key(errs, config.objective);
        (a, b, side_key(mask, bias))
    };
    let current = score(own[digit]);
    let mut best = (current, own[digit]);
    for &cand in &candidates[digit] {
        let key = score(cand);
        if key < best.0 {
            best = (key, cand);
        }
    }
    let changed = best.1 != own[digit];
    own[digit] = best.1;
    changed
}

fn table_key(left: &[u16; 10], right: &[u16; 10], objective: Objective) -> Key {
    let errs = (0..10)
        .flat_map(|i| (0..10).map(move |j| pair_err((left[i] & right[j]).count_ones(), i, j)));
    let (a, b) = line_key(errs, objective);
    let side = left
        .iter()
        .map(|&m| side_key(m, Bias::LeftBiased))
        .sum::<u32>()
        + right
            .iter()
            .map(|&m| side_key(m, Bias::RightBiased))
            .sum::<u32>();
    (a, b, side)
}

/// All 10-bit masks grouped by popcount, ascending.
fn candidate_sets() -> [Vec<u16>; 10] {
    let mut sets: [Vec<u16>; 10] = Default::default();
    for mask in 0u16..(1 << WIDTH) {
        let k = mask.count_ones() as usize;
        if k < 10 {
            sets[k].push(mask);
        }
    }
    sets
}
