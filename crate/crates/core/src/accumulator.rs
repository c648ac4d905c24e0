//! SC-to-binary accumulator: parallel counters over `n` segments of `m` bits,
//! followed by an adder tree, split into two pipeline stages.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sram_core::{Wordline, COLS};

pub const PIPELINE_DEPTH: usize = 2;

/// Segmentation of a 256-bit wordline into `n` segments of `m` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SegmentConfig {
    m: usize,
}

impl SegmentConfig {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || !COLS.is_multiple_of(m) {
            return Err(Error::BadSegmentWidth(m));
        }
        Ok(Self { m })
    }

    pub fn width(&self) -> usize {
        self.m
    }

    pub fn count(&self) -> usize {
        COLS / self.m
    }
}

impl Default for SegmentConfig {
    /// 32 segments of 8 bits, one per BP8 product.
    fn default() -> Self {
        Self { m: 8 }
    }
}

impl TryFrom<usize> for SegmentConfig {
    type Error = Error;

    fn try_from(m: usize) -> Result<Self> {
        Self::new(m)
    }
}

impl From<SegmentConfig> for usize {
    fn from(c: SegmentConfig) -> usize {
        c.m
    }
}

/// Per-segment implicit-bit contributions of BP8 products, each 0..=2.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorrectionVector(Vec<u8>);

impl CorrectionVector {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&e| e > 2) {
            return Err(Error::CorrectionValue(bad));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Parallel-counter layer: ones in `[i*m, (i+1)*m)` for each segment `i`.
pub fn popcount_segments(w: &Wordline, cfg: &SegmentConfig) -> Vec<u32> {
    let m = cfg.width();
    let words = w.words();
    if m >= 64 {
        let per = m / 64;
        return words
            .chunks(per)
            .map(|c| c.iter().map(|x| x.count_ones()).sum())
            .collect();
    }
    let mask = (1u64 << m) - 1;
    let per_word = 64 / m;
    words
        .iter()
        .flat_map(|&word| (0..per_word).map(move |s| (word >> (s * m) & mask).count_ones()))
        .collect()
}

/// Pairwise reduction, level by level, like a balanced adder tree.
pub fn adder_tree(values: &[u32]) -> u32 {
    let mut level: Vec<u32> = values.to_vec();
    let mut len = level.len();
    while len > 1 {
        for i in 0..len.div_ceil(2) {
            level[i] = level[2 * i]
                + level
                    .get(2 * i + 1)
                    .filter(|_| 2 * i + 1 < len)
                    .copied()
                    .unwrap_or(0);
        }
        len = len.div_ceil(2);
    }
    level.first().copied().unwrap_or(0)
}

fn corrected_counts(
    w: &Wordline,
    cfg: &SegmentConfig,
    correction: &CorrectionVector,
) -> Result<Vec<u32>> {
    if correction.len() != cfg.count() {
        return Err(Error::CorrectionLength {
            expected: cfg.count(),
            got: correction.len(),
        });
    }
    let mut counts = popcount_segments(w, cfg);
    for (c, &k) in counts.iter_mut().zip(correction.as_slice()) {
        *c += k as u32;
    }
    Ok(counts)
}

/// Combinational accumulate: `sum_i (count_i + correction_i)`.
pub fn accumulate(w: &Wordline, cfg: &SegmentConfig, correction: &CorrectionVector) -> Result<u32> {
    Ok(adder_tree(&corrected_counts(w, cfg, correction)?))
}

/// Two-stage pipeline. Stage one holds the corrected segment counts, stage
/// two the adder-tree sum. `T` tags each input so callers can route the
/// result; tags come out in acceptance order.
#[derive(Debug, Clone)]
pub struct PipelineState<T> {
    cfg: SegmentConfig,
    counters: Option<(Vec<u32>, T)>,
    tree: Option<(u32, T)>,
    cycle: u64,
    accepted: u64,
    emitted: u64,
}

impl<T> PipelineState<T> {
    pub fn new(cfg: SegmentConfig) -> Self {
        Self {
            cfg,
            counters: None,
            tree: None,
            cycle: 0,
            accepted: 0,
            emitted: 0,
        }
    }

    /// Advances one clock. An input accepted on step `t` is emitted on step `t + 2`.
    pub fn step(
        &mut self,
        input: Option<(&Wordline, &CorrectionVector, T)>,
    ) -> Result<Option<(u32, T)>> {
        // Validate before touching any register so a bad input leaves the state intact.
        let stage1 = match input {
            Some((w, corr, tag)) => Some((corrected_counts(w, &self.cfg, corr)?, tag)),
            None => None,
        };
        let out = self.tree.take();
        self.tree = self
            .counters
            .take()
            .map(|(counts, tag)| (adder_tree(&counts), tag));
        self.counters = stage1;
        if self.counters.is_some() {
            self.accepted += 1;
        }
        if out.is_some() {
            self.emitted += 1;
        }
        self.cycle += 1;
        Ok(out)
    }

    /// Steps with bubbles until empty, returning what drained.
    pub fn drain(&mut self) -> Vec<(u32, T)> {
        let mut out = Vec::new();
        while !self.is_empty() {
            if let Some(v) = self.step(None).expect("bubbles never fail") {
                out.push(v);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_none() && self.tree.is_none()
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn in_flight(&self) -> u64 {
        self.accepted - self.emitted
    }
}

/// Reference schedule: feeds `inputs` (with `None` as bubbles) and returns,
/// per step, the emitted value.
pub fn run_schedule(
    cfg: SegmentConfig,
    inputs: &[Option<(Wordline, CorrectionVector)>],
) -> Result<Vec<Option<u32>>> {
    let mut p = PipelineState::new(cfg);
    let mut out = Vec::with_capacity(inputs.len() + PIPELINE_DEPTH);
    let mut queue: VecDeque<_> = inputs.iter().collect();
    while let Some(item) = queue.pop_front() {
        let r = p.step(item.as_ref().map(|(w, c)| (w, c, ())))?;
        out.push(r.map(|(v, _)| v));
    }
    for _ in 0..PIPELINE_DEPTH {
        out.push(p.step(None)?.map(|(v, _)| v));
    }
    Ok(out)
}
