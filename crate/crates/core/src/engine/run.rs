use rayon::prelude::*;

use super::plan::{plan_tiling, Tile, TilePlan};
use super::{CycleStats, EngineConfig, MatMulJob};
use crate::accumulator::{CorrectionVector, PipelineState, PIPELINE_DEPTH};
use crate::bp_format::{BPDigit, Bias};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sram_core::{AddressTrace, LayoutMap, OpCounts, Subarray, Wordline};

/// Address trace of one tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileTrace {
    pub pass: usize,
    pub subarray: usize,
    pub trace: AddressTrace,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub o_int: Matrix<u64>,
    pub stats: CycleStats,
    /// Populated only when traces were requested.
    pub traces: Vec<TileTrace>,
}

struct TileResult {
    partials: Vec<(usize, usize, u32)>,
    counts: OpCounts,
    pipeline_cycles: u64,
    trace: AddressTrace,
}

/// Plans with full tiles and runs the job.
pub fn run_matmul(job: &MatMulJob, config: &EngineConfig) -> Result<(Matrix<u64>, CycleStats)> {
    let plan = plan_tiling(job, config)?;
    let out = run_plan(job, config, &plan, false)?;
    Ok((out.o_int, out.stats))
}

/// Executes a plan. Tiles run in parallel; partial sums are reduced in tile
/// order afterwards, so the result does not depend on the worker count.
pub fn run_plan(
    job: &MatMulJob,
    config: &EngineConfig,
    plan: &TilePlan,
    collect_traces: bool,
) -> Result<RunOutput> {
    if (plan.m, plan.k, plan.n) != (job.m(), job.k(), job.n()) {
        return Err(Error::Shape("plan does not match job".into()));
    }
    let layout = LayoutMap::new(config.rows)?;
    let results = plan
        .tiles
        .par_iter()
        .map(|tile| run_tile(job, config, plan, layout, tile))
        .collect::<Result<Vec<_>>>()?;

    let mut o_int = Matrix::filled(job.m(), job.n(), 0u64);
    let mut counts = OpCounts::default();
    let mut pipeline_cycles = 0;
    let mut traces = Vec::new();
    for (tile, r) in plan.tiles.iter().zip(results) {
        for (i, j, v) in r.partials {
            *o_int.get_mut(i, j) += v as u64;
        }
        counts += r.counts;
        pipeline_cycles += r.pipeline_cycles;
        if collect_traces {
            traces.push(TileTrace {
                pass: tile.pass,
                subarray: tile.subarray,
                trace: r.trace,
            });
        }
    }

    let stats = CycleStats {
        write_ops: counts.writes,
        read_ops: counts.reads,
        scmul_ops: counts.scmul,
        latch_loads: counts.latch_loads,
        decode_events: counts.upper_decodes,
        accumulate_ops: counts.scmul,
        pipeline_cycles,
        wall_cycles: wall_cycles(plan),
        passes: plan.passes as u64,
        subarrays_used: plan.subarrays_used() as u64,
    };
    Ok(RunOutput {
        o_int,
        stats,
        traces,
    })
}

/// Per pass: parallel loading (longest tile load), then lockstep compute.
/// Subarrays `2p` and `2p + 1` share a decoder and so step through a
/// common address sequence; the pass lasts as long as its longest program,
/// plus the pipeline drain.
fn wall_cycles(plan: &TilePlan) -> u64 {
    (0..plan.passes)
        .map(|p| {
            let load = plan
                .tiles_in_pass(p)
                .map(Tile::wordlines)
                .max()
                .unwrap_or(0);
            let compute = plan.tiles_in_pass(p).map(Tile::and_ops).max().unwrap_or(0);
            (load + compute + PIPELINE_DEPTH) as u64
        })
        .sum()
}

/// Digits of one L row (or U column) restricted to a K-chunk, zero padded.
fn chunk_digits(
    k_chunk: usize,
    codes: usize,
    k: usize,
    digit_at: impl Fn(usize) -> BPDigit,
) -> Vec<BPDigit> {
    (0..codes)
        .map(|e| {
            let kk = k_chunk * codes + e;
            if kk < k {
                digit_at(kk)
            } else {
                BPDigit::ZERO
            }
        })
        .collect()
}

/// Packs one chunk of codes into a wordline; returns it with the implicit bits.
fn pack(job: &MatMulJob, digits: &[BPDigit], bias: Bias) -> (Wordline, Vec<(bool, bool)>) {
    let table = job.table();
    let mut w = Wordline::zeros();
    let mut implicits = Vec::with_capacity(digits.len());
    for (e, &d) in digits.iter().enumerate() {
        let code = table.encode(d, bias);
        w.set_field(e * 8, 8, code.raw_bits() as u64);
        implicits.push((code.implicit_left, code.implicit_right));
    }
    (w, implicits)
}

fn run_tile(
    job: &MatMulJob,
    config: &EngineConfig,
    plan: &TilePlan,
    layout: LayoutMap,
    tile: &Tile,
) -> Result<TileResult> {
    let codes = plan.codes_per_wordline;
    let mut sub = Subarray::with_layout(layout);

    let mut l_implicit = Vec::with_capacity(tile.l_rows.len());
    for (a, i) in tile.l_rows.clone().enumerate() {
        let digits = chunk_digits(tile.k_chunk, codes, job.k(), |kk| *job.l.get(i, kk));
        let (w, imp) = pack(job, &digits, Bias::LeftBiased);
        sub.write_row(layout.l_mem_row(a)?, w)?;
        l_implicit.push(imp);
    }
    let mut u_implicit = Vec::with_capacity(tile.u_cols.len());
    for (b, j) in tile.u_cols.clone().enumerate() {
        let digits = chunk_digits(tile.k_chunk, codes, job.k(), |kk| *job.u.get(kk, j));
        let (w, imp) = pack(job, &digits, Bias::RightBiased);
        sub.write_row(layout.u_mem_row(b)?, w)?;
        u_implicit.push(imp);
    }

    let program = tile.program();
    let (products, trace) = sub.issue_trace(&program)?;

    let mut pipeline = PipelineState::new(config.segment);
    let mut partials = Vec::with_capacity(products.len());
    for (w, &(a, b)) in products.iter().zip(&program) {
        let correction = CorrectionVector::new(
            l_implicit[a]
                .iter()
                .zip(&u_implicit[b])
                .map(|(&(ll, lr), &(ul, ur))| (ll && ul) as u8 + (lr && ur) as u8)
                .collect(),
        )?;
        let tag = (tile.l_rows.start + a, tile.u_cols.start + b);
        if let Some((v, (i, j))) = pipeline.step(Some((w, &correction, tag)))? {
            partials.push((i, j, v));
        }
    }
    partials.extend(pipeline.drain().into_iter().map(|(v, (i, j))| (i, j, v)));

    Ok(TileResult {
        partials,
        counts: sub.counts(),
        pipeline_cycles: pipeline.cycle(),
        trace,
    })
}
