use std::ops::Range;

use super::{EngineConfig, MatMulJob};
use crate::error::{Dimension, Error, Result};
use crate::sram_core::AddressProgram;

/// Upper bounds on the L rows and U columns a single tile holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileShape {
    pub l_rows: usize,
    pub u_cols: usize,
}

impl TileShape {
    /// Fill both halves of the subarray.
    pub fn full(config: &EngineConfig) -> Self {
        Self {
            l_rows: config.rows / 2,
            u_cols: config.rows / 2,
        }
    }
}

/// L rows `l_rows` and U columns `u_cols` of K-chunk `k_chunk`, resident in
/// one subarray for one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub pass: usize,
    pub subarray: usize,
    pub k_chunk: usize,
    pub l_rows: Range<usize>,
    pub u_cols: Range<usize>,
}

impl Tile {
    /// L-major sweep: latch one L row, AND it against every resident U row.
    pub fn program(&self) -> AddressProgram {
        let n = self.u_cols.len();
        (0..self.l_rows.len())
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .collect()
    }

    pub fn wordlines(&self) -> usize {
        self.l_rows.len() + self.u_cols.len()
    }

    pub fn and_ops(&self) -> usize {
        self.l_rows.len() * self.u_cols.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub k_chunks: usize,
    pub codes_per_wordline: usize,
    pub tiles: Vec<Tile>,
    pub passes: usize,
}

impl TilePlan {
    /// K after zero padding to whole wordlines.
    pub fn padded_k(&self) -> usize {
        self.k_chunks * self.codes_per_wordline
    }

    pub fn tiles_in_pass(&self, pass: usize) -> impl Iterator<Item = &Tile> {
        self.tiles.iter().filter(move |t| t.pass == pass)
    }

    pub fn subarrays_used(&self) -> usize {
        let mut used: Vec<usize> = self.tiles.iter().map(|t| t.subarray).collect();
        used.sort_unstable();
        used.dedup();
        used.len()
    }

    /// Whether every `(i, j, k_chunk)` triple is covered exactly once.
    pub fn covers_exactly_once(&self) -> bool {
        let mut seen = vec![0u8; self.m * self.n * self.k_chunks];
        for t in &self.tiles {
            for i in t.l_rows.clone() {
                for j in t.u_cols.clone() {
                    seen[(i * self.n + j) * self.k_chunks + t.k_chunk] += 1;
                }
            }
        }
        seen.iter().all(|&c| c == 1)
    }
}

/// Plan with full-size tiles.
pub fn plan_tiling(job: &MatMulJob, config: &EngineConfig) -> Result<TilePlan> {
    plan_tiling_with(job.m(), job.k(), job.n(), config, TileShape::full(config))
}

/// Plan a `M x K` by `K x N` product with tiles no larger than `shape`.
///
/// Tiles are ordered by K-chunk, then L block, then U block, and dealt to
/// subarrays round robin; without `multipass` the whole job must be
/// resident at once.
pub fn plan_tiling_with(
    m: usize,
    k: usize,
    n: usize,
    config: &EngineConfig,
    shape: TileShape,
) -> Result<TilePlan> {
    config.validate()?;
    let half = config.rows / 2;
    if shape.l_rows == 0 || shape.u_cols == 0 || shape.l_rows > half || shape.u_cols > half {
        return Err(Error::Config(format!(
            "tile shape {}x{} does not fit {half} rows per region",
            shape.l_rows, shape.u_cols
        )));
    }
    let codes = config.segment.count();
    if config.segment.width() != 8 {
        return Err(Error::Config(format!(
            "BP8 packing needs 8-bit segments, got {}",
            config.segment.width()
        )));
    }
    if m == 0 || k == 0 || n == 0 {
        return Ok(TilePlan {
            m,
            k,
            n,
            k_chunks: 0,
            codes_per_wordline: codes,
            tiles: Vec::new(),
            passes: 0,
        });
    }

    let k_chunks = k.div_ceil(codes);
    let m_blocks = m.div_ceil(shape.l_rows);
    let n_blocks = n.div_ceil(shape.u_cols);
    let total = k_chunks * m_blocks * n_blocks;
    let available = config.subarrays();
    if total > available && !config.multipass {
        let dimension = [
            (k_chunks, Dimension::K),
            (m_blocks, Dimension::M),
            (n_blocks, Dimension::N),
        ]
        .iter()
        .max_by_key(|(blocks, d)| (*blocks, matches!(d, Dimension::K)))
        .map(|&(_, d)| d)
        .expect("non-empty");
        return Err(Error::Capacity {
            dimension,
            required: total,
            available,
        });
    }

    let mut tiles = Vec::with_capacity(total);
    for c in 0..k_chunks {
        for mb in 0..m_blocks {
            for nb in 0..n_blocks {
                let idx = tiles.len();
                tiles.push(Tile {
                    pass: idx / available,
                    subarray: idx % available,
                    k_chunk: c,
                    l_rows: mb * shape.l_rows..((mb + 1) * shape.l_rows).min(m),
                    u_cols: nb * shape.u_cols..((nb + 1) * shape.u_cols).min(n),
                });
            }
        }
    }
    Ok(TilePlan {
        m,
        k,
        n,
        k_chunks,
        codes_per_wordline: codes,
        passes: total.div_ceil(available),
        tiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(m: usize, k: usize, n: usize, config: &EngineConfig) -> Result<TilePlan> {
        plan_tiling_with(m, k, n, config, TileShape::full(config))
    }

    #[test]
    fn minimal_tile() {
        let p = plan(1, 32, 1, &EngineConfig::default()).unwrap();
        assert_eq!(p.tiles.len(), 1);
        assert_eq!(p.tiles[0].wordlines(), 2);
        assert_eq!(p.tiles[0].and_ops(), 1);
        assert!(p.covers_exactly_once());
    }

    #[test]
    fn two_rows_by_64_columns() {
        let p = plan(2, 32, 64, &EngineConfig::default()).unwrap();
        assert_eq!(p.tiles.len(), 1);
        let prog = p.tiles[0].program();
        assert_eq!(prog.len(), 128);
        let mut s = crate::sram_core::Subarray::new();
        let (_, trace) = s.issue_trace(&prog).unwrap();
        assert_eq!(trace.latch_loads(), 2);
    }

    #[test]
    fn k_padding() {
        let p = plan(3, 40, 2, &EngineConfig::default()).unwrap();
        assert_eq!(p.k_chunks, 2);
        assert_eq!(p.padded_k(), 64);
    }

    #[test]
    fn capacity_error_names_dimension() {
        let cfg = EngineConfig::default();
        let err = plan(1, 32 * 33, 1, &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::Capacity {
                dimension: Dimension::K,
                required: 33,
                available: 32
            }
        ));
        let err = plan(64 * 40, 32, 1, &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::Capacity {
                dimension: Dimension::M,
                ..
            }
        ));
        let err = plan(1, 32, 64 * 40, &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::Capacity {
                dimension: Dimension::N,
                ..
            }
        ));
        assert!(err.to_string().contains("limiting dimension N"));
    }

    #[test]
    fn multipass_splits_into_passes() {
        let cfg = EngineConfig {
            multipass: true,
            ..EngineConfig::default()
        };
        let p = plan(130, 96, 70, &cfg).unwrap();
        assert_eq!(p.tiles.len(), 3 * 3 * 2);
        assert_eq!(p.passes, 1);
        let p = plan(1, 32 * 70, 1, &cfg).unwrap();
        assert_eq!(p.passes, 3);
        assert_eq!(p.tiles_in_pass(2).count(), 6);
        assert!(p.covers_exactly_once());
    }

    #[test]
    fn degenerate_dimensions() {
        let p = plan(0, 5, 5, &EngineConfig::default()).unwrap();
        assert!(p.tiles.is_empty());
        assert_eq!(p.passes, 0);
    }

    #[test]
    fn shape_validation() {
        let cfg = EngineConfig::default();
        assert!(plan_tiling_with(
            1,
            1,
            1,
            &cfg,
            TileShape {
                l_rows: 65,
                u_cols: 1
            }
        )
        .is_err());
        assert!(plan_tiling_with(
            1,
            1,
            1,
            &cfg,
            TileShape {
                l_rows: 1,
                u_cols: 0
            }
        )
        .is_err());
        let odd = EngineConfig {
            segment: crate::accumulator::SegmentConfig::new(16).unwrap(),
            ..cfg
        };
        assert!(plan(1, 1, 1, &odd).is_err());
    }

    #[test]
    fn small_tiles_still_cover() {
        let cfg = EngineConfig::default();
        let p = plan_tiling_with(
            9,
            70,
            7,
            &cfg,
            TileShape {
                l_rows: 4,
                u_cols: 3,
            },
        )
        .unwrap();
        assert_eq!(p.tiles.len(), 3 * 3 * 3);
        assert!(p.covers_exactly_once());
    }
}
