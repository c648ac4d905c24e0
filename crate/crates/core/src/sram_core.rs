//! Functional model of one SRAM subarray with bitline AND.
//!
//! The rows are split in two equal halves. The upper half (rows `0..R/2`)
//! holds weight wordlines (U) and the lower half (rows `R/2..R`) holds input
//! wordlines (L). Each half has its own half-size decoder; the lower one can
//! latch its address so one L row stays active while U rows are swept.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COLS: usize = 256;
pub const ROWS: usize = 128;
const WORDS: usize = COLS / 64;

/// One 256-bit row. Bit `i` is column `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Wordline([u64; WORDS]);

impl Wordline {
    pub const fn zeros() -> Self {
        Self([0; WORDS])
    }

    pub const fn ones() -> Self {
        Self([u64::MAX; WORDS])
    }

    /// 0101... starting with column 0 = 0.
    pub const fn checkerboard() -> Self {
        Self([0xAAAA_AAAA_AAAA_AAAA; WORDS])
    }

    pub const fn from_words(words: [u64; WORDS]) -> Self {
        Self(words)
    }

    pub fn words(&self) -> &[u64; WORDS] {
        &self.0
    }

    pub fn get(&self, col: usize) -> bool {
        self.0[col / 64] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, col: usize, value: bool) {
        let mask = 1u64 << (col % 64);
        if value {
            self.0[col / 64] |= mask;
        } else {
            self.0[col / 64] &= !mask;
        }
    }

    /// Writes the low `width` bits of `bits` starting at column `start`.
    pub fn set_field(&mut self, start: usize, width: usize, bits: u64) {
        for b in 0..width {
            self.set(start + b, bits >> b & 1 == 1);
        }
    }

    pub fn and(&self, other: &Wordline) -> Wordline {
        Wordline(std::array::from_fn(|w| self.0[w] & other.0[w]))
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

impl fmt::Debug for Wordline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wordline(")?;
        for w in self.0.iter().rev() {
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}

/// Sense amplifier configuration. Functional flag only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SenseMode {
    /// BL against BLb, used for plain reads.
    #[default]
    Differential,
    /// BL against a reference voltage, used for bitline compute.
    SingleEnded,
}

/// U rows in the upper half, L rows in the lower half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutMap {
    rows: usize,
}

impl LayoutMap {
    pub fn new(rows: usize) -> Result<Self> {
        if rows < 2 || !rows.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "row count {rows} must be even and >= 2"
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn half(&self) -> usize {
        self.rows / 2
    }

    pub fn u_region(&self) -> Range<usize> {
        0..self.half()
    }

    pub fn l_region(&self) -> Range<usize> {
        self.half()..self.rows
    }

    /// Memory row holding `L.Row(i)`.
    pub fn l_mem_row(&self, i: usize) -> Result<usize> {
        if i >= self.half() {
            return Err(Error::RowOutOfRange {
                row: self.half() + i,
                rows: self.rows,
            });
        }
        Ok(self.half() + i)
    }

    /// Memory row holding `U.Row(j)`.
    pub fn u_mem_row(&self, j: usize) -> Result<usize> {
        if j >= self.half() {
            return Err(Error::RowOutOfRange {
                row: j,
                rows: self.half(),
            });
        }
        Ok(j)
    }
}

impl Default for LayoutMap {
    fn default() -> Self {
        Self { rows: ROWS }
    }
}

/// State of the split decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecoderState {
    /// Latched L-region memory row.
    pub lower_latch: Option<usize>,
    /// Last U-region memory row driven.
    pub last_upper: Option<usize>,
}

/// Event counters used for energy accounting. Each event covers one full
/// wordline (256 bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCounts {
    pub writes: u64,
    pub reads: u64,
    pub scmul: u64,
    pub upper_decodes: u64,
    pub latch_loads: u64,
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.writes += rhs.writes;
        self.reads += rhs.reads;
        self.scmul += rhs.scmul;
        self.upper_decodes += rhs.upper_decodes;
        self.latch_loads += rhs.latch_loads;
    }
}

/// One `(L.Row(i), U.Row(j))` pair, in logical region indices.
pub type AddressProgram = Vec<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Latch { mem_row: usize },
    And { l_mem_row: usize, u_mem_row: usize },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Latch { mem_row } => write!(f, "LATCH {mem_row}"),
            TraceEvent::And {
                l_mem_row,
                u_mem_row,
            } => write!(f, "AND {l_mem_row} {u_mem_row}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AddressTrace {
    pub events: Vec<TraceEvent>,
}

impl AddressTrace {
    pub fn latch_loads(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Latch { .. }))
            .count()
    }

    pub fn upper_decodes(&self) -> usize {
        self.events.len() - self.latch_loads()
    }

    /// One event per line, newline-terminated.
    pub fn dump(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}

/// Rejects programs where an L row comes back after its group ended.
pub fn check_program_grouping(program: &[(usize, usize)]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    let mut prev = None;
    for (index, &(l, _)) in program.iter().enumerate() {
        if prev != Some(l) {
            if !seen.insert(l) {
                return Err(Error::NonContiguousGroup { l_row: l, index });
            }
            prev = Some(l);
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Subarray {
    layout: LayoutMap,
    cells: Vec<Wordline>,
    pub sense_mode: SenseMode,
    counts: OpCounts,
}

impl Default for Subarray {
    fn default() -> Self {
        Self::new()
    }
}

impl Subarray {
    /// A zeroed 256C x 128R subarray.
    pub fn new() -> Self {
        Self::with_layout(LayoutMap::default())
    }

    /// A subarray with a non-default row count, e.g. the 8-row illustration.
    pub fn with_layout(layout: LayoutMap) -> Self {
        Self {
            layout,
            cells: vec![Wordline::zeros(); layout.rows()],
            sense_mode: SenseMode::Differential,
            counts: OpCounts::default(),
        }
    }

    pub fn layout(&self) -> LayoutMap {
        self.layout
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row >= self.layout.rows() {
            return Err(Error::RowOutOfRange {
                row,
                rows: self.layout.rows(),
            });
        }
        Ok(())
    }

    pub fn write_row(&mut self, row: usize, wordline: Wordline) -> Result<()> {
        self.check_row(row)?;
        self.cells[row] = wordline;
        self.counts.writes += 1;
        Ok(())
    }

    pub fn read_row(&mut self, row: usize) -> Result<Wordline> {
        self.check_row(row)?;
        self.sense_mode = SenseMode::Differential;
        self.counts.reads += 1;
        Ok(self.cells[row])
    }

    /// Stored bits without recording an access.
    pub fn peek_row(&self, row: usize) -> Result<Wordline> {
        self.check_row(row)?;
        Ok(self.cells[row])
    }

    /// Activates one L row and one U row together; the bitlines read their
    /// AND. Stored data is not modified.
    pub fn compute_and(
        &mut self,
        decoder: &mut DecoderState,
        l_row: usize,
        u_row: usize,
        latch_reuse: bool,
    ) -> Result<Wordline> {
        self.check_row(l_row)?;
        self.check_row(u_row)?;
        if !self.layout.l_region().contains(&l_row) || !self.layout.u_region().contains(&u_row) {
            return Err(Error::RegionViolation { l_row, u_row });
        }
        if latch_reuse {
            if decoder.lower_latch != Some(l_row) {
                return Err(Error::LatchMismatch {
                    requested: l_row,
                    held: decoder.lower_latch,
                });
            }
        } else {
            decoder.lower_latch = Some(l_row);
            self.counts.latch_loads += 1;
        }
        decoder.last_upper = Some(u_row);
        self.sense_mode = SenseMode::SingleEnded;
        self.counts.upper_decodes += 1;
        self.counts.scmul += 1;
        Ok(self.cells[l_row].and(&self.cells[u_row]))
    }

    /// Runs an address program of logical `(L.Row(i), U.Row(j))` pairs.
    ///
    /// The lower latch is loaded once per contiguous L group and held while
    /// the U rows of that group are swept. The whole program is validated
    /// before any row is activated.
    pub fn issue_trace(
        &mut self,
        program: &[(usize, usize)],
    ) -> Result<(Vec<Wordline>, AddressTrace)> {
        check_program_grouping(program)?;
        let mapped = program
            .iter()
            .map(|&(l, u)| Ok((self.layout.l_mem_row(l)?, self.layout.u_mem_row(u)?)))
            .collect::<Result<Vec<_>>>()?;

        let mut decoder = DecoderState::default();
        let mut outputs = Vec::with_capacity(mapped.len());
        let mut trace = AddressTrace::default();
        let mut prev_l = None;
        for (l_mem_row, u_mem_row) in mapped {
            let reuse = prev_l == Some(l_mem_row);
            if !reuse {
                trace.events.push(TraceEvent::Latch { mem_row: l_mem_row });
            }
            outputs.push(self.compute_and(&mut decoder, l_mem_row, u_mem_row, reuse)?);
            trace.events.push(TraceEvent::And {
                l_mem_row,
                u_mem_row,
            });
            prev_l = Some(l_mem_row);
        }
        Ok((outputs, trace))
    }
}
