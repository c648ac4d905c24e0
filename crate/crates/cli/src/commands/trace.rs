use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use disca_core::sram_core::{AddressProgram, LayoutMap, Subarray};

use crate::Outcome;

#[derive(Args, Debug)]
pub struct TraceArgs {
    /// Subarray rows; half hold U, half hold L.
    #[arg(long, default_value_t = 8)]
    rows: usize,
    /// L rows to sweep, in order.
    #[arg(long, default_value_t = 2)]
    l_rows: usize,
    /// U rows swept under each latched L row.
    #[arg(long, default_value_t = 4)]
    u_rows: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// L-major program: each L row is latched once while all U rows are swept.
pub fn sweep_program(l_rows: usize, u_rows: usize) -> AddressProgram {
    (0..l_rows)
        .flat_map(|l| (0..u_rows).map(move |u| (l, u)))
        .collect()
}

pub fn run(a: TraceArgs) -> Result<Outcome> {
    let mut sub = Subarray::with_layout(LayoutMap::new(a.rows)?);
    let (_, trace) = sub.issue_trace(&sweep_program(a.l_rows, a.u_rows))?;
    match a.out {
        Some(p) => std::fs::write(p, trace.dump())?,
        None => print!("{}", trace.dump()),
    }
    Ok(Outcome::Success)
}
