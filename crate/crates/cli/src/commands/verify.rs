use std::path::Path;

use anyhow::Result;
use clap::Args;
use disca_core::verify::{run_suite, SuiteInputs};

use crate::{EnergyArgs, Outcome};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    energy: EnergyArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run(a: VerifyArgs, table: Option<&Path>) -> Result<Outcome> {
    let table = super::load_table_unchecked(table)?;
    let constants = a.energy.constants()?;
    let scaling = a.energy.scaling()?;
    let report = run_suite(&SuiteInputs {
        table: &table,
        constants: &constants,
        scaling: &scaling,
        seed: a.seed,
    });
    for c in &report.checks {
        println!("{c}");
    }
    let failed = report.failures().count();
    println!("{} checks, {} failed", report.checks.len(), failed);
    Ok(if failed == 0 {
        Outcome::Success
    } else {
        Outcome::ValidationFailed
    })
}
