pub mod bench;
pub mod codes;
pub mod encode;
pub mod matmul;
pub mod trace;
pub mod verify;

use std::path::Path;

use anyhow::{Context, Result};
use disca_core::energy_perf::{EnergyConstants, ScalingTable};
use disca_core::BPCodeTable;

use crate::EnergyArgs;

pub fn load_table(path: Option<&Path>) -> Result<BPCodeTable> {
    match path {
        Some(p) => BPCodeTable::load(p).with_context(|| format!("loading table {}", p.display())),
        None => Ok(BPCodeTable::default_bp10()),
    }
}

pub fn load_table_unchecked(path: Option<&Path>) -> Result<BPCodeTable> {
    match path {
        Some(p) => {
            BPCodeTable::load_unchecked(p).with_context(|| format!("loading table {}", p.display()))
        }
        None => Ok(BPCodeTable::default_bp10()),
    }
}

impl EnergyArgs {
    pub fn constants(&self) -> Result<EnergyConstants> {
        let mut c = match &self.constants {
            Some(p) => {
                EnergyConstants::load(p).with_context(|| format!("loading {}", p.display()))?
            }
            None => EnergyConstants::default(),
        };
        let overrides = [
            (self.write_fj, &mut c.write_fj_per_bit),
            (self.read_fj, &mut c.read_fj_per_bit),
            (self.scmul_fj, &mut c.scmul_fj_per_bit),
            (self.decode_fj, &mut c.decode_shared_fj_per_bit),
            (self.accum_fj, &mut c.accum_fj_per_bit),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn scaling(&self) -> Result<ScalingTable> {
        match &self.scaling {
            Some(p) => ScalingTable::load(p).with_context(|| format!("loading {}", p.display())),
            None => Ok(ScalingTable::default()),
        }
    }
}
