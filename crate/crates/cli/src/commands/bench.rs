use anyhow::Result;
use clap::Args;
use disca_core::energy_perf::{
    accum_energy_from_power, baseline_read_fj_per_bit, efficiency, mac_energy_per_bit,
    peak_throughput, scale_constants, scmul_read_ratio, scmul_with_decode_per_bit, EnergyConstants,
    Throughput,
};
use disca_core::EngineConfig;
use serde::Serialize;

use crate::{report, EnergyArgs, Format, Outcome};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Total subarrays, all in one bank; overrides --banks.
    #[arg(long)]
    subarrays: Option<usize>,
    #[arg(long)]
    banks: Option<usize>,
    /// Fraction of the ideal peak lost to scheduling.
    #[arg(long)]
    derate: Option<f64>,
    #[arg(long)]
    clock_mhz: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    energy: EnergyArgs,
}

#[derive(Debug, Serialize)]
struct Figures {
    node: String,
    mac_fj_per_bit: f64,
    scmul_with_decode_fj_per_bit: f64,
    tops_per_w_per_bit: f64,
    gops_per_w_bp8: f64,
    ideal_tops_per_bit: f64,
    effective_tops_per_bit: f64,
    ideal_tops_bp8: f64,
    effective_tops_bp8: f64,
}

#[derive(Debug, Serialize)]
struct Derived {
    accum_fj_per_bit_from_power: f64,
    scmul_read_ratio: f64,
    /// Read energy of a plain SRAM, inferred from the read overhead.
    baseline_read_fj_per_bit: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    subarrays: usize,
    constants: EnergyConstants,
    derived: Derived,
    reference: Figures,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaled: Option<Figures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    efficiency_gain: Option<f64>,
}

fn figures(node: &str, c: &EnergyConstants, t: Throughput) -> Figures {
    let e = efficiency(c);
    Figures {
        node: node.to_string(),
        mac_fj_per_bit: mac_energy_per_bit(c),
        scmul_with_decode_fj_per_bit: scmul_with_decode_per_bit(c),
        tops_per_w_per_bit: e.tops_per_w_per_bit,
        gops_per_w_bp8: e.gops_per_w_bp8(),
        ideal_tops_per_bit: t.ideal_tops_per_bit,
        effective_tops_per_bit: t.effective_tops_per_bit,
        ideal_tops_bp8: t.ideal_tops_bp8,
        effective_tops_bp8: t.effective_tops_bp8,
    }
}

pub fn run(a: BenchArgs) -> Result<Outcome> {
    let mut config = EngineConfig::default();
    if let Some(b) = a.banks {
        config.banks = b;
    }
    if let Some(s) = a.subarrays {
        config.banks = 1;
        config.subarrays_per_bank = s;
    }
    if let Some(d) = a.derate {
        config.throughput_derate = d;
    }
    if let Some(mhz) = a.clock_mhz {
        config.clock_hz = mhz * 1e6;
    }
    config.validate()?;

    let constants = a.energy.constants()?;
    let reference = figures("180nm", &constants, peak_throughput(&config));
    let (scaled, efficiency_gain) = match &a.energy.node {
        Some(name) => {
            let node = a.energy.scaling()?.get(name)?.clone();
            let c = scale_constants(&constants, &node);
            let scaled_config = EngineConfig {
                clock_hz: config.clock_hz * node.frequency_factor,
                ..config.clone()
            };
            let f = figures(&node.name, &c, peak_throughput(&scaled_config));
            let gain = f.tops_per_w_per_bit / reference.tops_per_w_per_bit;
            (Some(f), Some(gain))
        }
        None => (None, None),
    };
    let summary = BenchReport {
        subarrays: config.subarrays(),
        derived: Derived {
            accum_fj_per_bit_from_power: accum_energy_from_power(&constants),
            scmul_read_ratio: scmul_read_ratio(&constants),
            baseline_read_fj_per_bit: baseline_read_fj_per_bit(&constants),
        },
        constants,
        reference,
        scaled,
        efficiency_gain,
    };
    print!("{}", report::render(&summary, a.format)?);
    Ok(Outcome::Success)
}
