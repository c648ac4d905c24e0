//! Post-layout energy constants and the figures derived from them.
//!
//! All per-operation energies are in fJ per bit, one bit being one column of
//! one wordline event. A MAC on one bit column is an SC multiply (bitline
//! AND plus shared decode) followed by SC-to-binary accumulation, and counts
//! as two operations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{CycleStats, EngineConfig};
use crate::error::{Error, Result};
use crate::sram_core::COLS;

pub const OPS_PER_MAC: f64 = 2.0;
/// Bits per compressed BP word.
pub const BP8_BITS: f64 = 8.0;

const FJ: f64 = 1e-15;
const TERA: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConstants {
    pub write_fj_per_bit: f64,
    pub read_fj_per_bit: f64,
    pub scmul_fj_per_bit: f64,
    /// Decode cost per SC-MUL bit with one decoder shared by two subarrays.
    pub decode_shared_fj_per_bit: f64,
    pub accum_fj_per_bit: f64,
    pub accum_power_mw: f64,
    pub accum_clock_hz: f64,
    pub decoder_power_mw: f64,
    pub decoder_clock_hz: f64,
    pub clock_hz: f64,
    /// Extra read energy of the compute-capable array over a plain SRAM.
    pub read_overhead: f64,
}

impl Default for EnergyConstants {
    /// 180nm post-layout figures at 500 MHz.
    fn default() -> Self {
        Self {
            write_fj_per_bit: 411.0,
            read_fj_per_bit: 289.75,
            scmul_fj_per_bit: 301.0,
            decode_shared_fj_per_bit: 13.15,
            accum_fj_per_bit: 243.28,
            accum_power_mw: 31.14,
            accum_clock_hz: 500e6,
            decoder_power_mw: 8.415,
            decoder_clock_hz: 1e9,
            clock_hz: 500e6,
            read_overhead: 0.045,
        }
    }
}

impl EnergyConstants {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("write_fj_per_bit", self.write_fj_per_bit),
            ("read_fj_per_bit", self.read_fj_per_bit),
            ("scmul_fj_per_bit", self.scmul_fj_per_bit),
            ("decode_shared_fj_per_bit", self.decode_shared_fj_per_bit),
            ("accum_fj_per_bit", self.accum_fj_per_bit),
            ("accum_power_mw", self.accum_power_mw),
            ("decoder_power_mw", self.decoder_power_mw),
            ("read_overhead", self.read_overhead),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} = {v}")));
            }
        }
        for (name, v) in [
            ("clock_hz", self.clock_hz),
            ("accum_clock_hz", self.accum_clock_hz),
            ("decoder_clock_hz", self.decoder_clock_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    /// Multiplies every energy by `factor`; powers follow.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            write_fj_per_bit: self.write_fj_per_bit * factor,
            read_fj_per_bit: self.read_fj_per_bit * factor,
            scmul_fj_per_bit: self.scmul_fj_per_bit * factor,
            decode_shared_fj_per_bit: self.decode_shared_fj_per_bit * factor,
            accum_fj_per_bit: self.accum_fj_per_bit * factor,
            accum_power_mw: self.accum_power_mw * factor,
            decoder_power_mw: self.decoder_power_mw * factor,
            ..self.clone()
        }
    }
}

/// SC multiply including the shared decoder.
pub fn scmul_with_decode_per_bit(c: &EnergyConstants) -> f64 {
    c.scmul_fj_per_bit + c.decode_shared_fj_per_bit
}

pub fn mac_energy_per_bit(c: &EnergyConstants) -> f64 {
    scmul_with_decode_per_bit(c) + c.accum_fj_per_bit
}

/// Accumulator energy per bit implied by its average power over a full
/// 256-bit wordline per cycle.
pub fn accum_energy_from_power(c: &EnergyConstants) -> f64 {
    c.accum_power_mw * 1e-3 / c.accum_clock_hz / COLS as f64 / FJ
}

/// Decoder energy per decoded wordline bit, before any sharing.
pub fn decoder_energy_per_bit_unshared(c: &EnergyConstants) -> f64 {
    c.decoder_power_mw * 1e-3 / c.decoder_clock_hz / COLS as f64 / FJ
}

pub fn scmul_read_ratio(c: &EnergyConstants) -> f64 {
    c.scmul_fj_per_bit / c.read_fj_per_bit
}

/// Read energy of an equivalent SRAM without bitline compute (derived).
pub fn baseline_read_fj_per_bit(c: &EnergyConstants) -> f64 {
    c.read_fj_per_bit / (1.0 + c.read_overhead)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub tops_per_w_per_bit: f64,
    pub tops_per_w_bp8: f64,
}

impl Efficiency {
    pub fn gops_per_w_bp8(&self) -> f64 {
        self.tops_per_w_bp8 * 1e3
    }
}

pub fn efficiency(c: &EnergyConstants) -> Efficiency {
    let per_bit = OPS_PER_MAC / (mac_energy_per_bit(c) * FJ) / TERA;
    Efficiency {
        tops_per_w_per_bit: per_bit,
        tops_per_w_bp8: per_bit / BP8_BITS,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub ideal_tops_per_bit: f64,
    pub effective_tops_per_bit: f64,
    pub derate: f64,
    pub ideal_tops_bp8: f64,
    pub effective_tops_bp8: f64,
}

/// Every column of every subarray doing one MAC per cycle.
pub fn peak_throughput(config: &EngineConfig) -> Throughput {
    let ideal = config.subarrays() as f64 * COLS as f64 * config.clock_hz * OPS_PER_MAC / TERA;
    let effective = ideal * (1.0 - config.throughput_derate);
    Throughput {
        ideal_tops_per_bit: ideal,
        effective_tops_per_bit: effective,
        derate: config.throughput_derate,
        ideal_tops_bp8: ideal / BP8_BITS,
        effective_tops_bp8: effective / BP8_BITS,
    }
}

/// Energy and frequency multipliers relative to 180nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeScale {
    pub name: String,
    pub energy_factor: f64,
    pub frequency_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub nodes: Vec<NodeScale>,
}

impl Default for ScalingTable {
    /// Placeholder factors in the range of published CMOS scaling models;
    /// replace with tool output for real studies.
    fn default() -> Self {
        let entries = [
            ("180nm", 1.0, 1.0),
            ("130nm", 0.42, 1.3),
            ("90nm", 0.19, 1.7),
            ("65nm", 0.095, 2.1),
            ("45nm", 0.042, 2.6),
            ("32nm", 0.021, 3.0),
            ("22nm", 0.0095, 3.4),
            ("14nm", 0.0051, 3.8),
            ("7nm", 0.0024, 4.3),
        ];
        Self {
            nodes: entries
                .iter()
                .map(|&(name, energy_factor, frequency_factor)| NodeScale {
                    name: name.to_string(),
                    energy_factor,
                    frequency_factor,
                })
                .collect(),
        }
    }
}

impl ScalingTable {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        for n in &self.nodes {
            if !(n.energy_factor > 0.0 && n.frequency_factor > 0.0)
                || !n.energy_factor.is_finite()
                || !n.frequency_factor.is_finite()
            {
                return Err(Error::Config(format!(
                    "node {}: factors must be positive",
                    n.name
                )));
            }
            if n.name == "180nm" && (n.energy_factor != 1.0 || n.frequency_factor != 1.0) {
                return Err(Error::Config("180nm must be the identity entry".into()));
            }
        }
        Ok(())
    }

    pub fn get(&self, node: &str) -> Result<&NodeScale> {
        self.nodes
            .iter()
            .find(|n| n.name == node)
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }
}

/// Constants at another node: energies scaled, clocks sped up, powers
/// following `energy x frequency`.
pub fn scale_constants(c: &EnergyConstants, node: &NodeScale) -> EnergyConstants {
    let mut s = c.scaled(node.energy_factor);
    s.accum_power_mw *= node.frequency_factor;
    s.decoder_power_mw *= node.frequency_factor;
    s.clock_hz *= node.frequency_factor;
    s.accum_clock_hz *= node.frequency_factor;
    s.decoder_clock_hz *= node.frequency_factor;
    s
}

pub fn scale_to_node(
    c: &EnergyConstants,
    table: &ScalingTable,
    node: &str,
) -> Result<EnergyConstants> {
    Ok(scale_constants(c, table.get(node)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub node: String,
    pub write_fj: f64,
    pub read_fj: f64,
    pub scmul_fj: f64,
    pub decode_fj: f64,
    pub accumulate_fj: f64,
    pub total_fj: f64,
    /// Two per bit-level MAC.
    pub ops: u64,
    pub tops_per_w_per_bit: f64,
    pub tops_per_w_bp8: f64,
    pub elapsed_s: f64,
    pub throughput_tops_per_bit: f64,
    pub throughput_tops_bp8: f64,
}

impl EnergyReport {
    fn finish(mut self, wall_cycles: u64, clock_hz: f64) -> Self {
        self.total_fj =
            self.write_fj + self.read_fj + self.scmul_fj + self.decode_fj + self.accumulate_fj;
        self.tops_per_w_per_bit = if self.total_fj > 0.0 {
            self.ops as f64 / (self.total_fj * FJ) / TERA
        } else {
            0.0
        };
        self.tops_per_w_bp8 = self.tops_per_w_per_bit / BP8_BITS;
        self.elapsed_s = wall_cycles as f64 / clock_hz;
        self.throughput_tops_per_bit = if self.elapsed_s > 0.0 {
            self.ops as f64 / self.elapsed_s / TERA
        } else {
            0.0
        };
        self.throughput_tops_bp8 = self.throughput_tops_per_bit / BP8_BITS;
        self
    }
}

/// Every event moves one 256-bit wordline through its block.
pub fn job_energy(stats: &CycleStats, c: &EnergyConstants) -> EnergyReport {
    let bits = COLS as f64;
    let e = |events: u64, fj: f64| events as f64 * bits * fj;
    EnergyReport {
        node: "180nm".into(),
        write_fj: e(stats.write_ops, c.write_fj_per_bit),
        read_fj: e(stats.read_ops, c.read_fj_per_bit),
        scmul_fj: e(stats.scmul_ops, c.scmul_fj_per_bit),
        decode_fj: e(stats.decode_events, c.decode_shared_fj_per_bit),
        accumulate_fj: e(stats.accumulate_ops, c.accum_fj_per_bit),
        total_fj: 0.0,
        ops: stats.scmul_ops * COLS as u64 * OPS_PER_MAC as u64,
        tops_per_w_per_bit: 0.0,
        tops_per_w_bp8: 0.0,
        elapsed_s: 0.0,
        throughput_tops_per_bit: 0.0,
        throughput_tops_bp8: 0.0,
    }
    .finish(stats.wall_cycles, c.clock_hz)
}

/// Rescales a 180nm report to `node`.
pub fn scale_report(report: &EnergyReport, node: &NodeScale) -> EnergyReport {
    let f = node.energy_factor;
    let elapsed = report.elapsed_s;
    let scaled = EnergyReport {
        node: node.name.clone(),
        write_fj: report.write_fj * f,
        read_fj: report.read_fj * f,
        scmul_fj: report.scmul_fj * f,
        decode_fj: report.decode_fj * f,
        accumulate_fj: report.accumulate_fj * f,
        ..report.clone()
    };
    // Cycle count is node independent; only the clock moves.
    let mut out = scaled.finish(0, 1.0);
    out.elapsed_s = elapsed / node.frequency_factor;
    if out.elapsed_s > 0.0 {
        out.throughput_tops_per_bit = out.ops as f64 / out.elapsed_s / TERA;
        out.throughput_tops_bp8 = out.throughput_tops_per_bit / BP8_BITS;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mac_energy_composition() {
        let c = EnergyConstants::default();
        assert!(close(mac_energy_per_bit(&c), 557.43, 1e-9));
        assert!(close(scmul_with_decode_per_bit(&c), 314.15, 1e-9));
        let no_decode = EnergyConstants {
            decode_shared_fj_per_bit: 0.0,
            ..c.clone()
        };
        assert!(close(mac_energy_per_bit(&no_decode), 544.28, 1e-9));
        assert_eq!(
            mac_energy_per_bit(&c.scaled(2.0)),
            2.0 * mac_energy_per_bit(&c)
        );
    }

    #[test]
    fn efficiency_figures() {
        let c = EnergyConstants::default();
        let e = efficiency(&c);
        assert!(close(e.tops_per_w_per_bit, 3.588, 5e-4));
        assert!(close(e.gops_per_w_bp8(), 448.5, 0.5));
        assert_eq!(e.tops_per_w_bp8, e.tops_per_w_per_bit / 8.0);
        let half = efficiency(&c.scaled(0.5));
        assert!(close(
            half.tops_per_w_per_bit,
            2.0 * e.tops_per_w_per_bit,
            1e-12
        ));
    }

    #[test]
    fn throughput_figures() {
        let t = peak_throughput(&EngineConfig::default());
        assert!(close(t.ideal_tops_per_bit, 8.192, 1e-12));
        assert!(close(t.effective_tops_per_bit, 7.9, 1e-12));
        assert!(close(t.effective_tops_bp8, 0.9875, 1e-12));
        let one = EngineConfig {
            banks: 1,
            subarrays_per_bank: 1,
            ..EngineConfig::default()
        };
        assert!(close(
            peak_throughput(&one).ideal_tops_per_bit,
            0.256,
            1e-12
        ));
    }

    #[test]
    fn accumulator_constant_from_power() {
        let c = EnergyConstants::default();
        assert!(close(accum_energy_from_power(&c), 243.28, 0.01));
    }

    #[test]
    fn ratios() {
        let c = EnergyConstants::default();
        assert!(close(scmul_read_ratio(&c), 1.039, 0.002));
        assert!(close(baseline_read_fj_per_bit(&c), 289.75 / 1.045, 1e-12));
    }

    #[test]
    fn empty_stats_report() {
        let r = job_energy(&CycleStats::default(), &EnergyConstants::default());
        assert_eq!(r.total_fj, 0.0);
        assert_eq!(r.tops_per_w_per_bit, 0.0);
    }

    #[test]
    fn single_mac_event() {
        let stats = CycleStats {
            scmul_ops: 1,
            decode_events: 1,
            accumulate_ops: 1,
            ..CycleStats::default()
        };
        let r = job_energy(&stats, &EnergyConstants::default());
        assert!(close(r.total_fj, 256.0 * 557.43, 1e-6));
        assert!(close(
            r.tops_per_w_per_bit,
            efficiency(&EnergyConstants::default()).tops_per_w_per_bit,
            1e-9
        ));
    }

    #[test]
    fn node_scaling() {
        let c = EnergyConstants::default();
        let table = ScalingTable::default();
        assert_eq!(scale_to_node(&c, &table, "180nm").unwrap(), c);
        let s22 = scale_to_node(&c, &table, "22nm").unwrap();
        assert!(efficiency(&s22).tops_per_w_per_bit >= 100.0 * efficiency(&c).tops_per_w_per_bit);
        assert!(matches!(
            scale_to_node(&c, &table, "3nm"),
            Err(Error::UnknownNode(_))
        ));
        let half = NodeScale {
            name: "half".into(),
            energy_factor: 0.5,
            frequency_factor: 1.0,
        };
        let h = scale_constants(&c, &half);
        assert_eq!(h.write_fj_per_bit, c.write_fj_per_bit * 0.5);
        assert_eq!(mac_energy_per_bit(&h), mac_energy_per_bit(&c) * 0.5);
    }

    #[test]
    fn report_scaling_is_linear() {
        let stats = CycleStats {
            write_ops: 3,
            scmul_ops: 5,
            decode_events: 5,
            accumulate_ops: 5,
            wall_cycles: 10,
            ..CycleStats::default()
        };
        let r = job_energy(&stats, &EnergyConstants::default());
        let half = NodeScale {
            name: "half".into(),
            energy_factor: 0.5,
            frequency_factor: 2.0,
        };
        let s = scale_report(&r, &half);
        assert_eq!(s.total_fj, r.total_fj * 0.5);
        assert!(close(
            s.tops_per_w_per_bit,
            2.0 * r.tops_per_w_per_bit,
            1e-9
        ));
        assert!(close(
            s.throughput_tops_per_bit,
            2.0 * r.throughput_tops_per_bit,
            1e-9
        ));
        assert_eq!(s.node, "half");
    }

    #[test]
    fn files_round_trip() {
        let c = EnergyConstants::default();
        assert_eq!(
            EnergyConstants::from_toml_str(&c.to_toml_string().unwrap()).unwrap(),
            c
        );
        let partial = EnergyConstants::from_toml_str("scmul_fj_per_bit = 310.0\n").unwrap();
        assert_eq!(partial.scmul_fj_per_bit, 310.0);
        assert_eq!(partial.read_fj_per_bit, 289.75);
        assert!(EnergyConstants::from_toml_str("bogus = 1\n").is_err());
        let t = ScalingTable::default();
        assert_eq!(
            ScalingTable::from_toml_str(&t.to_toml_string().unwrap()).unwrap(),
            t
        );
        let bad = "[[nodes]]\nname = \"x\"\nenergy_factor = 0.0\nfrequency_factor = 1.0\n";
        assert!(ScalingTable::from_toml_str(bad).is_err());
    }
}
