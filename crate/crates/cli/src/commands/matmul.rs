use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::Args;
use disca_core::bp_format::{quantize_matrix, QuantStrategy};
use disca_core::energy_perf::{job_energy, scale_report, EnergyReport};
use disca_core::engine::{compare_outputs, dequantize_output, plan_tiling, run_plan, TrialError};
use disca_core::{CycleStats, MatMulJob};
use serde::Serialize;

use crate::job::{JobSpec, Operands};
use crate::{report, EnergyArgs, Format, Outcome};

#[derive(Args, Debug)]
pub struct MatmulArgs {
    /// Job spec file; flags below override its fields.
    #[arg(long)]
    job: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the output matrices and report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Load the job in several passes when it exceeds the engine.
    #[arg(long)]
    multipass: bool,
    /// Also write per-subarray address traces (needs --out).
    #[arg(long, requires = "out")]
    trace: bool,
    #[command(flatten)]
    energy: EnergyArgs,
}

#[derive(Debug, Serialize)]
struct Shape {
    m: usize,
    k: usize,
    n: usize,
    scale_l: f64,
    scale_u: f64,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct MatmulReport {
    job: Shape,
    accuracy: TrialError,
    stats: CycleStats,
    energy: EnergyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaled: Option<EnergyReport>,
}

pub fn run(a: MatmulArgs, table: Option<&Path>) -> Result<Outcome> {
    let mut spec = match &a.job {
        Some(p) => JobSpec::load(p)?,
        None => JobSpec::default(),
    };
    spec.m = a.m.or(spec.m);
    spec.k = a.k.or(spec.k);
    spec.n = a.n.or(spec.n);
    spec.seed = a.seed.or(spec.seed);
    let mut config = spec.engine.clone();
    config.multipass |= a.multipass;

    let table = super::load_table(table.or(spec.table.as_deref()))?;
    let table = Arc::new(table);
    let random = spec.l_csv.is_none() && spec.l_digits.is_none();

    let (job, exact) = match spec.operands()? {
        Operands::Real(l, u) => {
            let exact = l.matmul(&u)?;
            let ql = quantize_matrix(&l, QuantStrategy::MaxAbs)?;
            let qu = quantize_matrix(&u, QuantStrategy::MaxAbs)?;
            (MatMulJob::from_quantized(ql, qu, table)?, exact)
        }
        Operands::Digits {
            l,
            u,
            scale_l,
            scale_u,
        } => {
            let lf = l.map(|d| d.probability() * scale_l);
            let uf = u.map(|d| d.probability() * scale_u);
            let exact = lf.matmul(&uf)?;
            (MatMulJob::new(l, u, scale_l, scale_u, table)?, exact)
        }
    };

    let plan = plan_tiling(&job, &config)?;
    let out = run_plan(&job, &config, &plan, a.trace)?;
    let approx = dequantize_output(&out.o_int, job.scale_l, job.scale_u);
    let accuracy = compare_outputs(&approx, &exact)?;

    let constants = a.energy.constants()?;
    let energy = job_energy(&out.stats, &constants);
    let scaled = match &a.energy.node {
        Some(node) => Some(scale_report(&energy, a.energy.scaling()?.get(node)?)),
        None => None,
    };
    let summary = MatmulReport {
        job: Shape {
            m: job.m(),
            k: job.k(),
            n: job.n(),
            scale_l: job.scale_l,
            scale_u: job.scale_u,
            seed: random.then(|| spec.seed.unwrap_or(0)),
        },
        accuracy,
        stats: out.stats,
        energy,
        scaled,
    };
    let rendered = report::render(&summary, a.format)?;

    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("o_int.csv"), out.o_int.to_csv())?;
            fs::write(dir.join("output.csv"), approx.to_csv())?;
            let name = match a.format {
                Format::Text => "report.toml",
                Format::Csv => "report.csv",
            };
            fs::write(dir.join(name), &rendered)?;
            if a.trace {
                let traces = dir.join("traces");
                fs::create_dir_all(&traces)?;
                for t in &out.traces {
                    let file =
                        traces.join(format!("pass{:02}_subarray{:02}.txt", t.pass, t.subarray));
                    fs::write(file, t.trace.dump())?;
                }
            }
            eprintln!("wrote {}", dir.display());
        }
        None => print!("{rendered}"),
    }
    Ok(Outcome::Success)
}
