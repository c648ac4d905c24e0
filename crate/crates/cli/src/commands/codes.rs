use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Subcommand};
use disca_core::bp_format::{
    derive_code_table, evaluate_table, mul_popcount, Objective, SearchConfig,
};
use disca_core::{BPCodeTable, BPDigit, Bias};

use super::load_table_unchecked;
use crate::{Format, Outcome};

#[derive(Subcommand, Debug)]
pub enum CodesCommand {
    /// Search for a code table and write it out.
    Derive(DeriveArgs),
    /// Print all codes and the 10x10 popcount-product matrix.
    Show {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Validate table invariants and BP8/BP10 equivalence.
    Check,
}

#[derive(Args, Debug)]
pub struct DeriveArgs {
    #[arg(long, default_value = "mean-abs")]
    objective: Objective,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SearchConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = SearchConfig::default().max_rounds)]
    max_rounds: usize,
    /// 10 for the full table, 8 for the compressed one.
    #[arg(long, default_value_t = 10, value_parser = PossibleValuesParser::new(["8", "10"]).map(|s| s.parse::<u8>().expect("listed values parse")))]
    width: u8,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cmd: CodesCommand, table: Option<&Path>) -> Result<Outcome> {
    match cmd {
        CodesCommand::Derive(a) => derive(a),
        CodesCommand::Show { format } => {
            let t = super::load_table(table)?;
            print!("{}", show(&t, format));
            Ok(Outcome::Success)
        }
        CodesCommand::Check => {
            let t = load_table_unchecked(table)?;
            let problems = check(&t);
            if problems.is_empty() {
                println!("ok: 20 codes valid, 100 pairs equivalent at widths 8 and 10");
                Ok(Outcome::Success)
            } else {
                for p in &problems {
                    println!("violation: {p}");
                }
                Ok(Outcome::ValidationFailed)
            }
        }
    }
}

fn derive(a: DeriveArgs) -> Result<Outcome> {
    let cfg = SearchConfig {
        objective: a.objective,
        restarts: a.restarts,
        max_rounds: a.max_rounds,
    };
    let mut table = derive_code_table(&cfg, a.seed);
    if a.width == 8 {
        table = table.compress();
    }
    let text = table.to_toml_string()?;
    match a.out {
        Some(p) => {
            std::fs::write(&p, text)?;
            let score = evaluate_table(&table);
            eprintln!(
                "wrote {} (mean abs error {:.4}, max {:.4})",
                p.display(),
                score.mean_abs,
                score.max_abs
            );
        }
        None => print!("{text}"),
    }
    Ok(Outcome::Success)
}

pub fn show(t: &BPCodeTable, format: Format) -> String {
    let products = t.product_matrix();
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("digit,left,right\n");
        for d in BPDigit::all() {
            out.push_str(&format!(
                "{d},{},{}\n",
                t.encode(d, Bias::LeftBiased),
                t.encode(d, Bias::RightBiased)
            ));
        }
        out.push_str("\nproduct,0,1,2,3,4,5,6,7,8,9\n");
        for (i, row) in products.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&format!("{i},{}\n", cells.join(",")));
        }
        return out;
    }
    let wide = t.expand();
    let narrow = t.compress();
    out.push_str(&format!("table: {}\n", t.metadata.provenance));
    out.push_str("digit  left BP10    right BP10   left BP8        right BP8\n");
    for d in BPDigit::all() {
        out.push_str(&format!(
            "{d}      {}   {}   {}   {}\n",
            wide.encode(d, Bias::LeftBiased),
            wide.encode(d, Bias::RightBiased),
            narrow.encode(d, Bias::LeftBiased),
            narrow.encode(d, Bias::RightBiased)
        ));
    }
    out.push_str("\npopcount(L_i AND R_j), rows i, columns j\n    ");
    for j in 0..10 {
        out.push_str(&format!("{j:>3}"));
    }
    out.push('\n');
    for (i, row) in products.iter().enumerate() {
        out.push_str(&format!("{i:>3} "));
        for v in row {
            out.push_str(&format!("{v:>3}"));
        }
        out.push('\n');
    }
    let s = evaluate_table(t);
    out.push_str(&format!(
        "\nmean abs error {:.4}, max abs error {:.4}\n",
        s.mean_abs, s.max_abs
    ));
    out
}

/// Invariant violations and width-equivalence mismatches, each naming the
/// digit or digit pair involved.
pub fn check(t: &BPCodeTable) -> Vec<String> {
    let mut problems: Vec<String> = t.validate().iter().map(ToString::to_string).collect();
    let wide = t.expand();
    let narrow = t.compress();
    for i in BPDigit::all() {
        for j in BPDigit::all() {
            let w = mul_popcount(
                wide.encode(i, Bias::LeftBiased),
                wide.encode(j, Bias::RightBiased),
            );
            let n = mul_popcount(
                narrow.encode(i, Bias::LeftBiased),
                narrow.encode(j, Bias::RightBiased),
            );
            match (w, n) {
                (Ok(a), Ok(b)) if a == b => {}
                _ => problems.push(format!(
                    "digit pair ({i}, {j}): width 8 and width 10 disagree"
                )),
            }
        }
    }
    problems
}
