use std::path::Path;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use disca_core::{BPCode, BPDigit, Bias, CodeWidth};

use crate::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BiasArg {
    Left,
    Right,
    Both,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Digits 0..=9 to encode.
    digits: Vec<u8>,
    #[arg(long, value_enum, default_value = "both")]
    bias: BiasArg,
    /// Code width, 8 or 10.
    #[arg(long, default_value_t = 8)]
    width: usize,
    /// Decode this bit string instead (leftmost bit first).
    #[arg(long, value_name = "BITS", conflicts_with = "digits")]
    decode: Option<String>,
    /// Implicit bits for a width-8 decode, as two characters `<left><right>`.
    #[arg(long, default_value = "00")]
    implicit: String,
}

pub fn run(a: EncodeArgs, table: Option<&Path>) -> Result<Outcome> {
    let width = CodeWidth::from_bits(a.width)?;
    let t = super::load_table(table)?;
    let t = match width {
        CodeWidth::W10 => t.expand(),
        CodeWidth::W8 => t.compress(),
    };

    if let Some(bits) = a.decode {
        let mut code = BPCode::parse(Bias::LeftBiased, width, &bits)?;
        if width == CodeWidth::W8 {
            let (l, r) = match a.implicit.as_str() {
                "00" => (false, false),
                "01" => (false, true),
                "10" => (true, false),
                "11" => (true, true),
                other => bail!("implicit bits must be two of 0/1, got {other:?}"),
            };
            code = code.with_implicits(l, r);
        }
        println!("{}", t.decode(&code)?);
        return Ok(Outcome::Success);
    }

    if a.digits.is_empty() {
        bail!("no digits given");
    }
    let biases: &[Bias] = match a.bias {
        BiasArg::Left => &[Bias::LeftBiased],
        BiasArg::Right => &[Bias::RightBiased],
        BiasArg::Both => &[Bias::LeftBiased, Bias::RightBiased],
    };
    for &k in &a.digits {
        let d = BPDigit::new(k)?;
        let codes: Vec<String> = biases
            .iter()
            .map(|&b| format!("{b} {}", t.encode(d, b)))
            .collect();
        println!("{d}: {}", codes.join("  "));
    }
    Ok(Outcome::Success)
}
