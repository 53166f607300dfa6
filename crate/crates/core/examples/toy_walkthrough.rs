//! A four-input block from weights to rules, and what don't-care terms buy.
//!
//! Run with `cargo run --example toy_walkthrough`.

use ttrules::logic::{dc_mask_for_patch, enumerate_block, quine_mccluskey, row_bits};
use ttrules::rules::{apply_dct, extract_rules, rules_to_text};
use ttrules::toy;

fn main() -> ttrules::Result<()> {
    let block = toy::block();
    let table = enumerate_block(&block, 0)?;

    println!("x0 x1 x2 x3 | y");
    for r in 0..16 {
        let bits: Vec<u8> = row_bits(4, r).iter().map(|&b| b as u8).collect();
        println!(" {}  {}  {}  {} | {}", bits[0], bits[1], bits[2], bits[3], table.outputs[r] as u8);
    }
    println!("\nminimized: {}", quine_mccluskey(&table.outputs, &[false; 16]));

    // The block slides over (Male, Go Uni., Married, Born US) and
    // (Go Uni., Married, Born US, Born UK).
    let model = toy::model();
    let raw = extract_rules(&model)?;
    println!("\nraw rules:\n{}", rules_to_text(&raw));

    // "Born US" and "Born UK" cannot both be set, so every row of the second
    // patch with x2 = x3 = 1 can be chosen freely.
    let dc = dc_mask_for_patch(&model.schema, &[1, 2, 3, 4], 1);
    let rows: Vec<String> = (0..16).filter(|&r| dc.dont_care[r]).map(|r| format!("{r:04b}")).collect();
    println!("don't-care rows of patch 1: {}", rows.join(" "));

    let opt = apply_dct(&raw);
    let (_, l0) = raw.complexity();
    let (_, l1) = opt.complexity();
    println!("\nwith don't-cares ({l0} -> {l1} literals):\n{}", rules_to_text(&opt));
    Ok(())
}
