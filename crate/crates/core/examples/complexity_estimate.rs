//! How many literals a raw rule set can reach, before training anything.
//!
//! Run with `cargo run --example complexity_estimate`.

use ttrules::rules::estimate_complexity;

fn main() -> ttrules::Result<()> {
    println!("{:>3} {:>5} {:>3} {:>3} {:>10}", "n", "L", "s", "F", "literals");
    for (n, l, s, f) in [(5, 100, 5, 10), (6, 17, 1, 5), (8, 100, 4, 10), (9, 20_000, 8, 4)] {
        println!("{n:>3} {l:>5} {s:>3} {f:>3} {:>10}", estimate_complexity(n, l, s, f)?);
    }
    // Wider windows double the bound per input bit.
    for n in 3..=9 {
        println!("n = {n}: {}", estimate_complexity(n, 64, 1, 1)?);
    }
    Ok(())
}
