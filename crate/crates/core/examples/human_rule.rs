//! Edit a rule set by hand: add a rule with thresholds and categories, then
//! score a few people with and without it.
//!
//! Run with `cargo run --example human_rule`.

use ttrules::data::{load_csv_str, LoadOptions, SourceKind, Task};
use ttrules::inference::classify;
use ttrules::rules::{parse_rules, rules_to_text};

const PEOPLE: &str = "\
YoE,Capital Gains,Capital Loss,Age,Job,Born,income
13,0,0,41,Machinist,Peru,1
9,15000,0,52,Helper,Mexico,1
12,0,0,24,Farmer,Peru,0
8,0,0,35,Farmer,Mexico,0
14,0,0,45,Farmer,US,1
";

const RULES: &str = "\
TASK binary
BIAS 0,0
RULE 1 WEIGHTS 0,1 : (YoE > 11) OR (\"Capital Gains\" > 12000) OR (\"Capital Loss\" > 258)
RULE 3 WEIGHTS 0,-0.5 : (Born=Peru) OR (Born=Mexico)
";

fn main() -> ttrules::Result<()> {
    let opts = LoadOptions::new("income")
        .task(Task::Binary)
        .kind("Job", SourceKind::Categorical)
        .kind("Born", SourceKind::Categorical);
    let ds = load_csv_str(PEOPLE, &opts)?;
    let schema = ds.schema();

    let base = parse_rules(RULES, schema)?;
    let edited = parse_rules(
        &format!("{RULES}RULE 5 WEIGHTS 0,-1 : (Job=Machinist) OR (Job=Helper) OR (Job=Farmer AND Age < 30)\n"),
        schema,
    )?;
    print!("{}", rules_to_text(&edited));

    println!("\nrow  before  after  fired");
    for r in 0..ds.num_rows() {
        let a = classify(&base, ds.row(r))?;
        let b = classify(&edited, ds.row(r))?;
        let fired: Vec<usize> = edited.rules.iter().zip(&b.fired).filter(|(_, f)| **f).map(|(x, _)| x.id).collect();
        println!("{r:>3}  {:>6}  {:>5}  {fired:?}", a.label.class().unwrap(), b.label.class().unwrap());
    }

    // Malformed edits are reported with a position.
    if let Err(e) = parse_rules("TASK binary\nRULE 9 WEIGHTS 0,1 : (Age >)\n", schema) {
        println!("\n{e}");
    }
    Ok(())
}
