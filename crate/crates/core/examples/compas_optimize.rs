//! Shrink a Compas rule set with don't-care terms and filter deduplication.
//!
//! Run with `cargo run --release --example compas_optimize`.

use std::path::PathBuf;

use ttrules::data::{kfold_split, load_csv, row_is_onehot_valid, LoadOptions, Task};
use ttrules::inference::{metrics, predict_rows, truths};
use ttrules::net::{train, HeadMode, LttSpec, TrainConfig};
use ttrules::rules::{apply_dct, dedup_filters_logged, extract_rules, DEFAULT_TTC_THRESHOLD};

fn main() -> ttrules::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/compas.csv");
    let ds = load_csv(path, &LoadOptions::new("no_recid").task(Task::Binary))?;

    let spec = LttSpec {
        n: 6,
        stride: 1,
        amplification: 20,
        k1: 6,
        k2: 1,
        inner_bn: true,
    };
    let mut cfg = TrainConfig::new(spec, 5);
    cfg.epochs = 60;
    cfg.learning_rate = 0.0005;
    cfg.head_mode = HeadMode::BinarySparse;

    let fold = &kfold_split(&ds, 0)?.folds[0];
    let model = train(&ds, &fold.train, &cfg)?;
    let raw = extract_rules(&model)?;
    let dct = apply_dct(&raw);
    let (opt, merges) = dedup_filters_logged(&dct, &model, DEFAULT_TTC_THRESHOLD)?;
    for m in &merges {
        println!("filter {} folded into filter {} (ttc {:+.3})", m.removed, m.kept, m.ttc);
    }

    let truth = truths(&ds, &fold.test);
    for (name, rs) in [("raw", &raw), ("dct", &dct), ("dct+ttc", &opt)] {
        let preds = predict_rows(rs, &ds, &fold.test)?;
        let acc = metrics(&preds, &truth, ds.task(), None)?.accuracy.unwrap_or(f64::NAN);
        let (r, l) = rs.complexity();
        println!("{name:<8} rules {r:>4}  literals {l:>5}  accuracy {acc:.4}");
    }

    // Don't-cares only change answers on rows that break a one-hot group.
    let broken = fold.test.iter().filter(|&&r| !row_is_onehot_valid(ds.schema(), ds.row(r))).count();
    println!("test rows outside the one-hot domain: {broken}");
    Ok(())
}
