//! Train on one Adult fold, extract the rule set and check that it predicts
//! exactly like the network.
//!
//! Run with `cargo run --release --example adult_rules`.

use std::path::PathBuf;
use std::time::Instant;

use ttrules::data::{kfold_split, load_csv, LoadOptions, SourceKind, Task};
use ttrules::inference::{metrics, model_predictions, predict_rows, truths};
use ttrules::net::{train_with_progress, HeadMode, LttSpec, TrainConfig};
use ttrules::rules::{extract_rules, rules_to_text};

fn main() -> ttrules::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/adult.csv");
    let opts = LoadOptions::new("income")
        .task(Task::Binary)
        .kind("native-country", SourceKind::Categorical);
    let ds = load_csv(path, &opts)?;
    println!("{} rows, {} binary/continuous columns", ds.num_rows(), ds.num_features());

    let spec = LttSpec {
        n: 5,
        stride: 5,
        amplification: 10,
        k1: 5,
        k2: 1,
        inner_bn: true,
    };
    let mut cfg = TrainConfig::new(spec, 10);
    cfg.epochs = 10;
    cfg.batch_size = 128;
    cfg.learning_rate = 0.005;
    cfg.head_mode = HeadMode::BinarySparse;

    let fold = &kfold_split(&ds, cfg.seed)?.folds[0];
    let model = train_with_progress(&ds, &fold.train, &cfg, |epoch, loss| {
        println!("epoch {epoch:>2}  loss {loss:.4}");
    })?;

    let t0 = Instant::now();
    let rules = extract_rules(&model)?;
    println!("extracted in {:.3} s", t0.elapsed().as_secs_f64());

    let net = model_predictions(&model, &ds, &fold.test)?;
    let ours = predict_rows(&rules, &ds, &fold.test)?;
    let agree = net.iter().zip(&ours).filter(|(a, b)| a.label == b.label).count();
    let m = metrics(&ours, &truths(&ds, &fold.test), ds.task(), None)?;
    let (r, l) = rules.complexity();
    println!(
        "test accuracy {:.4}, {r} rules, {l} literals, agreement with network {agree}/{}",
        m.accuracy.unwrap_or(f64::NAN),
        fold.test.len()
    );

    for line in rules_to_text(&rules).lines().take(8) {
        println!("{line}");
    }
    Ok(())
}
