//! Regression with a float head on synthetic data. Rules carry one weight
//! each, and the rule set reproduces the network's score exactly.
//!
//! Run with `cargo run --release --example regression`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttrules::data::{kfold_split, load_csv_str, LoadOptions, Task};
use ttrules::inference::{metrics, model_predictions, predict_rows, truths};
use ttrules::net::{train, HeadMode, LttSpec, TrainConfig};
use ttrules::rules::{extract_rules, rules_to_text};

fn main() -> ttrules::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut csv = String::from("a,b,c,d,e,f,g,h,y\n");
    for _ in 0..2000 {
        let x: Vec<u8> = (0..8).map(|_| rng.gen_range(0..2)).collect();
        let y = 3.0 * x[0] as f64 - 2.0 * (x[2] & x[3]) as f64 + x[6] as f64 + rng.gen_range(-0.3..0.3);
        let cells: Vec<String> = x.iter().map(u8::to_string).collect();
        csv.push_str(&format!("{},{y:.4}\n", cells.join(",")));
    }
    let mut ds = load_csv_str(&csv, &LoadOptions::new("y").task(Task::Regression))?;

    let spec = LttSpec {
        n: 4,
        stride: 2,
        amplification: 4,
        k1: 4,
        k2: 1,
        inner_bn: true,
    };
    let mut cfg = TrainConfig::new(spec, 4);
    cfg.epochs = 30;
    cfg.batch_size = 64;
    cfg.learning_rate = 0.01;
    cfg.head_mode = HeadMode::Float;

    let fold = kfold_split(&ds, 0)?.folds[0].clone();
    ds.refit_target_scaler(&fold.train);
    let model = train(&ds, &fold.train, &cfg)?;
    let rules = extract_rules(&model)?;

    let net = model_predictions(&model, &ds, &fold.test)?;
    let ours = predict_rows(&rules, &ds, &fold.test)?;
    let gap = net
        .iter()
        .zip(&ours)
        .map(|(a, b)| (a.label.value() - b.label.value()).abs())
        .fold(0.0, f64::max);
    let m = metrics(&ours, &truths(&ds, &fold.test), ds.task(), ds.target_scaler())?;
    println!(
        "test rmse {:.4} (standardized), {:.4} (original units); max |network - rules| {gap:.2e}",
        m.rmse.unwrap_or(f64::NAN),
        m.rmse_original.unwrap_or(f64::NAN)
    );
    print!("{}", rules_to_text(&rules));
    Ok(())
}
