use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttrules::data::{Dataset, FeatureSchema, Targets};
use ttrules::inference::{accuracy, model_predictions, truths};
use ttrules::net::{recompute_bn_stats, train, Checkpoint, HeadMode, LttSpec, TrainConfig, TtnetModel};

/// 200 rows of 8 bits; the label is `x2 AND NOT x5`.
fn separable() -> (Dataset, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let names: Vec<String> = (0..8).map(|i| format!("x{i}")).collect();
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..200 {
        let row: Vec<f64> = (0..8).map(|_| rng.gen_range(0..2) as f64).collect();
        labels.push((row[2] == 1.0 && row[5] == 0.0) as usize);
        x.extend(row);
    }
    let ds = Dataset::new(
        x,
        FeatureSchema::binary(&names).unwrap(),
        Targets::Classes {
            labels,
            names: vec!["0".into(), "1".into()],
        },
    )
    .unwrap();
    (ds, (0..200).collect())
}

fn small_config(head: HeadMode, epochs: usize) -> TrainConfig {
    let spec = LttSpec {
        n: 4,
        stride: 2,
        amplification: 4,
        k1: 3,
        k2: 2,
        inner_bn: true,
    };
    let mut cfg = TrainConfig::new(spec, 4);
    cfg.epochs = epochs;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.01;
    cfg.head_mode = head;
    cfg.seed = 3;
    cfg
}

fn train_accuracy(m: &TtnetModel, ds: &Dataset, rows: &[usize]) -> f64 {
    let p = model_predictions(m, ds, rows).unwrap();
    let labels: Vec<_> = p.iter().map(|p| p.label).collect();
    accuracy(&labels, &truths(ds, rows))
}

#[test]
fn separable_data_is_learned() {
    let (ds, rows) = separable();
    for head in [HeadMode::BinarySparse, HeadMode::Float] {
        let m = train(&ds, &rows, &small_config(head, 30)).unwrap();
        let acc = train_accuracy(&m, &ds, &rows);
        assert!(acc >= 0.95, "{head:?}: {acc}");
    }
}

#[test]
fn binary_head_weights_are_ternary() {
    let (ds, rows) = separable();
    let m = train(&ds, &rows, &small_config(HeadMode::BinarySparse, 5)).unwrap();
    assert!(m.bn_finalized);
    for w in m.head.effective_weights() {
        assert!(w == -1.0 || w == 0.0 || w == 1.0);
    }
}

#[test]
fn training_is_deterministic() {
    let (ds, rows) = separable();
    let cfg = small_config(HeadMode::Float, 3);
    let a = Checkpoint::new(cfg.clone(), "h".into(), None, train(&ds, &rows, &cfg).unwrap());
    let b = Checkpoint::new(cfg.clone(), "h".into(), None, train(&ds, &rows, &cfg).unwrap());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let (ds, rows) = separable();
    let cfg = small_config(HeadMode::BinarySparse, 2);
    let ck = Checkpoint::new(cfg.clone(), "abc".into(), Some(1), train(&ds, &rows, &cfg).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    ck.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back, ck);
    let bits = |m: &TtnetModel| -> Vec<u64> { m.head.weights.iter().chain(&m.final_bn.running_var).map(|v| v.to_bits()).collect() };
    assert_eq!(bits(&back.model), bits(&ck.model));
    let mut bad = ck.to_json().unwrap();
    bad = bad.replacen("\"version\": 1", "\"version\": 9", 1);
    assert!(Checkpoint::from_json(&bad).is_err());
}

#[test]
fn bad_config_is_rejected() {
    let (ds, rows) = separable();
    let mut cfg = small_config(HeadMode::Float, 0);
    assert!(train(&ds, &rows, &cfg).is_err());
    cfg.epochs = 1;
    cfg.learning_rate = -1.0;
    assert!(train(&ds, &rows, &cfg).is_err());
}

fn two_pass(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

#[test]
fn recomputed_statistics_match_two_pass_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let names: Vec<String> = (0..9).map(|i| format!("c{i}")).collect();
    let rows = 300;
    let x: Vec<f64> = (0..rows * 9)
        .map(|i| if i % 9 == 4 { 2.5 } else { rng.gen_range(-3.0..3.0) })
        .collect();
    let mut schema_cols = FeatureSchema::binary(&names).unwrap().columns().to_vec();
    schema_cols.iter_mut().for_each(|c| c.kind = ttrules::data::FeatureKind::Continuous);
    let schema = FeatureSchema::new(schema_cols, Vec::new()).unwrap();
    let ds = Dataset::new(
        x,
        schema.clone(),
        Targets::Classes {
            labels: (0..rows).map(|i| i % 2).collect(),
            names: vec!["a".into(), "b".into()],
        },
    )
    .unwrap();
    let spec = LttSpec {
        n: 5,
        stride: 2,
        amplification: 3,
        k1: 3,
        k2: 3,
        inner_bn: true,
    };
    let mut m = TtnetModel::random(schema, ds.task(), 2, spec, 2, HeadMode::Float, 0.0, &mut rng).unwrap();
    for g in m.input_bn.gamma.iter_mut() {
        *g = rng.gen_range(-1.0..1.0);
    }
    let all: Vec<usize> = (0..rows).collect();
    let r = recompute_bn_stats(&m, &ds, &all);

    for j in 0..9 {
        let col: Vec<f64> = all.iter().map(|&i| ds.row(i)[j]).collect();
        let (mean, var) = two_pass(&col);
        assert!((r.input_bn.running_mean[j] - mean).abs() < 1e-9);
        assert!((r.input_bn.running_var[j] - var).abs() < 1e-9);
    }
    // The constant column.
    assert_eq!(r.input_bn.running_mean[4], 2.5);
    assert_eq!(r.input_bn.running_var[4], 0.0);

    for (f, blk) in r.blocks.iter().enumerate() {
        let bn = blk.inner_bn.as_ref().unwrap();
        for ch in 0..spec.amplification {
            let mut h = Vec::new();
            for &i in &all {
                let bits = r.input_bits(ds.row(i));
                for p in 0..r.num_patches() {
                    for t in 0..spec.k2 {
                        let base = p * spec.stride + t;
                        h.push((0..spec.k1).map(|j| if bits[base + j] { blk.w1[ch * spec.k1 + j] } else { 0.0 }).sum());
                    }
                }
            }
            let (mean, var) = two_pass(&h);
            assert!((bn.running_mean[ch] - mean).abs() < 1e-9, "filter {f}");
            assert!((bn.running_var[ch] - var).abs() < 1e-9, "filter {f}");
        }
    }

    for k in 0..r.num_slots() {
        let s: Vec<f64> = all.iter().map(|&i| r.slot_bits(ds.row(i))[k] as u8 as f64).collect();
        let (mean, var) = two_pass(&s);
        assert!((r.final_bn.running_mean[k] - mean).abs() < 1e-9);
        assert!((r.final_bn.running_var[k] - var).abs() < 1e-9);
    }

    let again = recompute_bn_stats(&r, &ds, &all);
    assert_eq!(again, r);
}
