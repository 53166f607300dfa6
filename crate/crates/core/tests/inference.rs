use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttrules::data::{FeatureSchema, Task};
use ttrules::inference::{accuracy, auc, decide, predict, rmse, Label};
use ttrules::rules::{parse_rules, RuleSet};

#[test]
fn decisions() {
    assert_eq!(decide(Task::Binary, &[0.0, 0.5]), Label::Class(1));
    assert_eq!(decide(Task::Binary, &[0.5, 0.5]), Label::Class(0));
    assert_eq!(decide(Task::Multiclass, &[1.0, 3.0, 3.0]), Label::Class(1));
    assert_eq!(decide(Task::Regression, &[-0.25]), Label::Value(-0.25));
}

#[test]
fn perfect_margins_have_unit_auc() {
    assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
    assert_eq!(auc(&[0.5, 0.5], &[false, true]).unwrap(), 0.5);
    assert!(auc(&[0.5, 0.6], &[true, true]).is_err());
}

#[test]
fn random_scores_have_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let scores: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
    let labels: Vec<bool> = (0..10_000).map(|i| i % 2 == 0).collect();
    let a = auc(&scores, &labels).unwrap();
    assert!((a - 0.5).abs() <= 0.02, "{a}");
}

#[test]
fn identical_predictions_are_perfect() {
    let l = vec![Label::Class(1), Label::Class(0)];
    assert_eq!(accuracy(&l, &l), 1.0);
    assert_eq!(rmse(&[1.5, -2.0], &[1.5, -2.0]), 0.0);
}

fn random_ruleset(rng: &mut ChaCha8Rng, task: Task) -> (RuleSet, usize) {
    let names: Vec<String> = (0..6).map(|i| format!("f{i}")).collect();
    let schema = FeatureSchema::binary(&names).unwrap();
    let c = match task {
        Task::Binary => 2,
        Task::Multiclass => 3,
        Task::Regression => 1,
    };
    let task_name = format!("{task:?}").to_lowercase();
    let nums = |rng: &mut ChaCha8Rng| -> String {
        (0..c).map(|_| format!("{:?}", rng.gen_range(-2.0..2.0f64))).collect::<Vec<_>>().join(",")
    };
    let mut text = format!("TASK {task_name}\nBIAS {}\n", nums(rng));
    for id in 0..rng.gen_range(1..8) {
        let mut clauses = Vec::new();
        for _ in 0..rng.gen_range(1..3) {
            let mut lits = Vec::new();
            for (v, name) in names.iter().enumerate() {
                match rng.gen_range(0..4) {
                    0 => lits.push(name.clone()),
                    1 if v % 2 == 0 => lits.push(format!("NOT {name}")),
                    _ => {}
                }
            }
            if lits.is_empty() {
                lits.push(names[0].clone());
            }
            clauses.push(format!("({})", lits.join(" AND ")));
        }
        text.push_str(&format!("RULE {id} WEIGHTS {} : {}\n", nums(rng), clauses.join(" OR ")));
    }
    (parse_rules(&text, &schema).unwrap(), 6)
}

fn rows(l: usize) -> Vec<Vec<f64>> {
    (0..1usize << l)
        .map(|r| (0..l).map(|j| ((r >> j) & 1) as f64).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn auc_ignores_monotone_transforms(
        scores in proptest::collection::vec(-5.0f64..5.0, 2..200),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<bool> = scores.iter().map(|_| rng.gen()).collect();
        labels[0] = true;
        labels[1] = false;
        let a = auc(&scores, &labels).unwrap();
        let t: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() + 3.0 * s).collect();
        prop_assert!((a - auc(&t, &labels).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn scaling_weights_keeps_labels(seed in any::<u64>(), lambda in 0.01f64..100.0, multi in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let task = if multi { Task::Multiclass } else { Task::Binary };
        let (rs, l) = random_ruleset(&mut rng, task);
        let mut scaled = rs.clone();
        scaled.bias.iter_mut().for_each(|b| *b *= lambda);
        for r in &mut scaled.rules {
            r.weights.iter_mut().for_each(|w| *w *= lambda);
        }
        for row in rows(l) {
            let a = predict(&rs, &row).unwrap();
            let b = predict(&scaled, &row).unwrap();
            // Exact ties can be broken differently after rounding.
            let tied = {
                let mut s = a.scores.clone();
                s.sort_by(f64::total_cmp);
                s.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-9)
            };
            if !tied {
                prop_assert_eq!(a.label, b.label);
            }
        }
    }

    #[test]
    fn rule_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rs, l) = random_ruleset(&mut rng, Task::Regression);
        let mut shuffled = rs.clone();
        rand::seq::SliceRandom::shuffle(&mut shuffled.rules[..], &mut rng);
        for row in rows(l) {
            let a = predict(&rs, &row).unwrap().scores;
            let b = predict(&shuffled, &row).unwrap().scores;
            prop_assert!((a[0] - b[0]).abs() < 1e-12);
        }
    }
}
