//! A five-feature worked example small enough to check by hand.
//!
//! The features are `Male`, `Go Uni.`, `Married`, `Born US` and `Born UK`,
//! the last two being one-hot columns of a `Born` categorical. One filter of
//! width 4 and stride 1 reads two patches. Its block fires on exactly one
//! input, `0001`, so each patch yields a single 4-literal rule.

use crate::data::{FeatureColumn, FeatureKind, FeatureSchema, Task};
use crate::net::{BatchNorm, Head, HeadMode, LttBlock, LttSpec, TtnetModel};

pub const FEATURES: [&str; 5] = ["Male", "Go Uni.", "Married", "Born US", "Born UK"];

pub fn spec() -> LttSpec {
    LttSpec {
        n: 4,
        stride: 1,
        amplification: 4,
        k1: 3,
        k2: 2,
        inner_bn: false,
    }
}

/// The block whose truth table is 1 at row `0001` only.
pub fn block() -> LttBlock {
    #[rustfmt::skip]
    let w1 = vec![
        10.0, -1.0, 3.0,
        6.0, -5.0, 4.0,
        4.0, 4.0, -3.0,
        4.0, 4.0, 3.0,
    ];
    #[rustfmt::skip]
    let w2 = vec![
        -5.0, 0.0, 9.0, -5.0,
        -5.0, 4.0, 0.0, 0.0,
    ];
    LttBlock::new(spec(), w1, None, w2).expect("valid block")
}

pub fn schema() -> FeatureSchema {
    let columns = FEATURES
        .iter()
        .map(|&name| {
            let born = name.starts_with("Born");
            FeatureColumn {
                name: name.to_string(),
                kind: if born {
                    FeatureKind::CategoricalExpanded
                } else {
                    FeatureKind::Binary
                },
                group_id: born.then_some(0),
                category_label: born.then(|| name[5..].to_string()),
            }
        })
        .collect();
    FeatureSchema::new(columns, vec!["Born".to_string()]).expect("valid schema")
}

/// A finalized binary classifier around [`block`]: inputs fire above 0.5,
/// the final batch-norm is the identity on bits and both rule slots vote
/// `+1` for class 1.
pub fn model() -> TtnetModel {
    let mut input_bn = BatchNorm::new(5);
    input_bn.running_mean = vec![0.5; 5];
    let mut final_bn = BatchNorm::new(2);
    final_bn.running_mean = vec![0.0; 2];
    final_bn.running_var = vec![1.0 - final_bn.eps; 2];
    TtnetModel {
        schema: schema(),
        task: Task::Binary,
        spec: spec(),
        input_bn,
        blocks: vec![block()],
        final_bn,
        head: Head {
            mode: HeadMode::BinarySparse,
            outputs: 2,
            weights: vec![0.5, 0.5, 0.5, 0.5],
            mask: vec![-1.0, 1.0, -1.0, 1.0],
            bias: vec![0.0, 0.0],
        },
        dropout_p: 0.0,
        target_scaler: None,
        bn_finalized: true,
    }
}

/// Rows of `(Male, Go Uni., Married, Born US, Born UK)` as encoded values.
pub fn row(bits: [u8; 5]) -> Vec<f64> {
    bits.iter().map(|&b| b as f64).collect()
}
