use std::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::bn::BatchNorm;
use super::block::{LttBlock, LttSpec};
use crate::data::{FeatureSchema, TargetScaler, Task};
use crate::error::{Error, Result};
use crate::inference::{decide, Label};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    /// Weights `sign(w) * step(mask)`, so every effective weight is -1, 0 or +1.
    BinarySparse,
    Float,
}

impl std::str::FromStr for HeadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "binary_sparse" | "binary" | "small" => Ok(HeadMode::BinarySparse),
            "float" | "big" => Ok(HeadMode::Float),
            other => Err(Error::Config(format!("unknown head mode `{other}`"))),
        }
    }
}

/// Linear head over the rule slots. Weight and mask tensors are
/// `slots x outputs`, row-major by slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub mode: HeadMode,
    pub outputs: usize,
    pub weights: Vec<f64>,
    /// Latent BinMask values; unused in float mode.
    pub mask: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Head {
    #[inline]
    pub fn effective(&self, idx: usize) -> f64 {
        match self.mode {
            HeadMode::Float => self.weights[idx],
            HeadMode::BinarySparse => {
                if self.mask[idx] > 0.0 {
                    if self.weights[idx] >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    0.0
                }
            }
        }
    }

    pub fn effective_weights(&self) -> Vec<f64> {
        (0..self.weights.len()).map(|i| self.effective(i)).collect()
    }
}

/// Final batch-norm and head collapsed into one affine map over slot bits.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldedHead {
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub scores: Vec<f64>,
    pub slots: Vec<bool>,
}

/// Input batch-norm, step, one layer of `F` LTT blocks applied patch-wise,
/// step, final batch-norm over the `F * P` rule slots and a linear head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtnetModel {
    pub schema: FeatureSchema,
    pub task: Task,
    pub spec: LttSpec,
    pub input_bn: BatchNorm,
    pub blocks: Vec<LttBlock>,
    pub final_bn: BatchNorm,
    pub head: Head,
    pub dropout_p: f64,
    pub target_scaler: Option<TargetScaler>,
    /// Set once batch-norm statistics have been recomputed on the training
    /// fold; cleared by any parameter update.
    pub bn_finalized: bool,
}

impl TtnetModel {
    #[allow(clippy::too_many_arguments)]
    pub fn random<R: Rng>(
        schema: FeatureSchema,
        task: Task,
        outputs: usize,
        spec: LttSpec,
        filters: usize,
        head_mode: HeadMode,
        dropout_p: f64,
        rng: &mut R,
    ) -> Result<Self> {
        spec.validate()?;
        let l = schema.len();
        let patches = spec.patch_count(l);
        if patches == 0 {
            return Err(Error::Config(format!(
                "{l} features is narrower than the patch width {}",
                spec.n
            )));
        }
        if filters == 0 || outputs == 0 {
            return Err(Error::Config("filters and outputs must be positive".into()));
        }
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(Error::Config(format!("dropout {dropout_p} not in [0, 1)")));
        }
        let blocks: Vec<LttBlock> = (0..filters).map(|_| LttBlock::random(spec, rng)).collect();
        let slots = filters * patches;
        let normal = Normal::new(0.0, 0.01).unwrap();
        let weights = (0..slots * outputs).map(|_| normal.sample(rng)).collect();
        let mask = match head_mode {
            HeadMode::BinarySparse => (0..slots * outputs)
                .map(|_| f64::abs(normal.sample(rng)))
                .collect(),
            HeadMode::Float => Vec::new(),
        };
        let mut final_bn = BatchNorm::new(slots);
        if head_mode == HeadMode::BinarySparse {
            // Unit weights on every slot would start with huge margins.
            let g = 1.0 / (slots as f64).sqrt();
            final_bn.gamma.iter_mut().for_each(|x| *x = g);
        }
        Ok(TtnetModel {
            schema,
            task,
            spec,
            input_bn: BatchNorm::new(l),
            blocks,
            final_bn,
            head: Head {
                mode: head_mode,
                outputs,
                weights,
                mask,
                bias: vec![0.0; outputs],
            },
            dropout_p,
            target_scaler: None,
            bn_finalized: false,
        })
    }

    /// Shape and invariant check, used after deserialization.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let l = self.schema.len();
        let slots = self.num_slots();
        let c = self.head.outputs;
        let bad = |m: &str| Err(Error::Contract(format!("malformed model: {m}")));
        if self.input_bn.channels() != l || !self.input_bn.is_consistent() {
            return bad("input batch-norm");
        }
        if self.final_bn.channels() != slots || !self.final_bn.is_consistent() {
            return bad("final batch-norm");
        }
        if self.head.weights.len() != slots * c || self.head.bias.len() != c {
            return bad("head shape");
        }
        if self.head.mode == HeadMode::BinarySparse && self.head.mask.len() != slots * c {
            return bad("head mask shape");
        }
        for b in &self.blocks {
            if b.spec != self.spec {
                return bad("block spec differs from model spec");
            }
            LttBlock::new(b.spec, b.w1.clone(), b.inner_bn.clone(), b.w2.clone())?;
        }
        Ok(())
    }

    pub fn num_features(&self) -> usize {
        self.schema.len()
    }

    pub fn num_filters(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_patches(&self) -> usize {
        self.spec.patch_count(self.schema.len())
    }

    pub fn num_slots(&self) -> usize {
        self.num_filters() * self.num_patches()
    }

    pub fn num_outputs(&self) -> usize {
        self.head.outputs
    }

    #[inline]
    pub fn slot_index(&self, filter: usize, patch: usize) -> usize {
        filter * self.num_patches() + patch
    }

    pub fn patch_columns(&self, patch: usize) -> Range<usize> {
        let start = patch * self.spec.stride;
        start..start + self.spec.n
    }

    pub fn input_bits(&self, row: &[f64]) -> Vec<bool> {
        row.iter()
            .enumerate()
            .map(|(j, &x)| self.input_bn.fires(j, x))
            .collect()
    }

    /// Binary outputs of every (filter, patch) pair, slot-major by filter.
    pub fn slot_bits(&self, row: &[f64]) -> Vec<bool> {
        let bits = self.input_bits(row);
        let mut out = Vec::with_capacity(self.num_slots());
        for block in &self.blocks {
            for i in 0..self.num_patches() {
                out.push(block.forward(&bits[self.patch_columns(i)]));
            }
        }
        out
    }

    /// Fold the final batch-norm into the head: on a bit `b` the normalized
    /// slot is `o(0) + (o(1) - o(0)) * b`.
    pub fn fold_head(&self) -> FoldedHead {
        let c = self.head.outputs;
        let mut weights = vec![0.0; self.num_slots() * c];
        let mut bias = self.head.bias.clone();
        for k in 0..self.num_slots() {
            let o0 = self.final_bn.apply(k, 0.0);
            let o1 = self.final_bn.apply(k, 1.0);
            for (cls, b) in bias.iter_mut().enumerate() {
                let w = self.head.effective(k * c + cls);
                weights[k * c + cls] = w * (o1 - o0);
                *b += w * o0;
            }
        }
        FoldedHead {
            outputs: c,
            weights,
            bias,
        }
    }

    pub fn predictor(&self) -> Predictor<'_> {
        Predictor {
            model: self,
            head: self.fold_head(),
        }
    }

    /// Inference-mode forward pass of one encoded row.
    pub fn forward(&self, row: &[f64]) -> Result<Forward> {
        self.predictor().forward(row)
    }
}

/// A model with its head folded once, for evaluating many rows.
pub struct Predictor<'a> {
    pub model: &'a TtnetModel,
    pub head: FoldedHead,
}

impl Predictor<'_> {
    pub fn forward(&self, row: &[f64]) -> Result<Forward> {
        if row.len() != self.model.num_features() {
            return Err(Error::Contract(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.model.num_features()
            )));
        }
        let slots = self.model.slot_bits(row);
        let c = self.head.outputs;
        let mut scores = self.head.bias.clone();
        for (k, _) in slots.iter().enumerate().filter(|(_, s)| **s) {
            for (cls, s) in scores.iter_mut().enumerate() {
                *s += self.head.weights[k * c + cls];
            }
        }
        Ok(Forward { scores, slots })
    }

    pub fn label(&self, scores: &[f64]) -> Label {
        decide(self.model.task, scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::block as toy_block;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_model() -> TtnetModel {
        let schema =
            FeatureSchema::binary(&["Male", "Go Uni.", "Married", "Born US", "Born UK"]).unwrap();
        let blk = toy_block();
        let mut m = TtnetModel::random(
            schema,
            Task::Binary,
            2,
            blk.spec,
            1,
            HeadMode::Float,
            0.0,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        m.blocks[0] = blk;
        // Identity-ish input threshold: bit = x > 0.5.
        m.input_bn.beta = vec![0.0; 5];
        m.input_bn.running_mean = vec![0.5; 5];
        m
    }

    #[test]
    fn zero_head_scores_equal_bias() {
        let mut m = example_model();
        m.head.weights.iter_mut().for_each(|w| *w = 0.0);
        m.head.bias = vec![0.25, -1.5];
        let f = m.forward(&[1.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.scores, vec![0.25, -1.5]);
    }

    #[test]
    fn slots_follow_patches() {
        let m = example_model();
        assert_eq!(m.num_slots(), 2);
        // Patch 0 = (Male, GoUni, Married, BornUS) = 0001 fires.
        assert_eq!(m.slot_bits(&[0.0, 0.0, 0.0, 1.0, 0.0]), vec![true, false]);
        // Patch 1 = (GoUni, Married, BornUS, BornUK) = 0001 fires.
        assert_eq!(m.slot_bits(&[1.0, 0.0, 0.0, 0.0, 1.0]), vec![false, true]);
    }

    #[test]
    fn single_slot_margin() {
        let schema = FeatureSchema::binary(&["a", "b", "c", "d"]).unwrap();
        let blk = toy_block();
        let mut m = TtnetModel::random(
            schema,
            Task::Binary,
            2,
            blk.spec,
            1,
            HeadMode::Float,
            0.0,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        m.blocks[0] = blk;
        m.input_bn.running_mean = vec![0.5; 4];
        // Final BN as identity on bits.
        m.final_bn.running_var = vec![1.0 - m.final_bn.eps];
        m.head.weights = vec![0.0, 1.0];
        m.head.bias = vec![0.0, 0.0];
        let f = m.forward(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.slots, vec![true]);
        assert!((f.scores[1] - f.scores[0] - 1.0).abs() < 1e-12);
        assert!(m.forward(&[0.0; 3]).is_err());
    }

    #[test]
    fn binary_head_effective_weights() {
        let h = Head {
            mode: HeadMode::BinarySparse,
            outputs: 1,
            weights: vec![0.3, -0.2, 0.5],
            mask: vec![0.1, 0.4, -0.1],
            bias: vec![0.0],
        };
        assert_eq!(h.effective_weights(), vec![1.0, -1.0, 0.0]);
    }
}
