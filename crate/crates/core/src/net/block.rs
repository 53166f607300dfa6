use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bn::{bin_act, BatchNorm};
use crate::error::{Error, Result};

/// Largest patch width whose truth table is enumerated.
pub const MAX_BLOCK_INPUTS: usize = 9;

/// Shape of one learning-truth-table block: a width-`k1` convolution with
/// `amplification` output channels, optional batch-norm, ReLU, then a
/// width-`k2` convolution down to a single channel. Both inner convolutions
/// have stride 1, so the block reads `k1 + k2 - 1 = n` inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LttSpec {
    pub n: usize,
    pub stride: usize,
    pub amplification: usize,
    pub k1: usize,
    pub k2: usize,
    pub inner_bn: bool,
}

impl LttSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.n == 0 || self.n > MAX_BLOCK_INPUTS {
            return err(format!("patch width n={} must be in 1..=9", self.n));
        }
        if self.stride == 0 || self.amplification == 0 || self.k1 == 0 || self.k2 == 0 {
            return err("stride, amplification and kernels must be positive".into());
        }
        if self.k1 + self.k2 - 1 != self.n {
            return err(format!(
                "kernels k1={} and k2={} read {} inputs, not n={}",
                self.k1,
                self.k2,
                self.k1 + self.k2 - 1,
                self.n
            ));
        }
        Ok(())
    }

    /// Patches of a valid convolution over `l` columns: `(l - n) / s + 1`.
    pub fn patch_count(&self, l: usize) -> usize {
        if l < self.n {
            0
        } else {
            (l - self.n) / self.stride + 1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LttBlock {
    pub spec: LttSpec,
    /// First convolution, `amplification x k1`, row-major by channel.
    pub w1: Vec<f64>,
    pub inner_bn: Option<BatchNorm>,
    /// Second convolution, `k2 x amplification`, row-major by kernel tap.
    pub w2: Vec<f64>,
}

impl LttBlock {
    pub fn new(spec: LttSpec, w1: Vec<f64>, inner_bn: Option<BatchNorm>, w2: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let a = spec.amplification;
        if w1.len() != a * spec.k1 || w2.len() != spec.k2 * a {
            return Err(Error::Contract(format!(
                "weight shapes {}/{} do not match spec ({}x{}, {}x{})",
                w1.len(),
                w2.len(),
                a,
                spec.k1,
                spec.k2,
                a
            )));
        }
        if let Some(bn) = &inner_bn {
            if bn.channels() != a {
                return Err(Error::Contract("inner batch-norm width != amplification".into()));
            }
        }
        Ok(LttBlock { spec, w1, inner_bn, w2 })
    }

    /// Random weights as used at initialization; inner batch-norm at identity.
    pub fn random<R: Rng>(spec: LttSpec, rng: &mut R) -> Self {
        let a = spec.amplification;
        let b1 = 1.0 / (spec.k1 as f64).sqrt();
        let b2 = 1.0 / ((a * spec.k2) as f64).sqrt();
        let w1 = (0..a * spec.k1).map(|_| rng.gen_range(-b1..b1)).collect();
        let w2 = (0..spec.k2 * a).map(|_| rng.gen_range(-b2..b2)).collect();
        let inner_bn = spec.inner_bn.then(|| BatchNorm::new(a));
        LttBlock { spec, w1, inner_bn, w2 }
    }

    /// Real-valued output of the second convolution for one patch.
    pub fn preactivation(&self, bits: &[bool]) -> f64 {
        assert_eq!(bits.len(), self.spec.n, "block input must have n bits");
        let LttSpec {
            amplification: a,
            k1,
            k2,
            ..
        } = self.spec;
        let mut out = 0.0;
        for t in 0..k2 {
            for ch in 0..a {
                let w = &self.w1[ch * k1..(ch + 1) * k1];
                let mut h = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    if bits[t + j] {
                        h += wj;
                    }
                }
                let g = match &self.inner_bn {
                    Some(bn) => bn.apply(ch, h),
                    None => h,
                };
                out += self.w2[t * a + ch] * g.max(0.0);
            }
        }
        out
    }

    /// Binary output of the block on an `n`-bit patch.
    ///
    /// # Panics
    /// If `bits.len() != n`.
    pub fn forward(&self, bits: &[bool]) -> bool {
        bin_act(self.preactivation(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::block as toy_block;

    fn b(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn toy_rows() {
        let blk = toy_block();
        assert!(blk.forward(&b("0001")));
        assert_eq!(blk.preactivation(&b("0001")), 1.0);
        assert!(!blk.forward(&b("0000")));
        assert_eq!(blk.preactivation(&b("0000")), 0.0);
        assert!(!blk.forward(&b("0011")));
        assert_eq!(blk.preactivation(&b("0011")), -40.0);
    }

    #[test]
    #[should_panic]
    fn wrong_length_panics() {
        toy_block().forward(&b("001"));
    }

    #[test]
    fn spec_validation() {
        let mut s = toy_block().spec;
        assert!(s.validate().is_ok());
        s.k2 = 3;
        assert!(s.validate().is_err());
        let wide = LttSpec {
            n: 10,
            stride: 1,
            amplification: 1,
            k1: 10,
            k2: 1,
            inner_bn: false,
        };
        assert!(wide.validate().is_err());
    }

    #[test]
    fn patch_counts() {
        let s = toy_block().spec;
        assert_eq!(s.patch_count(5), 2);
        assert_eq!(s.patch_count(4), 1);
        assert_eq!(s.patch_count(3), 0);
        let adult = LttSpec {
            n: 5,
            stride: 5,
            amplification: 10,
            k1: 5,
            k2: 1,
            inner_bn: true,
        };
        assert_eq!(adult.patch_count(100), 20);
    }
}
