use serde::{Deserialize, Serialize};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Heaviside step: 1 iff `x > 0`; the tie at zero resolves to 0.
#[inline]
pub fn bin_act(x: f64) -> bool {
    x > 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            eps: BN_EPS,
            momentum: BN_MOMENTUM,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    #[inline]
    pub fn std(&self, c: usize) -> f64 {
        (self.running_var[c] + self.eps).sqrt()
    }

    /// Inference-mode normalization of channel `c`.
    ///
    /// Every step is monotone in `x`, so `bin_act(apply(c, x))` is a
    /// threshold test on `x`; rule thresholds rely on this.
    #[inline]
    pub fn apply(&self, c: usize, x: f64) -> f64 {
        self.gamma[c] * ((x - self.running_mean[c]) / self.std(c)) + self.beta[c]
    }

    #[inline]
    pub fn fires(&self, c: usize, x: f64) -> bool {
        bin_act(self.apply(c, x))
    }

    pub(crate) fn momentum_update(&mut self, mean: &[f64], unbiased_var: &[f64]) {
        let m = self.momentum;
        for c in 0..self.channels() {
            self.running_mean[c] = (1.0 - m) * self.running_mean[c] + m * mean[c];
            self.running_var[c] = (1.0 - m) * self.running_var[c] + m * unbiased_var[c];
        }
    }

    pub(crate) fn is_consistent(&self) -> bool {
        let c = self.channels();
        self.beta.len() == c
            && self.running_mean.len() == c
            && self.running_var.len() == c
            && self.running_var.iter().all(|v| *v >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_act_cases() {
        assert!(bin_act(0.3));
        assert!(!bin_act(-2.0));
        assert!(!bin_act(0.0));
        assert!(!bin_act(-0.0));
    }

    #[test]
    fn apply_is_affine() {
        let mut bn = BatchNorm::new(1);
        bn.gamma[0] = 2.0;
        bn.beta[0] = -1.0;
        bn.running_var[0] = 1.0 - BN_EPS;
        assert!((bn.apply(0, 0.5)).abs() < 1e-12);
        assert!(bn.fires(0, 0.6));
        assert!(!bn.fires(0, 0.4));
    }
}
