use serde::{Deserialize, Serialize};

use crate::data::{FeatureKind, FeatureSchema};
use crate::net::BatchNorm;

/// What an input bit means in terms of its feature's raw value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The 0/1 feature is 1.
    IsTrue,
    /// The 0/1 feature is 0.
    IsFalse,
    /// `x > t`.
    Greater(f64),
    /// `x < t`.
    Less(f64),
    /// The bit never depends on the feature.
    Constant(bool),
}

impl Condition {
    #[inline]
    pub fn eval(&self, x: f64) -> bool {
        match *self {
            Condition::IsTrue => x != 0.0,
            Condition::IsFalse => x == 0.0,
            Condition::Greater(t) => x > t,
            Condition::Less(t) => x < t,
            Condition::Constant(b) => b,
        }
    }

    pub fn constant(&self) -> Option<bool> {
        match self {
            Condition::Constant(b) => Some(*b),
            _ => None,
        }
    }

    /// Same test, comparing thresholds bit for bit.
    pub fn same(&self, other: &Condition) -> bool {
        match (self, other) {
            (Condition::Greater(a), Condition::Greater(b)) | (Condition::Less(a), Condition::Less(b)) => {
                a.to_bits() == b.to_bits()
            }
            _ => self == other,
        }
    }
}

/// Map a float to an integer preserving order, so that adjacent floats are
/// adjacent integers.
fn key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | 1 << 63
    }
}

fn unkey(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1 << 63))
    } else {
        f64::from_bits(!k)
    }
}

/// Largest finite `t` with `pred(t)` false, given `pred` monotone false→true
/// on the finite floats. `None` if `pred` is true everywhere or false
/// everywhere.
fn last_false<F: Fn(f64) -> bool>(guess: f64, pred: F) -> Option<f64> {
    let lo_end = key(f64::MIN);
    let hi_end = key(f64::MAX);
    if pred(f64::MIN) || !pred(f64::MAX) {
        return None;
    }
    let start = if guess.is_finite() { key(guess) } else { key(0.0) };
    // Bracket with growing steps around the guess.
    let (mut lo, mut hi);
    if pred(unkey(start)) {
        hi = start;
        let mut step = 1u64;
        loop {
            let cand = hi.saturating_sub(step).max(lo_end);
            if !pred(unkey(cand)) {
                lo = cand;
                break;
            }
            hi = cand;
            step = step.saturating_mul(2);
        }
    } else {
        lo = start;
        let mut step = 1u64;
        loop {
            let cand = lo.saturating_add(step).min(hi_end);
            if pred(unkey(cand)) {
                hi = cand;
                break;
            }
            lo = cand;
            step = step.saturating_mul(2);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(unkey(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(unkey(lo))
}

/// The condition under which input batch-norm channel `column` emits a 1.
///
/// Binary and one-hot columns only take the values 0 and 1, so the bit is
/// the feature, its negation, or a constant. For continuous columns the
/// threshold is the exact float boundary of `bn.fires`, so `x > t` agrees
/// with the network on every input, not just up to rounding.
pub fn derive_threshold(bn: &BatchNorm, column: usize, schema: &FeatureSchema) -> Condition {
    match schema.column(column).kind {
        FeatureKind::Binary | FeatureKind::CategoricalExpanded => {
            match (bn.fires(column, 0.0), bn.fires(column, 1.0)) {
                (false, true) => Condition::IsTrue,
                (true, false) => Condition::IsFalse,
                (b, _) => Condition::Constant(b),
            }
        }
        FeatureKind::Continuous => continuous_condition(bn, column),
    }
}

pub(crate) fn continuous_condition(bn: &BatchNorm, c: usize) -> Condition {
    let gamma = bn.gamma[c];
    if gamma == 0.0 || !gamma.is_finite() {
        return Condition::Constant(bn.fires(c, bn.running_mean[c]));
    }
    let guess = bn.running_mean[c] - bn.beta[c] * bn.std(c) / gamma;
    if gamma > 0.0 {
        match last_false(guess, |x| bn.fires(c, x)) {
            Some(t) => Condition::Greater(t),
            None => Condition::Constant(bn.fires(c, 0.0)),
        }
    } else {
        // Fires for small x: the first non-firing value is the bound.
        match last_false(-guess, |x| bn.fires(c, -x)) {
            Some(t) => Condition::Less(-t),
            None => Condition::Constant(bn.fires(c, 0.0)),
        }
    }
}
