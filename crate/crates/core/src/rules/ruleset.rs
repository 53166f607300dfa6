use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::condition::Condition;
use crate::data::{FeatureSchema, TargetScaler, Task};
use crate::error::{Error, Result};
use crate::logic::Dnf;

/// A rule variable: the condition on one feature that the variable stands for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub column: usize,
    pub feature: String,
    pub condition: Condition,
}

impl Binding {
    #[inline]
    pub fn eval(&self, row: &[f64]) -> bool {
        self.condition.eval(row[self.column])
    }
}

/// A literal expressed on the feature itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Test {
    IsOne,
    IsZero,
    Gt(f64),
    Le(f64),
    Lt(f64),
    Ge(f64),
}

impl Test {
    /// Negative tests render after positive ones.
    pub fn is_negative(&self) -> bool {
        matches!(self, Test::IsZero | Test::Le(_) | Test::Ge(_))
    }

    pub fn eval(&self, x: f64) -> bool {
        match *self {
            Test::IsOne => x != 0.0,
            Test::IsZero => x == 0.0,
            Test::Gt(t) => x > t,
            Test::Le(t) => x <= t,
            Test::Lt(t) => x < t,
            Test::Ge(t) => x >= t,
        }
    }

    fn bits(&self) -> (u8, u64) {
        match *self {
            Test::IsOne => (0, 0),
            Test::IsZero => (1, 0),
            Test::Gt(t) => (2, t.to_bits()),
            Test::Le(t) => (3, t.to_bits()),
            Test::Lt(t) => (4, t.to_bits()),
            Test::Ge(t) => (5, t.to_bits()),
        }
    }

    /// The variable condition and polarity this test corresponds to.
    pub fn as_literal(&self) -> (Condition, bool) {
        match *self {
            Test::IsOne => (Condition::IsTrue, true),
            Test::IsZero => (Condition::IsTrue, false),
            Test::Gt(t) => (Condition::Greater(t), true),
            Test::Le(t) => (Condition::Greater(t), false),
            Test::Lt(t) => (Condition::Less(t), true),
            Test::Ge(t) => (Condition::Less(t), false),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Atom {
    pub column: usize,
    pub test: Test,
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.column == other.column && self.test.bits() == other.test.bits()
    }
}

impl Atom {
    fn sort_key(&self) -> (bool, usize, (u8, u64)) {
        (self.test.is_negative(), self.column, self.test.bits())
    }
}

/// Recorded don't-care handling of a rule: which rows were free and what
/// the minimized rule does on them (hex, table row order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcRecord {
    pub mask: String,
    pub realized: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: usize,
    /// Filter and patch this rule was extracted from; absent for hand-written
    /// rules.
    #[serde(default)]
    pub filter: Option<usize>,
    #[serde(default)]
    pub patch: Option<usize>,
    pub vars: Vec<Binding>,
    pub dnf: Dnf,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dc: Option<DcRecord>,
}

impl Rule {
    pub fn var_bits(&self, row: &[f64]) -> Vec<bool> {
        self.vars.iter().map(|b| b.eval(row)).collect()
    }

    pub fn fires(&self, row: &[f64]) -> bool {
        self.dnf
            .clauses
            .iter()
            .any(|c| c.iter().all(|l| self.vars[l.var].eval(row) == l.positive))
    }

    pub fn literal_count(&self) -> usize {
        self.atoms().iter().map(Vec::len).sum()
    }

    pub fn has_weight(&self) -> bool {
        self.weights.iter().any(|w| *w != 0.0)
    }

    /// Clauses as feature tests, each sorted positive-first then by column.
    /// Literals on constant variables are resolved: true ones vanish, and a
    /// clause containing a false one is dropped.
    pub fn atoms(&self) -> Vec<Vec<Atom>> {
        let mut out = Vec::with_capacity(self.dnf.clauses.len());
        'clause: for c in &self.dnf.clauses {
            let mut atoms = Vec::with_capacity(c.len());
            for l in c {
                let b = &self.vars[l.var];
                let test = match (b.condition, l.positive) {
                    (Condition::Constant(v), p) => {
                        if v == p {
                            continue;
                        }
                        continue 'clause;
                    }
                    (Condition::IsTrue, true) | (Condition::IsFalse, false) => Test::IsOne,
                    (Condition::IsTrue, false) | (Condition::IsFalse, true) => Test::IsZero,
                    (Condition::Greater(t), true) => Test::Gt(t),
                    (Condition::Greater(t), false) => Test::Le(t),
                    (Condition::Less(t), true) => Test::Lt(t),
                    (Condition::Less(t), false) => Test::Ge(t),
                };
                atoms.push(Atom {
                    column: b.column,
                    test,
                });
            }
            atoms.sort_by_key(|a| a.sort_key());
            out.push(atoms);
        }
        out
    }

    fn validate(&self, outputs: usize, features: usize) -> Result<()> {
        if self.weights.len() != outputs {
            return Err(Error::Contract(format!(
                "rule {} has {} weights, expected {outputs}",
                self.id,
                self.weights.len()
            )));
        }
        if self.vars.iter().any(|b| b.column >= features) {
            return Err(Error::Schema(format!("rule {} reads a column outside the schema", self.id)));
        }
        if self.dnf.clauses.iter().flatten().any(|l| l.var >= self.vars.len()) {
            return Err(Error::Contract(format!("rule {} uses an unbound variable", self.id)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    RawR,
    DctReduced,
    TtcDeduped,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::RawR => "raw_r",
            Provenance::DctReduced => "dct_reduced",
            Provenance::TtcDeduped => "ttc_deduped",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw_r" => Ok(Provenance::RawR),
            "dct_reduced" => Ok(Provenance::DctReduced),
            "ttc_deduped" => Ok(Provenance::TtcDeduped),
            _ => Err(Error::Config(format!("unknown provenance `{s}`"))),
        }
    }
}

/// A rule-based model: `score_c = bias_c + sum of weights_c of fired rules`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub task: Task,
    pub outputs: usize,
    pub provenance: Provenance,
    /// Set when DCT reduction has been applied, whatever came after.
    #[serde(default)]
    pub dct: bool,
    pub schema: FeatureSchema,
    pub bias: Vec<f64>,
    pub rules: Vec<Rule>,
    #[serde(default)]
    pub target_scaler: Option<TargetScaler>,
}

impl RuleSet {
    pub fn validate(&self) -> Result<()> {
        if self.bias.len() != self.outputs {
            return Err(Error::Contract("bias length differs from output count".into()));
        }
        let mut ids = HashSet::new();
        for r in &self.rules {
            if !ids.insert(r.id) {
                return Err(Error::Contract(format!("duplicate rule id {}", r.id)));
            }
            r.validate(self.outputs, self.schema.len())?;
        }
        Ok(())
    }

    pub fn drop_zero_rules(&mut self) {
        self.rules.retain(Rule::has_weight);
    }

    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Number of weighted rules and their total literal count.
    pub fn complexity(&self) -> (usize, usize) {
        complexity(self)
    }

    /// Equal up to variable numbering: same task, bias, rule ids, weights and
    /// clauses as feature tests.
    pub fn equivalent(&self, other: &RuleSet) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        self.task == other.task
            && self.outputs == other.outputs
            && bits(&self.bias) == bits(&other.bias)
            && self.rules.len() == other.rules.len()
            && self.rules.iter().zip(&other.rules).all(|(a, b)| {
                a.id == b.id && bits(&a.weights) == bits(&b.weights) && a.atoms() == b.atoms()
            })
    }
}

pub fn complexity(ruleset: &RuleSet) -> (usize, usize) {
    ruleset
        .rules
        .iter()
        .filter(|r| r.has_weight())
        .fold((0, 0), |(n, l), r| (n + 1, l + r.literal_count()))
}

/// Pre-training size estimate `n * 2^(n-1) * floor((L - n) / s) * F`.
pub fn estimate_complexity(n: usize, l: usize, s: usize, f: usize) -> Result<u64> {
    if n == 0 || s == 0 || n > l {
        return Err(Error::Config(format!(
            "estimate needs 1 <= n <= L and s >= 1 (got n={n}, L={l}, s={s})"
        )));
    }
    if n > 63 {
        return Err(Error::Config(format!("n={n} is too large")));
    }
    let v = (n as u64)
        .checked_mul(1u64 << (n - 1))
        .and_then(|v| v.checked_mul(((l - n) / s) as u64))
        .and_then(|v| v.checked_mul(f as u64))
        .ok_or_else(|| Error::Config("estimate overflows".into()))?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_values() {
        assert_eq!(estimate_complexity(5, 100, 5, 10).unwrap(), 15_200);
        assert_eq!(estimate_complexity(1, 21, 4, 3).unwrap(), 15);
        assert_eq!(estimate_complexity(5, 100, 5, 0).unwrap(), 0);
        assert!(estimate_complexity(6, 5, 1, 1).is_err());
    }
}
