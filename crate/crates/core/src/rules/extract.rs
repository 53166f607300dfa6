use std::collections::HashMap;

use super::condition::{derive_threshold, Condition};
use super::ruleset::{Binding, DcRecord, Provenance, Rule, RuleSet};
use crate::data::FeatureSchema;
use crate::error::{Error, Result};
use crate::logic::{bit_of, bits_to_hex, enumerate_block, quine_mccluskey, Dnf, TruthTable};
use crate::net::{FoldedHead, TtnetModel, MAX_BLOCK_INPUTS};

/// Conditions of every input column under the model's input batch-norm.
pub fn input_conditions(model: &TtnetModel) -> Vec<Condition> {
    (0..model.num_features())
        .map(|c| derive_threshold(&model.input_bn, c, &model.schema))
        .collect()
}

pub fn filter_tables(model: &TtnetModel) -> Result<Vec<TruthTable>> {
    model
        .blocks
        .iter()
        .enumerate()
        .map(|(f, b)| enumerate_block(b, f))
        .collect()
}

/// Rows of an assignment to `vars` that no input can produce: a constant
/// variable taking its other value, one feature forced to two values, or
/// two columns of one one-hot group both set.
pub fn unreachable_rows(schema: &FeatureSchema, vars: &[Binding]) -> Vec<bool> {
    let n = vars.len();
    assert!(n <= MAX_BLOCK_INPUTS, "at most {MAX_BLOCK_INPUTS} variables");
    (0..1usize << n)
        .map(|r| {
            // (column, forced 0/1 value) pairs implied by this row.
            let mut forced: Vec<(usize, bool)> = Vec::with_capacity(n);
            for (j, b) in vars.iter().enumerate() {
                let bit = bit_of(n, r, j);
                let x = match b.condition {
                    Condition::Constant(v) => {
                        if v != bit {
                            return true;
                        }
                        continue;
                    }
                    Condition::IsTrue => bit,
                    Condition::IsFalse => !bit,
                    Condition::Greater(_) | Condition::Less(_) => continue,
                };
                if forced.iter().any(|&(c, v)| c == b.column && v != x) {
                    return true;
                }
                forced.push((b.column, x));
            }
            let mut hot: Vec<(usize, usize)> = forced
                .iter()
                .filter(|(_, v)| *v)
                .filter_map(|&(c, _)| schema.column(c).group_id.map(|g| (g, c)))
                .collect();
            hot.sort_unstable();
            hot.dedup();
            hot.windows(2).any(|w| w[0].0 == w[1].0)
        })
        .collect()
}

/// Rows where some constant variable takes its other value.
fn constant_mismatch_rows(vars: &[Binding]) -> Vec<bool> {
    let n = vars.len();
    (0..1usize << n)
        .map(|r| {
            vars.iter()
                .enumerate()
                .any(|(j, b)| matches!(b.condition, Condition::Constant(v) if v != bit_of(n, r, j)))
        })
        .collect()
}

/// Everything needed to turn (filter, patch) slots into rules.
pub struct Extractor<'a> {
    model: &'a TtnetModel,
    pub tables: Vec<TruthTable>,
    pub conditions: Vec<Condition>,
    pub head: FoldedHead,
    cache: HashMap<(usize, Vec<Option<bool>>), Dnf>,
}

impl<'a> Extractor<'a> {
    pub fn new(model: &'a TtnetModel) -> Result<Self> {
        if !model.bn_finalized {
            return Err(Error::State(
                "batch-norm statistics are stale; recompute them on the training fold first".into(),
            ));
        }
        model.validate()?;
        Ok(Extractor {
            model,
            tables: filter_tables(model)?,
            conditions: input_conditions(model),
            head: model.fold_head(),
            cache: HashMap::new(),
        })
    }

    pub fn bindings(&self, patch: usize) -> Vec<Binding> {
        self.model
            .patch_columns(patch)
            .map(|c| Binding {
                column: c,
                feature: self.model.schema.column(c).name.clone(),
                condition: self.conditions[c],
            })
            .collect()
    }

    /// The rule of slot `(filter, patch)`, minimized with constant inputs
    /// cofactored out.
    pub fn slot_rule(&mut self, filter: usize, patch: usize) -> Rule {
        let vars = self.bindings(patch);
        let sig: Vec<Option<bool>> = vars.iter().map(|b| b.condition.constant()).collect();
        let table = &self.tables[filter];
        let dnf = self
            .cache
            .entry((filter, sig))
            .or_insert_with(|| quine_mccluskey(&table.outputs, &constant_mismatch_rows(&vars)))
            .clone();
        let slot = self.model.slot_index(filter, patch);
        let c = self.head.outputs;
        Rule {
            id: slot,
            filter: Some(filter),
            patch: Some(patch),
            vars,
            dnf,
            weights: self.head.weights[slot * c..(slot + 1) * c].to_vec(),
            dc: None,
        }
    }

    pub fn extract(&mut self) -> RuleSet {
        let mut rules = Vec::new();
        for f in 0..self.model.num_filters() {
            for i in 0..self.model.num_patches() {
                let slot = self.model.slot_index(f, i);
                let c = self.head.outputs;
                if self.head.weights[slot * c..(slot + 1) * c].iter().any(|w| *w != 0.0) {
                    rules.push(self.slot_rule(f, i));
                }
            }
        }
        rules.sort_by_key(|r| r.id);
        RuleSet {
            task: self.model.task,
            outputs: self.head.outputs,
            provenance: Provenance::RawR,
            dct: false,
            schema: self.model.schema.clone(),
            bias: self.head.bias.clone(),
            rules,
            target_scaler: self.model.target_scaler,
        }
    }
}

/// The rule set R of a trained model: one rule per weighted (filter, patch)
/// slot, with the final batch-norm folded into the weights and bias.
pub fn extract_rules(model: &TtnetModel) -> Result<RuleSet> {
    Ok(Extractor::new(model)?.extract())
}

/// Re-minimize one rule treating unreachable assignments as don't-cares.
/// The rule is kept as is unless the result has fewer literals.
pub fn reduce_rule(rule: &Rule, schema: &FeatureSchema) -> Rule {
    let n = rule.vars.len();
    if n > MAX_BLOCK_INPUTS {
        return rule.clone();
    }
    let mask = unreachable_rows(schema, &rule.vars);
    if !mask.iter().any(|b| *b) {
        return rule.clone();
    }
    let table = rule.dnf.truth_table(n);
    let reduced = quine_mccluskey(&table, &mask);
    if reduced.literal_count() >= rule.dnf.literal_count() {
        return rule.clone();
    }
    let realized: Vec<bool> = reduced
        .truth_table(n)
        .iter()
        .zip(&mask)
        .map(|(v, m)| *v && *m)
        .collect();
    Rule {
        dnf: reduced,
        dc: Some(DcRecord {
            mask: bits_to_hex(&mask),
            realized: bits_to_hex(&realized),
        }),
        ..rule.clone()
    }
}

/// DCT reduction of every rule. Firing is unchanged on every input that
/// respects the one-hot constraints.
pub fn apply_dct(ruleset: &RuleSet) -> RuleSet {
    let mut out = ruleset.clone();
    for r in &mut out.rules {
        *r = reduce_rule(r, &ruleset.schema);
    }
    out.provenance = Provenance::DctReduced;
    out.dct = true;
    out
}
