use super::extract::{reduce_rule, Extractor};
use super::ruleset::{Provenance, Rule, RuleSet};
use crate::error::{Error, Result};
use crate::net::TtnetModel;

pub const DEFAULT_TTC_THRESHOLD: f64 = 0.9;

/// Truth-table correlation: the agreement fraction `a` when `a >= 1/2`,
/// otherwise `-(1 - a)`. Identical tables give 1, complementary ones -1.
pub fn ttc(y1: &[bool], y2: &[bool]) -> Result<f64> {
    if y1.len() != y2.len() {
        return Err(Error::Contract(format!(
            "tables of length {} and {} cannot be compared",
            y1.len(),
            y2.len()
        )));
    }
    if y1.is_empty() {
        return Ok(1.0);
    }
    let agree = y1.iter().zip(y2).filter(|(a, b)| a == b).count();
    let a = agree as f64 / y1.len() as f64;
    Ok(if a >= 0.5 { a } else { -(1.0 - a) })
}

/// One merge performed by [`dedup_filters`].
#[derive(Clone, Debug, PartialEq)]
pub struct Merge {
    pub kept: usize,
    pub removed: usize,
    pub ttc: f64,
}

/// Remove filters whose truth tables correlate with an earlier filter's at
/// `|ttc| >= threshold`, folding their weights into the kept filter, patch
/// by patch. For anti-correlated pairs the removed rule `g` is rewritten as
/// `1 - f`, which moves its weights into the bias.
pub fn dedup_filters(ruleset: &RuleSet, model: &TtnetModel, threshold: f64) -> Result<RuleSet> {
    Ok(dedup_filters_logged(ruleset, model, threshold)?.0)
}

pub fn dedup_filters_logged(
    ruleset: &RuleSet,
    model: &TtnetModel,
    threshold: f64,
) -> Result<(RuleSet, Vec<Merge>)> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(Error::Config(format!("TTC threshold {threshold} not in (0.5, 1]")));
    }
    let mut ex = Extractor::new(model)?;
    let f_count = model.num_filters();
    let mut alive = vec![true; f_count];
    let mut merges = Vec::new();
    for f in 0..f_count {
        if !alive[f] {
            continue;
        }
        for g in f + 1..f_count {
            if !alive[g] {
                continue;
            }
            let t = ttc(&ex.tables[f].outputs, &ex.tables[g].outputs)?;
            if t.abs() >= threshold {
                alive[g] = false;
                merges.push(Merge {
                    kept: f,
                    removed: g,
                    ttc: t,
                });
            }
        }
    }
    if merges.is_empty() {
        return Ok((ruleset.clone(), merges));
    }

    let mut out = ruleset.clone();
    let c = out.outputs;
    for m in &merges {
        for i in 0..model.num_patches() {
            let Some(gi) = out
                .rules
                .iter()
                .position(|r| r.filter == Some(m.removed) && r.patch == Some(i))
            else {
                continue;
            };
            let wg = out.rules.remove(gi).weights;
            let fi = match out
                .rules
                .iter()
                .position(|r| r.filter == Some(m.kept) && r.patch == Some(i))
            {
                Some(p) => p,
                None => {
                    let mut r: Rule = ex.slot_rule(m.kept, i);
                    if out.dct {
                        r = reduce_rule(&r, &out.schema);
                    }
                    r.weights = vec![0.0; c];
                    out.rules.push(r);
                    out.rules.len() - 1
                }
            };
            let rf = &mut out.rules[fi];
            for k in 0..c {
                if m.ttc > 0.0 {
                    rf.weights[k] += wg[k];
                } else {
                    rf.weights[k] -= wg[k];
                    out.bias[k] += wg[k];
                }
            }
        }
    }
    out.drop_zero_rules();
    out.rules.sort_by_key(|r| r.id);
    out.provenance = Provenance::TtcDeduped;
    Ok((out, merges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ttc_examples() {
        let y = [false, true, false, true];
        let ny: Vec<bool> = y.iter().map(|b| !b).collect();
        assert_eq!(ttc(&y, &y).unwrap(), 1.0);
        assert_eq!(ttc(&y, &ny).unwrap(), -1.0);
        assert_eq!(ttc(&y, &[false, true, false, false]).unwrap(), 0.75);
        assert_eq!(ttc(&y, &[true, true, false, false]).unwrap(), 0.5);
        assert_eq!(ttc(&y, &[true, false, false, false]).unwrap(), -0.75);
        assert!(ttc(&y, &[true]).is_err());
    }
}
