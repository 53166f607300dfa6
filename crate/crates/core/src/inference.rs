//! Scoring rows with a rule set, and the usual metrics.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TargetScaler, Task};
use crate::error::{Error, Result};
use crate::net::TtnetModel;
use crate::rules::{Rule, RuleSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Class(usize),
    Value(f64),
}

impl Label {
    pub fn class(&self) -> Option<usize> {
        match self {
            Label::Class(c) => Some(*c),
            Label::Value(_) => None,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Label::Class(c) => *c as f64,
            Label::Value(v) => *v,
        }
    }
}

/// Binary: class 1 iff `s1 - s0 > 0`. Multiclass: argmax, ties to the lowest
/// index. Regression: the single score.
pub fn decide(task: Task, scores: &[f64]) -> Label {
    match task {
        Task::Binary => Label::Class((scores[1] - scores[0] > 0.0) as usize),
        Task::Multiclass => {
            let mut best = 0;
            for (i, s) in scores.iter().enumerate() {
                if *s > scores[best] {
                    best = i;
                }
            }
            Label::Class(best)
        }
        Task::Regression => Label::Value(scores[0]),
    }
}

/// Margin used for ranking in binary tasks.
pub fn margin(task: Task, scores: &[f64]) -> f64 {
    match task {
        Task::Binary => scores[1] - scores[0],
        _ => scores[0],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub scores: Vec<f64>,
    pub label: Label,
    pub fired: Vec<bool>,
}

pub fn eval_rule(rule: &Rule, row: &[f64]) -> Result<bool> {
    if let Some(b) = rule.vars.iter().find(|b| b.column >= row.len()) {
        return Err(Error::Schema(format!(
            "rule {} reads column {} (`{}`) but the row has {} values",
            rule.id,
            b.column,
            b.feature,
            row.len()
        )));
    }
    Ok(rule.fires(row))
}

/// Score and label one row. Regression labels stay in standardized units.
pub fn predict(ruleset: &RuleSet, row: &[f64]) -> Result<Prediction> {
    if row.len() != ruleset.schema.len() {
        return Err(Error::Schema(format!(
            "row has {} values, rule set expects {}",
            row.len(),
            ruleset.schema.len()
        )));
    }
    let mut scores = ruleset.bias.clone();
    let mut fired = Vec::with_capacity(ruleset.rules.len());
    for rule in &ruleset.rules {
        let f = eval_rule(rule, row)?;
        if f {
            for (s, w) in scores.iter_mut().zip(&rule.weights) {
                *s += w;
            }
        }
        fired.push(f);
    }
    let label = decide(ruleset.task, &scores);
    Ok(Prediction { scores, label, fired })
}

pub fn classify(ruleset: &RuleSet, row: &[f64]) -> Result<Prediction> {
    if ruleset.task == Task::Regression {
        return Err(Error::Contract("classify called on a regression rule set".into()));
    }
    predict(ruleset, row)
}

pub fn predict_rows(ruleset: &RuleSet, ds: &Dataset, rows: &[usize]) -> Result<Vec<Prediction>> {
    rows.iter().map(|&r| predict(ruleset, ds.row(r))).collect()
}

pub fn model_predictions(model: &TtnetModel, ds: &Dataset, rows: &[usize]) -> Result<Vec<Prediction>> {
    let p = model.predictor();
    rows.iter()
        .map(|&r| {
            let f = p.forward(ds.row(r))?;
            let label = p.label(&f.scores);
            Ok(Prediction {
                scores: f.scores,
                label,
                fired: f.slots,
            })
        })
        .collect()
}

/// Ground truth of `rows` as labels (standardized values for regression).
pub fn truths(ds: &Dataset, rows: &[usize]) -> Vec<Label> {
    rows.iter()
        .map(|&r| match ds.task() {
            Task::Regression => Label::Value(ds.target(r)),
            _ => Label::Class(ds.class(r)),
        })
        .collect()
}

pub fn accuracy(pred: &[Label], truth: &[Label]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    if pred.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / pred.len() as f64
}

/// Area under the ROC curve via the rank-sum statistic; tied scores get
/// their mean rank, which counts a tied positive/negative pair as one half.
pub fn auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined("AUC needs both classes in the truth vector".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            if positive[k] {
                rank_sum += mid;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    if pred.is_empty() {
        return 0.0;
    }
    let se: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    (se / pred.len() as f64).sqrt()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_original: Option<f64>,
}

pub fn metrics(
    predictions: &[Prediction],
    truth: &[Label],
    task: Task,
    scaler: Option<TargetScaler>,
) -> Result<Report> {
    if predictions.len() != truth.len() {
        return Err(Error::Contract("prediction and truth counts differ".into()));
    }
    let mut report = Report {
        rows: truth.len(),
        ..Report::default()
    };
    match task {
        Task::Regression => {
            let p: Vec<f64> = predictions.iter().map(|p| p.label.value()).collect();
            let t: Vec<f64> = truth.iter().map(Label::value).collect();
            let r = rmse(&p, &t);
            report.rmse = Some(r);
            report.rmse_original = Some(r * scaler.map_or(1.0, |s| s.std));
        }
        Task::Binary => {
            let labels: Vec<Label> = predictions.iter().map(|p| p.label).collect();
            report.accuracy = Some(accuracy(&labels, truth));
            let m: Vec<f64> = predictions.iter().map(|p| margin(task, &p.scores)).collect();
            let pos: Vec<bool> = truth.iter().map(|t| t.class() == Some(1)).collect();
            report.auc = Some(auc(&m, &pos)?);
        }
        Task::Multiclass => {
            let labels: Vec<Label> = predictions.iter().map(|p| p.label).collect();
            report.accuracy = Some(accuracy(&labels, truth));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_tie_goes_to_zero() {
        assert_eq!(decide(Task::Binary, &[1.0, 1.0]), Label::Class(0));
        assert_eq!(decide(Task::Binary, &[0.0, 0.0]), Label::Class(0));
        assert_eq!(decide(Task::Binary, &[0.0, 1e-300]), Label::Class(1));
    }

    #[test]
    fn multiclass_tie_goes_to_lowest() {
        assert_eq!(decide(Task::Multiclass, &[0.5, 2.0, 2.0]), Label::Class(1));
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[false, false, true, true]).unwrap(), 0.0);
        assert_eq!(auc(&[0.5, 0.5], &[false, true]).unwrap(), 0.5);
        assert!(auc(&[0.5, 0.6], &[true, true]).is_err());
    }

    #[test]
    fn perfect_predictions() {
        let t = [Label::Value(0.5), Label::Value(-1.0)];
        let p: Vec<Prediction> = t
            .iter()
            .map(|l| Prediction {
                scores: vec![l.value()],
                label: *l,
                fired: vec![],
            })
            .collect();
        let r = metrics(&p, &t, Task::Regression, None).unwrap();
        assert_eq!(r.rmse, Some(0.0));
        assert_eq!(accuracy(&[Label::Class(1)], &[Label::Class(1)]), 1.0);
    }
}
