//! The `ttrules` command line: flat `key = value` configs, per-fold runs
//! and artifact files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::data::{kfold_split, load_csv, row_is_onehot_valid, Dataset, LoadOptions, SourceKind, Task, NUM_FOLDS};
use crate::error::{Error, Result};
use crate::inference::{metrics, model_predictions, predict, predict_rows, truths, Label, Report};
use crate::net::{train, Checkpoint, HeadMode, LttSpec, TrainConfig};
use crate::robdd::{best_order, build_from_dnf, natural_order, to_dot};
use crate::rules::text::{binding_label, sig4};
use crate::rules::{
    apply_dct, dedup_filters_logged, estimate_complexity, filter_tables, parse_rules, rules_to_text, Extractor,
    RuleSet, RuleSetFile, DEFAULT_TTC_THRESHOLD,
};

#[derive(Parser, Debug)]
#[command(name = "ttrules", version, about = "Train truth-table networks and work with their rules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fold to operate on (0-based).
    #[arg(long, conflicts_with = "all_folds")]
    pub fold: Option<usize>,
    /// Run every fold and report mean ± std.
    #[arg(long)]
    pub all_folds: bool,
    /// `key=value` overrides applied after the config file.
    pub overrides: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Raw,
    Opt,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model per fold and write checkpoints.
    Train(RunArgs),
    /// Extract the exact rule set from trained checkpoints.
    Extract(RunArgs),
    /// Reduce extracted rules with don't-cares and filter deduplication.
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        /// Only apply don't-care reduction.
        #[arg(long)]
        dct_only: bool,
        /// Minimum |TTC| for merging two filters.
        #[arg(long)]
        ttc_threshold: Option<f64>,
    },
    /// Evaluate a rule set on the test rows of its fold.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Which rule set of the fold to evaluate.
        #[arg(long, value_enum, default_value = "raw")]
        rules: Which,
    },
    /// Score a CSV with a rule set, one JSON record per row.
    Predict {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write one DOT decision diagram per rule plus an index.
    ExportDot {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Search for the variable order with the fewest nodes.
        #[arg(long)]
        best_order: bool,
    },
    /// Print a rule-set file as editable rule text.
    RulesExport {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read rule text back into a rule-set file.
    RulesImport {
        #[arg(long)]
        text: PathBuf,
        /// Rule-set file providing the feature schema.
        #[arg(long)]
        schema_from: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pre-training complexity estimate from `n=.. L=.. s=.. F=..`.
    Estimate { values: Vec<String> },
}

/// Everything a run needs, resolved from defaults, file and overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub task: Option<Task>,
    pub kinds: BTreeMap<String, SourceKind>,
    pub train: TrainConfig,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = LttSpec {
            n: 5,
            stride: 5,
            amplification: 10,
            k1: 5,
            k2: 1,
            inner_bn: true,
        };
        RunConfig {
            data: None,
            target: None,
            task: None,
            kinds: BTreeMap::new(),
            train: TrainConfig::new(spec, 10),
            output: PathBuf::from("out"),
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_val<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| usage(format!("bad value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(usage(format!("bad boolean `{v}` for `{key}`"))),
    }
}

/// Parse `key = value` lines. `[section]` headers group keys for the reader
/// and are otherwise ignored; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "data" => self.data = Some(PathBuf::from(v)),
            "target" => self.target = Some(v.to_string()),
            "task" => self.task = Some(v.parse().map_err(|_| usage(format!("unknown task `{v}`")))?),
            "kinds" => {
                self.kinds.clear();
                for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (col, kind) = item
                        .rsplit_once(':')
                        .ok_or_else(|| usage(format!("kinds entry `{item}` is not `column:kind`")))?;
                    let kind = kind.parse().map_err(|_| usage(format!("unknown kind in `{item}`")))?;
                    self.kinds.insert(col.trim().to_string(), kind);
                }
            }
            "n" => t.spec.n = parse_val(key, v)?,
            "stride" | "s" => t.spec.stride = parse_val(key, v)?,
            "amplification" | "A" => t.spec.amplification = parse_val(key, v)?,
            "k1" => t.spec.k1 = parse_val(key, v)?,
            "k2" => t.spec.k2 = parse_val(key, v)?,
            "inner_bn" => t.spec.inner_bn = parse_bool(key, v)?,
            "filters" | "F" => t.filters = parse_val(key, v)?,
            "head" => t.head_mode = v.parse::<HeadMode>().map_err(|_| usage(format!("unknown head `{v}`")))?,
            "epochs" => t.epochs = parse_val(key, v)?,
            "batch_size" => t.batch_size = parse_val(key, v)?,
            "lr" | "learning_rate" => t.learning_rate = parse_val(key, v)?,
            "seed" => t.seed = parse_val(key, v)?,
            "mask_weight_decay" => t.mask_weight_decay = parse_val(key, v)?,
            "dropout" => t.dropout_p = parse_val(key, v)?,
            "output" => self.output = PathBuf::from(v),
            _ => return Err(usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            for (k, v) in parse_config_text(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for o in &args.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| usage(format!("override `{o}` is not `key=value`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Sorted `key = value` lines of every setting.
    pub fn canonical(&self) -> String {
        let t = &self.train;
        let kinds: Vec<String> = self
            .kinds
            .iter()
            .map(|(k, v)| format!("{k}:{}", format!("{v:?}").to_lowercase()))
            .collect();
        let mut kv: Vec<(&str, String)> = vec![
            ("data", self.data.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("target", self.target.clone().unwrap_or_default()),
            ("task", self.task.map(|t| format!("{t:?}").to_lowercase()).unwrap_or_default()),
            ("kinds", kinds.join(",")),
            ("n", t.spec.n.to_string()),
            ("stride", t.spec.stride.to_string()),
            ("amplification", t.spec.amplification.to_string()),
            ("k1", t.spec.k1.to_string()),
            ("k2", t.spec.k2.to_string()),
            ("inner_bn", t.spec.inner_bn.to_string()),
            ("filters", t.filters.to_string()),
            ("head", match t.head_mode {
                HeadMode::BinarySparse => "binary_sparse".into(),
                HeadMode::Float => "float".into(),
            }),
            ("epochs", t.epochs.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("lr", format!("{:?}", t.learning_rate)),
            ("seed", t.seed.to_string()),
            ("mask_weight_decay", format!("{:?}", t.mask_weight_decay)),
            ("dropout", format!("{:?}", t.dropout_p)),
            ("output", self.output.display().to_string()),
        ];
        kv.sort();
        let mut s = String::new();
        for (k, v) in kv {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }

    /// SHA-256 of the settings that determine results (the output directory
    /// is excluded).
    pub fn hash(&self) -> String {
        let text: String = self
            .canonical()
            .lines()
            .filter(|l| !l.starts_with("output "))
            .map(|l| format!("{l}\n"))
            .collect();
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn echo(&self) {
        for line in self.canonical().lines() {
            eprintln!("config: {line}");
        }
        eprintln!("seed: {}", self.train.seed);
        eprintln!("config_hash: {}", self.hash());
    }

    pub fn fold_dir(&self, fold: usize) -> PathBuf {
        self.output.join(format!("fold{fold}"))
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        let data = self.data.as_ref().ok_or_else(|| usage("config key `data` is required"))?;
        let target = self.target.as_ref().ok_or_else(|| usage("config key `target` is required"))?;
        let mut opts = LoadOptions::new(target);
        opts.task = self.task;
        opts.kinds = self.kinds.clone();
        load_csv(data, &opts)
    }
}

fn folds(args: &RunArgs) -> Result<Vec<usize>> {
    if args.all_folds {
        return Ok((0..NUM_FOLDS).collect());
    }
    let k = args.fold.unwrap_or(0);
    if k >= NUM_FOLDS {
        return Err(usage(format!("fold {k} out of range 0..{NUM_FOLDS}")));
    }
    Ok(vec![k])
}

/// Dataset with its target scaler fitted on the fold's training rows.
struct FoldData {
    ds: Dataset,
    train: Vec<usize>,
    test: Vec<usize>,
}

fn fold_data(cfg: &RunConfig, base: &Dataset, fold: usize) -> Result<FoldData> {
    let plan = kfold_split(base, cfg.train.seed)?;
    let f = &plan.folds[fold];
    let mut ds = base.clone();
    ds.refit_target_scaler(&f.train);
    Ok(FoldData {
        ds,
        train: f.train.clone(),
        test: f.test.clone(),
    })
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string(v)?);
    Ok(())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn summarize(name: &str, values: &[f64]) {
    if values.len() > 1 {
        let (m, s) = mean_std(values);
        println!("{name}: {m:.4} ± {s:.4}");
    } else if let Some(v) = values.first() {
        println!("{name}: {v:.4}");
    }
}

#[derive(Serialize)]
struct FoldLine<'a> {
    command: &'a str,
    fold: usize,
    #[serde(flatten)]
    report: Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    rules: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    literals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exactness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exactness_onehot_valid: Option<f64>,
    seconds: f64,
}

fn labels_of(p: &[crate::inference::Prediction]) -> Vec<Label> {
    p.iter().map(|p| p.label).collect()
}

/// Fraction of rows where two label lists agree, over all rows and over the
/// rows satisfying the one-hot constraints.
fn agreement(ds: &Dataset, rows: &[usize], a: &[Label], b: &[Label]) -> (f64, f64) {
    let mut all = 0;
    let mut valid = 0;
    let mut valid_hits = 0;
    for (i, &r) in rows.iter().enumerate() {
        let same = a[i] == b[i];
        all += same as usize;
        if row_is_onehot_valid(ds.schema(), ds.row(r)) {
            valid += 1;
            valid_hits += same as usize;
        }
    }
    let frac = |h: usize, n: usize| if n == 0 { 1.0 } else { h as f64 / n as f64 };
    (frac(all, rows.len()), frac(valid_hits, valid))
}

fn cmd_train(args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::resolve(args)?;
    cfg.echo();
    let base = cfg.load_dataset()?;
    let mut accs = Vec::new();
    let mut aucs = Vec::new();
    let mut rmses = Vec::new();
    for k in folds(args)? {
        let fd = fold_data(&cfg, &base, k)?;
        let t0 = Instant::now();
        let model = train(&fd.ds, &fd.train, &cfg.train)?;
        let secs = t0.elapsed().as_secs_f64();
        let dir = cfg.fold_dir(k);
        std::fs::create_dir_all(&dir)?;
        Checkpoint::new(cfg.train.clone(), cfg.hash(), Some(k), model.clone()).save(dir.join("model.json"))?;
        let preds = model_predictions(&model, &fd.ds, &fd.test)?;
        let report = metrics(&preds, &truths(&fd.ds, &fd.test), fd.ds.task(), fd.ds.target_scaler())?;
        accs.extend(report.accuracy);
        aucs.extend(report.auc);
        rmses.extend(report.rmse);
        print_json(&FoldLine {
            command: "train",
            fold: k,
            report,
            rules: None,
            literals: None,
            exactness: None,
            exactness_onehot_valid: None,
            seconds: secs,
        })?;
    }
    summarize("accuracy", &accs);
    summarize("auc", &aucs);
    summarize("rmse", &rmses);
    Ok(())
}

fn load_model(cfg: &RunConfig, k: usize) -> Result<Checkpoint> {
    let path = cfg.fold_dir(k).join("model.json");
    if !path.exists() {
        return Err(Error::Input(format!("{} not found; run `train` first", path.display())));
    }
    Checkpoint::load(path)
}

fn load_rules(path: &Path, what: &str) -> Result<RuleSetFile> {
    if !path.exists() {
        return Err(Error::Input(format!("{} not found; run `{what}` first", path.display())));
    }
    RuleSetFile::load(path)
}

fn cmd_extract(args: &RunArgs) -> Result<()> {
    let cfg = RunConfig::resolve(args)?;
    cfg.echo();
    let base = cfg.load_dataset()?;
    let mut exact = Vec::new();
    let mut counts = Vec::new();
    let mut times = Vec::new();
    for k in folds(args)? {
        let ck = load_model(&cfg, k)?;
        let fd = fold_data(&cfg, &base, k)?;
        let t0 = Instant::now();
        let mut ex = Extractor::new(&ck.model)?;
        let rs = ex.extract();
        let secs = t0.elapsed().as_secs_f64();
        RuleSetFile::new(rs.clone(), &ex.tables, ck.config_hash.clone(), ck.seed, Some(k))
            .save(cfg.fold_dir(k).join("rules_raw.json"))?;
        let model_labels = labels_of(&model_predictions(&ck.model, &fd.ds, &fd.test)?);
        let preds = predict_rows(&rs, &fd.ds, &fd.test)?;
        let (ex_all, _) = agreement(&fd.ds, &fd.test, &model_labels, &labels_of(&preds));
        let report = metrics(&preds, &truths(&fd.ds, &fd.test), fd.ds.task(), fd.ds.target_scaler())?;
        let (nr, nl) = rs.complexity();
        exact.push(ex_all);
        counts.push(nr as f64);
        times.push(secs);
        println!("fold {k}: exactness: {:.2}%", 100.0 * ex_all);
        println!("fold {k}: extraction time: {secs:.3} s");
        print_json(&FoldLine {
            command: "extract",
            fold: k,
            report,
            rules: Some(nr),
            literals: Some(nl),
            exactness: Some(ex_all),
            exactness_onehot_valid: None,
            seconds: secs,
        })?;
        if ex_all < 1.0 {
            return Err(Error::Contract(format!(
                "exactness invariant failed on fold {k}: rules agree with the network on {:.4}% of rows",
                100.0 * ex_all
            )));
        }
    }
    summarize("rules", &counts);
    summarize("extraction_seconds", &times);
    Ok(())
}

fn cmd_optimize(args: &RunArgs, dct_only: bool, threshold: Option<f64>) -> Result<()> {
    let cfg = RunConfig::resolve(args)?;
    cfg.echo();
    let threshold = threshold.unwrap_or(DEFAULT_TTC_THRESHOLD);
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(usage(format!("--ttc-threshold {threshold} not in (0.5, 1]")));
    }
    eprintln!("ttc_threshold: {threshold}{}", if dct_only { " (unused: --dct-only)" } else { "" });
    let base = cfg.load_dataset()?;
    let mut reductions = Vec::new();
    let mut drops = Vec::new();
    for k in folds(args)? {
        let ck = load_model(&cfg, k)?;
        let raw = load_rules(&cfg.fold_dir(k).join("rules_raw.json"), "extract")?;
        let fd = fold_data(&cfg, &base, k)?;
        let t0 = Instant::now();
        let mut opt = apply_dct(&raw.ruleset);
        if !dct_only {
            let (rs, merges) = dedup_filters_logged(&opt, &ck.model, threshold)?;
            for m in &merges {
                eprintln!("fold {k}: merged filter {} into {} (ttc {:.4})", m.removed, m.kept, m.ttc);
            }
            opt = rs;
        }
        let secs = t0.elapsed().as_secs_f64();
        RuleSetFile::new(opt.clone(), &filter_tables(&ck.model)?, ck.config_hash.clone(), ck.seed, Some(k))
            .save(cfg.fold_dir(k).join("rules_opt.json"))?;
        let (r0, l0) = raw.ruleset.complexity();
        let (r1, l1) = opt.complexity();
        let truth = truths(&fd.ds, &fd.test);
        let before = metrics(&predict_rows(&raw.ruleset, &fd.ds, &fd.test)?, &truth, fd.ds.task(), fd.ds.target_scaler())?;
        let preds = predict_rows(&opt, &fd.ds, &fd.test)?;
        let after = metrics(&preds, &truth, fd.ds.task(), fd.ds.target_scaler())?;
        let factor = if l1 == 0 { f64::INFINITY } else { l0 as f64 / l1 as f64 };
        reductions.push(factor);
        println!("fold {k}: rules {r0} -> {r1}, literals {l0} -> {l1} (x{factor:.2})");
        if let (Some(a), Some(b)) = (before.accuracy, after.accuracy) {
            drops.push(a - b);
            println!("fold {k}: accuracy {a:.4} -> {b:.4}");
        }
        if let (Some(a), Some(b)) = (before.rmse, after.rmse) {
            println!("fold {k}: rmse {a:.4} -> {b:.4}");
        }
        print_json(&FoldLine {
            command: "optimize",
            fold: k,
            report: after,
            rules: Some(r1),
            literals: Some(l1),
            exactness: None,
            exactness_onehot_valid: None,
            seconds: secs,
        })?;
    }
    summarize("complexity_reduction", &reductions);
    summarize("accuracy_drop", &drops);
    Ok(())
}

fn cmd_eval(args: &RunArgs, which: Which) -> Result<()> {
    let cfg = RunConfig::resolve(args)?;
    cfg.echo();
    let base = cfg.load_dataset()?;
    let mut accs = Vec::new();
    let mut aucs = Vec::new();
    let mut rmses = Vec::new();
    let mut nrules = Vec::new();
    let mut nlits = Vec::new();
    for k in folds(args)? {
        let (file, what) = match which {
            Which::Raw => ("rules_raw.json", "extract"),
            Which::Opt => ("rules_opt.json", "optimize"),
        };
        let rf = load_rules(&cfg.fold_dir(k).join(file), what)?;
        let ck = load_model(&cfg, k)?;
        let fd = fold_data(&cfg, &base, k)?;
        let t0 = Instant::now();
        let preds = predict_rows(&rf.ruleset, &fd.ds, &fd.test)?;
        let secs = t0.elapsed().as_secs_f64();
        let report = metrics(&preds, &truths(&fd.ds, &fd.test), fd.ds.task(), fd.ds.target_scaler())?;
        let model_labels = labels_of(&model_predictions(&ck.model, &fd.ds, &fd.test)?);
        let (all, valid) = agreement(&fd.ds, &fd.test, &model_labels, &labels_of(&preds));
        let (nr, nl) = rf.ruleset.complexity();
        println!("fold {k}: exactness: {:.2}% (one-hot valid rows: {:.2}%)", 100.0 * all, 100.0 * valid);
        accs.extend(report.accuracy);
        aucs.extend(report.auc);
        rmses.extend(report.rmse);
        nrules.push(nr as f64);
        nlits.push(nl as f64);
        print_json(&FoldLine {
            command: "eval",
            fold: k,
            report,
            rules: Some(nr),
            literals: Some(nl),
            exactness: Some(all),
            exactness_onehot_valid: Some(valid),
            seconds: secs,
        })?;
    }
    summarize("accuracy", &accs);
    summarize("auc", &aucs);
    summarize("rmse", &rmses);
    summarize("rules", &nrules);
    summarize("literals", &nlits);
    Ok(())
}

#[derive(Serialize)]
struct PredictionLine {
    scores: Vec<f64>,
    label: Label,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    fired_rule_ids: Vec<usize>,
}

fn cmd_predict(rules: &Path, input: &Path, output: Option<&Path>) -> Result<()> {
    let rf = RuleSetFile::load(rules)?;
    eprintln!("seed: {}", rf.seed);
    eprintln!("config_hash: {}", rf.config_hash);
    let rs = &rf.ruleset;
    let (x, rows) = rs.schema.encode_csv(input)?;
    let l = rs.schema.len();
    let mut out = String::new();
    for r in 0..rows {
        let p = predict(rs, &x[r * l..(r + 1) * l])?;
        let value = match (rs.task, rs.target_scaler) {
            (Task::Regression, Some(s)) => Some(s.inverse(p.label.value())),
            _ => None,
        };
        let fired_rule_ids = rs
            .rules
            .iter()
            .zip(&p.fired)
            .filter(|(_, f)| **f)
            .map(|(rule, _)| rule.id)
            .collect();
        let line = PredictionLine {
            scores: p.scores,
            label: p.label,
            value,
            fired_rule_ids,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    match output {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DotIndexEntry {
    rule_id: usize,
    path: String,
    weights: Vec<f64>,
    nodes: usize,
}

#[derive(Serialize)]
struct DotIndex {
    config_hash: String,
    seed: u64,
    bias: Vec<f64>,
    rules: Vec<DotIndexEntry>,
}

fn weights_label(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|x| sig4(*x)).collect();
    format!("w = [{}]", parts.join(", "))
}

pub fn export_dot(rf: &RuleSetFile, out: &Path, search_order: bool) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut entries = Vec::new();
    for rule in &rf.ruleset.rules {
        let n = rule.vars.len();
        let order = if search_order {
            best_order(&rule.dnf, n)?
        } else {
            natural_order(n)
        };
        let bdd = build_from_dnf(&rule.dnf, n, &order)?;
        let labels: Vec<String> = rule.vars.iter().map(binding_label).collect();
        let dot = to_dot(&bdd, &format!("rule_{}", rule.id), &labels, &weights_label(&rule.weights), "0")?;
        let name = format!("rule_{}.dot", rule.id);
        std::fs::write(out.join(&name), dot)?;
        entries.push(DotIndexEntry {
            rule_id: rule.id,
            path: name,
            weights: rule.weights.clone(),
            nodes: bdd.decision_nodes(),
        });
    }
    let index = DotIndex {
        config_hash: rf.config_hash.clone(),
        seed: rf.seed,
        bias: rf.ruleset.bias.clone(),
        rules: entries,
    };
    std::fs::write(out.join("index.json"), serde_json::to_string_pretty(&index)? + "\n")?;
    Ok(())
}

fn cmd_rules_import(text: &Path, schema_from: &Path, out: &Path) -> Result<()> {
    let base = RuleSetFile::load(schema_from)?;
    eprintln!("seed: {}", base.seed);
    eprintln!("config_hash: {}", base.config_hash);
    let rs: RuleSet = parse_rules(&std::fs::read_to_string(text)?, &base.ruleset.schema)?;
    let mut file = base.clone();
    file.ruleset = rs;
    file.save(out)?;
    let (r, l) = file.ruleset.complexity();
    println!("imported {r} rules, {l} literals");
    Ok(())
}

fn cmd_estimate(values: &[String]) -> Result<()> {
    let mut get = BTreeMap::new();
    for v in values {
        let (k, x) = v
            .split_once('=')
            .ok_or_else(|| usage(format!("`{v}` is not `key=value`")))?;
        let key = match k.trim() {
            "n" => "n",
            "L" | "l" => "L",
            "s" | "stride" => "s",
            "F" | "f" | "filters" => "F",
            other => return Err(usage(format!("unknown estimate key `{other}`"))),
        };
        get.insert(key, parse_val::<usize>(key, x.trim())?);
    }
    let need = |k: &str| get.get(k).copied().ok_or_else(|| usage(format!("estimate needs `{k}=`")));
    let (n, l, s, f) = (need("n")?, need("L")?, need("s")?, need("F")?);
    eprintln!("config: n = {n}, L = {l}, s = {s}, F = {f}");
    println!("{}", estimate_complexity(n, l, s, f)?);
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Extract(a) => cmd_extract(&a),
        Command::Optimize {
            run,
            dct_only,
            ttc_threshold,
        } => cmd_optimize(&run, dct_only, ttc_threshold),
        Command::Eval { run, rules } => cmd_eval(&run, rules),
        Command::Predict { rules, input, output } => cmd_predict(&rules, &input, output.as_deref()),
        Command::ExportDot { rules, out, best_order } => {
            let rf = RuleSetFile::load(&rules)?;
            eprintln!("seed: {}", rf.seed);
            eprintln!("config_hash: {}", rf.config_hash);
            export_dot(&rf, &out, best_order)?;
            println!("wrote {} diagrams to {}", rf.ruleset.rules.len(), out.display());
            Ok(())
        }
        Command::RulesExport { rules, out } => {
            let rf = RuleSetFile::load(&rules)?;
            eprintln!("seed: {}", rf.seed);
            eprintln!("config_hash: {}", rf.config_hash);
            let text = rules_to_text(&rf.ruleset);
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::RulesImport { text, schema_from, out } => cmd_rules_import(&text, &schema_from, &out),
        Command::Estimate { values } => cmd_estimate(&values),
    }
}

/// Process exit status for a result: 0 ok, 2 usage error, 1 anything else.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(Error::Usage(_)) => 2,
        Err(_) => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let kv = parse_config_text("[model]\nn = 6 # width\n\nF=5\n").unwrap();
        assert_eq!(kv, vec![("n".into(), "6".into()), ("F".into(), "5".into())]);
        assert!(parse_config_text("nonsense").is_err());
    }

    #[test]
    fn overrides_and_hash() {
        let args = RunArgs {
            overrides: vec!["n=6".into(), "k1=6".into(), "seed=3".into()],
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.train.spec.n, 6);
        assert_eq!(cfg.train.seed, 3);
        let mut other = cfg.clone();
        other.output = PathBuf::from("elsewhere");
        assert_eq!(cfg.hash(), other.hash());
        other.train.seed = 4;
        assert_ne!(cfg.hash(), other.hash());
        let bad = RunArgs {
            overrides: vec!["bogus=1".into()],
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(&bad), Err(Error::Usage(_))));
    }
}
