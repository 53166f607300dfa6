//! Rule sets: extraction from a trained network, optimization, text and
//! file formats.

pub mod condition;
pub mod extract;
pub mod file;
pub mod ruleset;
pub mod text;
pub mod ttc;

pub use condition::{derive_threshold, Condition};
pub use extract::{apply_dct, extract_rules, filter_tables, input_conditions, reduce_rule, unreachable_rows, Extractor};
pub use file::{RuleSetFile, TableDigest, RULESET_VERSION};
pub use ruleset::{
    complexity, estimate_complexity, Atom, Binding, DcRecord, Provenance, Rule, RuleSet, Test,
};
pub use text::{parse_rules, rules_to_text};
pub use ttc::{dedup_filters, dedup_filters_logged, ttc, Merge, DEFAULT_TTC_THRESHOLD};
