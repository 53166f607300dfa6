//! Line-oriented rule text.
//!
//! ```text
//! # comment
//! TASK binary
//! PROVENANCE raw_r
//! BIAS -0.25,0.25
//! RULE 3 WEIGHTS -1,1 : ("Born UK" AND NOT "Go Uni.") OR (age > 37.5)
//! RULE 9 WEIGHTS 0,-1 : (TRUE)
//! ```
//!
//! A condition is `name`, `NOT name`, or `name OP number` with `OP` one of
//! `>`, `<`, `>=`, `<=`. Names that contain spaces or punctuation, or clash
//! with a keyword, are double-quoted. `FALSE` stands for a rule that never
//! fires. Numbers are written with full precision so that text round-trips.

use std::fmt::Write;

use super::condition::Condition;
use super::ruleset::{Atom, Binding, Provenance, Rule, RuleSet, Test};
use crate::data::{FeatureKind, FeatureSchema, TargetScaler, Task};
use crate::error::{Error, Result};
use crate::logic::{Dnf, Literal};

const KEYWORDS: [&str; 5] = ["AND", "OR", "NOT", "TRUE", "FALSE"];

fn is_bare(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | ',' | ':' | '<' | '>' | '"' | '#'))
}

pub fn quote_name(name: &str) -> String {
    if !name.is_empty() && name.chars().all(is_bare) && !KEYWORDS.contains(&name) {
        return name.to_string();
    }
    let mut s = String::with_capacity(name.len() + 2);
    s.push('"');
    for c in name.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Binary => "binary",
        Task::Multiclass => "multiclass",
        Task::Regression => "regression",
    }
}

fn numbers(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

pub fn render_atom(schema: &FeatureSchema, a: &Atom) -> String {
    let name = quote_name(&schema.column(a.column).name);
    match a.test {
        Test::IsOne => name,
        Test::IsZero => format!("NOT {name}"),
        Test::Gt(t) => format!("{name} > {t:?}"),
        Test::Le(t) => format!("{name} <= {t:?}"),
        Test::Lt(t) => format!("{name} < {t:?}"),
        Test::Ge(t) => format!("{name} >= {t:?}"),
    }
}

/// Body of a rule: its clauses joined by `OR`, or `FALSE`.
pub fn render_body(schema: &FeatureSchema, rule: &Rule) -> String {
    let atoms = rule.atoms();
    if atoms.is_empty() {
        return "FALSE".into();
    }
    atoms
        .iter()
        .map(|c| {
            if c.is_empty() {
                "(TRUE)".to_string()
            } else {
                let parts: Vec<String> = c.iter().map(|a| render_atom(schema, a)).collect();
                format!("({})", parts.join(" AND "))
            }
        })
        .collect::<Vec<_>>()
        .join(" OR ")
}

pub fn rules_to_text(ruleset: &RuleSet) -> String {
    let mut s = String::new();
    writeln!(s, "TASK {}", task_name(ruleset.task)).unwrap();
    writeln!(s, "PROVENANCE {}", ruleset.provenance.as_str()).unwrap();
    if let Some(sc) = ruleset.target_scaler {
        writeln!(s, "SCALE {:?},{:?}", sc.mean, sc.std).unwrap();
    }
    writeln!(s, "BIAS {}", numbers(&ruleset.bias)).unwrap();
    for r in &ruleset.rules {
        writeln!(
            s,
            "RULE {} WEIGHTS {} : {}",
            r.id,
            numbers(&r.weights),
            render_body(&ruleset.schema, r)
        )
        .unwrap();
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Colon,
    Op(&'static str),
    Word { text: String, quoted: bool },
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, col });
            i += 1;
            continue;
        }
        match c {
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                let op = match (c, eq) {
                    ('<', false) => "<",
                    ('<', true) => "<=",
                    ('>', false) => ">",
                    _ => ">=",
                };
                out.push(Token { tok: Tok::Op(op), col });
                i += 1 + eq as usize;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(line, col, "unterminated quoted name")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some(e) => s.push(*e),
                                None => return Err(syntax(line, i + 1, "dangling escape")),
                            }
                            i += 2;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                out.push(Token {
                    tok: Tok::Word { text: s, quoted: true },
                    col,
                });
            }
            '#' => break,
            _ => {
                let start = i;
                while i < chars.len() && is_bare(chars[i]) {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Word {
                        text: chars[start..i].iter().collect(),
                        quoted: false,
                    },
                    col,
                });
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        syntax(self.line, self.col(), msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word { text, quoted: false }) if text == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`")))
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let col = self.col();
        match self.next() {
            Some(Tok::Word { text, quoted: false }) => text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| syntax(self.line, col, format!("`{text}` is not a finite number"))),
            _ => Err(syntax(self.line, col, "expected a number")),
        }
    }

    fn numbers(&mut self) -> Result<Vec<f64>> {
        let mut v = vec![self.number()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            v.push(self.number()?);
        }
        Ok(v)
    }

    fn name(&mut self) -> Result<(String, usize)> {
        let col = self.col();
        match self.next() {
            Some(Tok::Word { text, quoted }) if quoted || !KEYWORDS.contains(&text.as_str()) => Ok((text, col)),
            _ => Err(syntax(self.line, col, "expected a feature name")),
        }
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

fn parse_atom(cur: &mut Cursor, schema: &FeatureSchema) -> Result<Atom> {
    let negated = cur.keyword("NOT");
    if negated {
        cur.pos += 1;
    }
    let (name, col) = cur.name()?;
    let column = schema.column_index(&name).ok_or(Error::UnknownFeature {
        name: name.clone(),
        line: cur.line,
    })?;
    let op = match cur.peek() {
        Some(Tok::Op(op)) if !negated => {
            let op = *op;
            cur.pos += 1;
            Some(op)
        }
        _ => None,
    };
    let test = match op {
        Some(op) => {
            let t = cur.number()?;
            match op {
                ">" => Test::Gt(t),
                ">=" => Test::Ge(t),
                "<" => Test::Lt(t),
                _ => Test::Le(t),
            }
        }
        None => {
            if schema.column(column).kind == FeatureKind::Continuous {
                return Err(syntax(
                    cur.line,
                    col,
                    format!("continuous feature `{name}` needs a comparison"),
                ));
            }
            if negated {
                Test::IsZero
            } else {
                Test::IsOne
            }
        }
    };
    Ok(Atom { column, test })
}

fn parse_rule(cur: &mut Cursor, schema: &FeatureSchema) -> Result<Rule> {
    let id_col = cur.col();
    let id = match cur.next() {
        Some(Tok::Word { text, quoted: false }) => text
            .parse::<usize>()
            .map_err(|_| syntax(cur.line, id_col, format!("rule id `{text}` is not a non-negative integer")))?,
        _ => return Err(syntax(cur.line, id_col, "expected a rule id")),
    };
    cur.expect_keyword("WEIGHTS")?;
    let weights = cur.numbers()?;
    cur.expect(Tok::Colon, "`:`")?;

    let mut vars: Vec<Binding> = Vec::new();
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    if cur.keyword("FALSE") {
        cur.pos += 1;
    } else {
        loop {
            cur.expect(Tok::LParen, "`(`")?;
            let mut clause = Vec::new();
            if cur.keyword("TRUE") {
                cur.pos += 1;
            } else {
                let mut seen: Vec<usize> = Vec::new();
                loop {
                    let atom = parse_atom(cur, schema)?;
                    if seen.contains(&atom.column) {
                        return Err(Error::LiteralConflict {
                            feature: schema.column(atom.column).name.clone(),
                            line: cur.line,
                        });
                    }
                    seen.push(atom.column);
                    let (cond, positive) = atom.test.as_literal();
                    let var = match vars
                        .iter()
                        .position(|b| b.column == atom.column && b.condition.same(&cond))
                    {
                        Some(v) => v,
                        None => {
                            vars.push(Binding {
                                column: atom.column,
                                feature: schema.column(atom.column).name.clone(),
                                condition: cond,
                            });
                            vars.len() - 1
                        }
                    };
                    clause.push(Literal { var, positive });
                    if cur.keyword("AND") {
                        cur.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            cur.expect(Tok::RParen, "`)` or `AND`")?;
            clauses.push(clause);
            if cur.keyword("OR") {
                cur.pos += 1;
            } else {
                break;
            }
        }
    }
    cur.done()?;
    Ok(Rule {
        id,
        filter: None,
        patch: None,
        vars,
        dnf: Dnf::new(clauses),
        weights,
        dc: None,
    })
}

/// Parse rule text against a feature schema.
pub fn parse_rules(text: &str, schema: &FeatureSchema) -> Result<RuleSet> {
    let mut task = None;
    let mut provenance = Provenance::RawR;
    let mut bias: Option<Vec<f64>> = None;
    let mut scaler = None;
    let mut rules: Vec<Rule> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks: &toks,
            pos: 0,
            line,
            end_col: raw.chars().count() + 1,
        };
        let head_col = cur.col();
        let head = match cur.next() {
            Some(Tok::Word { text, quoted: false }) => text,
            _ => return Err(syntax(line, head_col, "expected TASK, PROVENANCE, SCALE, BIAS or RULE")),
        };
        match head.as_str() {
            "TASK" => {
                let col = cur.col();
                let (name, _) = cur.name()?;
                task = Some(name.parse::<Task>().map_err(|_| syntax(line, col, format!("unknown task `{name}`")))?);
                cur.done()?;
            }
            "PROVENANCE" => {
                let col = cur.col();
                let (name, _) = cur.name()?;
                provenance = name
                    .parse()
                    .map_err(|_| syntax(line, col, format!("unknown provenance `{name}`")))?;
                cur.done()?;
            }
            "SCALE" => {
                let col = cur.col();
                let v = cur.numbers()?;
                if v.len() != 2 || v[1] <= 0.0 {
                    return Err(syntax(line, col, "SCALE takes a mean and a positive std"));
                }
                scaler = Some(TargetScaler { mean: v[0], std: v[1] });
                cur.done()?;
            }
            "BIAS" => {
                bias = Some(cur.numbers()?);
                cur.done()?;
            }
            "RULE" => {
                let rule = parse_rule(&mut cur, schema)?;
                if rules.iter().any(|r| r.id == rule.id) {
                    return Err(syntax(line, head_col, format!("duplicate rule id {}", rule.id)));
                }
                rules.push(rule);
            }
            other => {
                return Err(syntax(
                    line,
                    head_col,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    let task = task.ok_or_else(|| syntax(1, 1, "missing TASK line"))?;
    let outputs = match (&bias, rules.first(), task) {
        (Some(b), _, _) => b.len(),
        (None, Some(r), _) => r.weights.len(),
        (None, None, Task::Binary) => 2,
        (None, None, Task::Regression) => 1,
        (None, None, Task::Multiclass) => {
            return Err(syntax(1, 1, "multiclass rule text needs a BIAS line"));
        }
    };
    let ok_width = match task {
        Task::Binary => outputs == 2,
        Task::Regression => outputs == 1,
        Task::Multiclass => outputs >= 2,
    };
    if !ok_width {
        return Err(Error::Contract(format!("{outputs} outputs do not fit a {} task", task_name(task))));
    }
    let rs = RuleSet {
        task,
        outputs,
        provenance,
        dct: provenance == Provenance::DctReduced,
        schema: schema.clone(),
        bias: bias.unwrap_or_else(|| vec![0.0; outputs]),
        rules,
        target_scaler: scaler,
    };
    rs.validate()?;
    Ok(rs)
}

/// Condition text of one variable, as drawn on a decision-diagram node.
/// Thresholds are rounded to four significant digits.
pub fn binding_label(b: &Binding) -> String {
    let name = &b.feature;
    match b.condition {
        Condition::IsTrue => name.clone(),
        Condition::IsFalse => format!("NOT {name}"),
        Condition::Greater(t) => format!("{name} > {}", sig4(t)),
        Condition::Less(t) => format!("{name} < {}", sig4(t)),
        Condition::Constant(v) => (if v { "TRUE" } else { "FALSE" }).to_string(),
    }
}

/// Four significant digits, without trailing zeros.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(quote_name("age"), "age");
        assert_eq!(quote_name("Go Uni."), "\"Go Uni.\"");
        assert_eq!(quote_name("AND"), "\"AND\"");
        assert_eq!(quote_name("a\"b"), "\"a\\\"b\"");
        assert_eq!(quote_name("workclass=Private"), "workclass=Private");
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig4(37.456), "37.46");
        assert_eq!(sig4(11.0), "11");
        assert_eq!(sig4(0.000123456), "0.0001235");
        assert_eq!(sig4(-2.5), "-2.5");
        assert_eq!(sig4(12345.6), "12346");
    }

    #[test]
    fn tokens() {
        let t = tokenize(r#"RULE 1 WEIGHTS -1,2.5e-3 : ("a b" AND x>=3)"#, 1).unwrap();
        assert_eq!(t.len(), 14);
        assert_eq!(t[4].tok, Tok::Comma);
        assert_eq!(t[11].tok, Tok::Op(">="));
    }
}
