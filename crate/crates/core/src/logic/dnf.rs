use serde::{Deserialize, Serialize};

/// A variable or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    #[inline]
    pub fn eval(&self, bits: &[bool]) -> bool {
        bits[self.var] == self.positive
    }
}

pub type Clause = Vec<Literal>;

/// OR of ANDs. No clauses is constant false; an empty clause is constant true.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dnf {
    pub clauses: Vec<Clause>,
}

impl Dnf {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Dnf { clauses }
    }

    pub fn falsum() -> Self {
        Dnf { clauses: Vec::new() }
    }

    pub fn verum() -> Self {
        Dnf {
            clauses: vec![Vec::new()],
        }
    }

    pub fn is_false(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }

    pub fn eval(&self, bits: &[bool]) -> bool {
        self.clauses
            .iter()
            .any(|c| c.iter().all(|l| l.eval(bits)))
    }

    /// Evaluate on row `r` of an `n`-variable table (`x0` most significant).
    pub fn eval_row(&self, n: usize, r: usize) -> bool {
        self.clauses.iter().any(|c| {
            c.iter()
                .all(|l| (((r >> (n - 1 - l.var)) & 1) == 1) == l.positive)
        })
    }

    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    /// Largest variable index used, plus one.
    pub fn num_vars(&self) -> usize {
        self.clauses
            .iter()
            .flatten()
            .map(|l| l.var + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn truth_table(&self, n: usize) -> Vec<bool> {
        (0..1usize << n).map(|r| self.eval_row(n, r)).collect()
    }

    /// Well-formed: no variable repeated inside a clause, no repeated clause.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for c in &self.clauses {
            let mut vars: Vec<usize> = c.iter().map(|l| l.var).collect();
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
            let mut key = c.clone();
            key.sort();
            if !seen.insert(key) {
                return false;
            }
        }
        true
    }

    /// Literals of a clause with the positive ones first, each half in
    /// variable order.
    pub fn display_order(clause: &[Literal]) -> Vec<Literal> {
        let mut v = clause.to_vec();
        v.sort_by_key(|l| (!l.positive, l.var));
        v
    }
}

impl std::fmt::Display for Dnf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "FALSE");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " OR ")?;
            }
            if c.is_empty() {
                write!(f, "(TRUE)")?;
                continue;
            }
            write!(f, "(")?;
            for (k, l) in Dnf::display_order(c).iter().enumerate() {
                if k > 0 {
                    write!(f, " AND ")?;
                }
                if l.positive {
                    write!(f, "x{}", l.var)?;
                } else {
                    write!(f, "NOT x{}", l.var)?;
                }
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}
