//! Reduced ordered binary decision diagrams of single rules, and DOT export.

use std::collections::HashMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::Dnf;
use crate::net::MAX_BLOCK_INPUTS;

pub const FALSE: usize = 0;
pub const TRUE: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub var: usize,
    pub low: usize,
    pub high: usize,
}

/// Node ids 0 and 1 are the terminals; decision nodes follow in post-order
/// of a low-first traversal, so equal functions get equal tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Robdd {
    pub num_vars: usize,
    pub order: Vec<usize>,
    /// Entries 0 and 1 are placeholders for the terminals.
    pub nodes: Vec<Node>,
    pub root: usize,
}

struct Builder<'a> {
    table: &'a [bool],
    n: usize,
    order: &'a [usize],
    nodes: Vec<Node>,
    unique: HashMap<Node, usize>,
}

impl Builder<'_> {
    fn mk(&mut self, var: usize, low: usize, high: usize) -> usize {
        if low == high {
            return low;
        }
        let node = Node { var, low, high };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    /// Shannon expansion over the remaining levels with `row` holding the
    /// variables fixed so far.
    fn build(&mut self, level: usize, row: usize) -> usize {
        if level == self.n {
            return if self.table[row] { TRUE } else { FALSE };
        }
        let var = self.order[level];
        let bit = 1 << (self.n - 1 - var);
        let low = self.build(level + 1, row);
        let high = self.build(level + 1, row | bit);
        self.mk(var, low, high)
    }
}

fn check_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(Error::Contract(format!("{order:?} is not a permutation of 0..{n}")));
    }
    Ok(())
}

/// Build from a full truth table over `n` variables (`x0` most significant).
pub fn build_from_table(table: &[bool], n: usize, order: &[usize]) -> Result<Robdd> {
    if n > MAX_BLOCK_INPUTS || table.len() != 1 << n {
        return Err(Error::Contract(format!("table of {} rows for {n} variables", table.len())));
    }
    check_order(n, order)?;
    let placeholder = Node {
        var: usize::MAX,
        low: 0,
        high: 0,
    };
    let mut b = Builder {
        table,
        n,
        order,
        nodes: vec![placeholder, Node { low: 1, high: 1, ..placeholder }],
        unique: HashMap::new(),
    };
    let root = b.build(0, 0);
    Ok(Robdd {
        num_vars: n,
        order: order.to_vec(),
        nodes: b.nodes,
        root,
    })
}

/// Build the diagram of `dnf` over `n >= dnf.num_vars()` variables.
pub fn build_from_dnf(dnf: &Dnf, n: usize, order: &[usize]) -> Result<Robdd> {
    if dnf.num_vars() > n {
        return Err(Error::Contract(format!("formula uses {} variables, not {n}", dnf.num_vars())));
    }
    build_from_table(&dnf.truth_table(n), n, order)
}

pub fn natural_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

impl Robdd {
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        let mut id = self.root;
        while id > TRUE {
            let node = self.nodes[id];
            id = if assignment[node.var] { node.high } else { node.low };
        }
        id == TRUE
    }

    pub fn decision_nodes(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn level(&self, var: usize) -> usize {
        self.order.iter().position(|&v| v == var).unwrap_or(usize::MAX)
    }

    /// Ordered and reduced, structurally.
    pub fn is_reduced(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.nodes[2..].iter().all(|n| {
            let ordered = [n.low, n.high]
                .iter()
                .all(|&c| c <= TRUE || self.level(self.nodes[c].var) > self.level(n.var));
            n.low != n.high && ordered && seen.insert(*n)
        })
    }

    fn reachable(&self) -> Vec<usize> {
        let mut mark = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut mark[id], true) {
                continue;
            }
            if id > TRUE {
                stack.push(self.nodes[id].low);
                stack.push(self.nodes[id].high);
            }
        }
        (0..self.nodes.len()).filter(|&i| mark[i]).collect()
    }
}

/// The variable order among all permutations (`n <= 7`) or a fixed-seed
/// sample of them with the fewest nodes; ties keep the earliest candidate,
/// starting with the natural order.
pub fn best_order(dnf: &Dnf, n: usize) -> Result<Vec<usize>> {
    let table = dnf.truth_table(n);
    let mut best = natural_order(n);
    let mut best_size = build_from_table(&table, n, &best)?.decision_nodes();
    let mut consider = |order: Vec<usize>| -> Result<()> {
        let size = build_from_table(&table, n, &order)?.decision_nodes();
        if size < best_size {
            best_size = size;
            best = order;
        }
        Ok(())
    };
    if n <= 7 {
        let mut perm = natural_order(n);
        while next_permutation(&mut perm) {
            consider(perm.clone())?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut perm = natural_order(n);
        for _ in 0..2000 {
            perm.shuffle(&mut rng);
            consider(perm.clone())?;
        }
    }
    Ok(best)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT digraph of the diagram. Solid edges are taken when the node's
/// condition holds, edges ending in an open dot when it does not.
/// `labels[v]` names variable `v`; terminals get `true_label`/`false_label`.
pub fn to_dot(robdd: &Robdd, name: &str, labels: &[String], true_label: &str, false_label: &str) -> Result<String> {
    let live = robdd.reachable();
    for &id in &live {
        if id > TRUE && robdd.nodes[id].var >= labels.len() {
            return Err(Error::Contract(format!(
                "no label for variable {}",
                robdd.nodes[id].var
            )));
        }
    }
    let mut s = String::new();
    writeln!(s, "digraph \"{}\" {{", escape(name)).unwrap();
    writeln!(s, "  node [fontname=\"Helvetica\"];").unwrap();
    for &id in &live {
        match id {
            FALSE => writeln!(s, "  n0 [label=\"{}\", shape=box];", escape(false_label)).unwrap(),
            TRUE => writeln!(s, "  n1 [label=\"{}\", shape=box];", escape(true_label)).unwrap(),
            _ => writeln!(
                s,
                "  n{id} [label=\"{}\", shape=ellipse];",
                escape(&labels[robdd.nodes[id].var])
            )
            .unwrap(),
        }
    }
    for &id in live.iter().filter(|&&id| id > TRUE) {
        let n = robdd.nodes[id];
        writeln!(s, "  n{id} -> n{};", n.high).unwrap();
        writeln!(s, "  n{id} -> n{} [arrowhead=odot];", n.low).unwrap();
    }
    s.push_str("}\n");
    Ok(s)
}
