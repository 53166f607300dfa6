//! Two-level minimization with don't-cares.
//!
//! Prime implicants come from a dynamic program over all `3^n` cubes; the
//! cover is the exact minimum-literal one found by branch and bound (seeded
//! with a greedy cover and bounded by disjoint-row lower bounds). The search
//! has a node budget; past it the best cover found so far is returned.

use super::dnf::{Dnf, Literal};
use crate::net::MAX_BLOCK_INPUTS;

/// A cube over `n` variables. Bit `n - 1 - j` stands for `x_j`, so a cube
/// covers row `r` iff `r & !dash == bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implicant {
    pub bits: u32,
    pub dash: u32,
}

impl Implicant {
    #[inline]
    pub fn covers(&self, r: usize) -> bool {
        (r as u32) & !self.dash == self.bits
    }

    pub fn literal_count(&self, n: usize) -> usize {
        n - self.dash.count_ones() as usize
    }

    pub fn to_clause(&self, n: usize) -> Vec<Literal> {
        (0..n)
            .filter_map(|j| {
                let m = 1u32 << (n - 1 - j);
                (self.dash & m == 0).then_some(Literal {
                    var: j,
                    positive: self.bits & m != 0,
                })
            })
            .collect()
    }

    /// Rows covered, ascending.
    pub fn rows(&self, n: usize) -> Vec<usize> {
        let full = (1u32 << n) - 1;
        let mut out = Vec::with_capacity(1 << self.dash.count_ones());
        // Enumerate submasks of dash in increasing order.
        let mut s = 0u32;
        loop {
            out.push((self.bits | s) as usize);
            if s == self.dash {
                break;
            }
            s = (s | !self.dash & full).wrapping_add(1) & self.dash;
        }
        out.sort_unstable();
        out
    }
}

fn check_lengths(outputs: &[bool], dont_care: &[bool]) -> usize {
    assert_eq!(outputs.len(), dont_care.len(), "table and mask lengths differ");
    assert!(outputs.len().is_power_of_two(), "table length must be 2^n");
    let n = outputs.len().trailing_zeros() as usize;
    assert!(n <= MAX_BLOCK_INPUTS, "at most {MAX_BLOCK_INPUTS} inputs");
    n
}

/// All prime implicants of `on ∪ dc` that cover at least one on-set row,
/// in ascending `(bits, dash)` order.
pub fn prime_implicants(outputs: &[bool], dont_care: &[bool]) -> Vec<Implicant> {
    let n = check_lengths(outputs, dont_care);
    let size = 1usize << n;
    // imp[d * size + b]: cube with dash d and fixed bits b is an implicant.
    let mut imp = vec![false; size * size];
    for b in 0..size {
        imp[b] = outputs[b] || dont_care[b];
    }
    for d in 1..size {
        let k = d & d.wrapping_neg();
        let prev = (d ^ k) * size;
        let mut b = 0usize;
        // Iterate the b that avoid d.
        loop {
            if b & d == 0 {
                imp[d * size + b] = imp[prev + b] && imp[prev + (b | k)];
            }
            b += 1;
            if b >= size {
                break;
            }
        }
    }
    let mut primes = Vec::new();
    for b in 0..size {
        for d in 0..size {
            if b & d != 0 || !imp[d * size + b] {
                continue;
            }
            let maximal = (0..n).all(|j| {
                let m = 1usize << j;
                d & m != 0 || !imp[(d | m) * size + (b & !m)]
            });
            if !maximal {
                continue;
            }
            let p = Implicant {
                bits: b as u32,
                dash: d as u32,
            };
            if p.rows(n).iter().any(|&r| outputs[r]) {
                primes.push(p);
            }
        }
    }
    primes.sort();
    primes
}

const NODE_BUDGET: usize = 200_000;

struct Cover<'a> {
    costs: &'a [usize],
    /// Row -> primes covering it, in branching order.
    by_row: Vec<Vec<usize>>,
    /// Prime -> row bitset.
    rows_of: Vec<Vec<u64>>,
    best_cost: usize,
    best: Vec<usize>,
    nodes: usize,
}

fn words(rows: usize) -> usize {
    rows.div_ceil(64)
}

fn has(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

impl Cover<'_> {
    fn lower_bound(&self, uncovered: &[u64], primes: usize) -> usize {
        let mut rows: Vec<usize> = (0..self.by_row.len()).filter(|&r| has(uncovered, r)).collect();
        rows.sort_by_key(|&r| (self.by_row[r].len(), r));
        let mut blocked = vec![false; primes];
        let mut lb = 0;
        for r in rows {
            let ps = &self.by_row[r];
            if ps.iter().any(|&p| blocked[p]) {
                continue;
            }
            lb += ps.iter().map(|&p| self.costs[p]).min().unwrap_or(0);
            for &p in ps {
                blocked[p] = true;
            }
        }
        lb
    }

    fn search(&mut self, uncovered: &mut Vec<u64>, cost: usize, chosen: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return;
        }
        let pick = (0..self.by_row.len())
            .filter(|&r| has(uncovered, r))
            .min_by_key(|&r| (self.by_row[r].len(), r));
        let Some(row) = pick else {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = chosen.clone();
            }
            return;
        };
        if cost + self.lower_bound(uncovered, self.rows_of.len()) >= self.best_cost {
            return;
        }
        let mut options = self.by_row[row].clone();
        options.sort_by_key(|&p| {
            let gain: u32 = self.rows_of[p]
                .iter()
                .zip(uncovered.iter())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            (self.costs[p], std::cmp::Reverse(gain), p)
        });
        for p in options {
            let saved = uncovered.clone();
            for (u, m) in uncovered.iter_mut().zip(&self.rows_of[p]) {
                *u &= !m;
            }
            chosen.push(p);
            self.search(uncovered, cost + self.costs[p], chosen);
            chosen.pop();
            *uncovered = saved;
            if self.nodes > NODE_BUDGET {
                return;
            }
        }
    }
}

/// Choose a minimum-literal set of primes covering every on-set row.
pub fn minimum_cover(n: usize, on_rows: &[usize], primes: &[Implicant]) -> Vec<Implicant> {
    let costs: Vec<usize> = primes.iter().map(|p| p.literal_count(n)).collect();
    let w = words(on_rows.len());
    let mut rows_of = vec![vec![0u64; w]; primes.len()];
    let mut by_row = vec![Vec::new(); on_rows.len()];
    for (pi, p) in primes.iter().enumerate() {
        for (ri, &r) in on_rows.iter().enumerate() {
            if p.covers(r) {
                rows_of[pi][ri / 64] |= 1 << (ri % 64);
                by_row[ri].push(pi);
            }
        }
    }

    let mut uncovered = vec![0u64; w];
    for ri in 0..on_rows.len() {
        uncovered[ri / 64] |= 1 << (ri % 64);
    }
    let mut chosen = Vec::new();
    let mut cost = 0;
    // Essential primes.
    for ps in &by_row {
        if let [p] = ps[..] {
            if !chosen.contains(&p) {
                chosen.push(p);
                cost += costs[p];
            }
        }
    }
    for &p in &chosen {
        for (u, m) in uncovered.iter_mut().zip(&rows_of[p]) {
            *u &= !m;
        }
    }

    // Greedy upper bound: cheapest literals per newly covered row.
    let mut greedy = chosen.clone();
    let mut greedy_cost = cost;
    let mut left = uncovered.clone();
    while left.iter().any(|x| *x != 0) {
        let mut best: Option<(usize, usize, usize)> = None;
        for (pi, m) in rows_of.iter().enumerate() {
            let gain: usize = m.iter().zip(&left).map(|(a, b)| (a & b).count_ones() as usize).sum();
            if gain == 0 {
                continue;
            }
            // Compare costs[pi]/gain against the incumbent without division.
            let better = match best {
                None => true,
                Some((bp, bg, _)) => costs[pi] * bg < costs[bp] * gain,
            };
            if better {
                best = Some((pi, gain, costs[pi]));
            }
        }
        let (pi, _, c) = best.expect("every on-set row has a prime");
        greedy.push(pi);
        greedy_cost += c;
        for (u, m) in left.iter_mut().zip(&rows_of[pi]) {
            *u &= !m;
        }
    }

    let mut search = Cover {
        costs: &costs,
        by_row,
        rows_of,
        best_cost: greedy_cost,
        best: greedy,
        nodes: 0,
    };
    if uncovered.iter().any(|x| *x != 0) {
        let mut chosen_bb = chosen.clone();
        search.search(&mut uncovered, cost, &mut chosen_bb);
    }
    let mut out: Vec<Implicant> = search.best.iter().map(|&p| primes[p]).collect();
    out.sort();
    out.dedup();
    out
}

/// Minimum-literal DNF agreeing with `outputs` on every row not marked in
/// `dont_care`.
///
/// # Panics
/// If the lengths differ or are not `2^n` with `n <= 9`.
pub fn quine_mccluskey(outputs: &[bool], dont_care: &[bool]) -> Dnf {
    minimize(outputs, dont_care).0
}

/// Like [`quine_mccluskey`], also returning the chosen implicants.
pub fn minimize(outputs: &[bool], dont_care: &[bool]) -> (Dnf, Vec<Implicant>) {
    let n = check_lengths(outputs, dont_care);
    let on_rows: Vec<usize> = (0..outputs.len())
        .filter(|&r| outputs[r] && !dont_care[r])
        .collect();
    if on_rows.is_empty() {
        return (Dnf::falsum(), Vec::new());
    }
    let primes = prime_implicants(outputs, dont_care);
    let cover = minimum_cover(n, &on_rows, &primes);
    let dnf = Dnf::new(cover.iter().map(|p| p.to_clause(n)).collect());
    (dnf, cover)
}
