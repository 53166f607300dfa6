#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use ttrules::logic::{Dnf, Literal};

/// Cubes over `n` variables as `(care, value)` masks, `x_j` at bit `n-1-j`.
fn all_cubes(n: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let full = (1u32 << n) - 1;
    for care in 0..=full {
        let mut v = care;
        loop {
            out.push((care, v));
            if v == 0 {
                break;
            }
            v = (v - 1) & care;
        }
    }
    out
}

/// Minimum total literal count of any DNF equal to `outputs` off the
/// don't-care rows, by exhaustive search over prime cubes.
pub fn brute_min_literals(outputs: &[bool], dc: &[bool]) -> usize {
    let n = outputs.len().trailing_zeros() as usize;
    let rows = 1usize << n;
    let on: Vec<usize> = (0..rows).filter(|&r| outputs[r] && !dc[r]).collect();
    if on.is_empty() {
        return 0;
    }
    let allowed = |r: usize| outputs[r] || dc[r];
    let implicant = |care: u32, val: u32| (0..rows).all(|r| (r as u32) & care != val || allowed(r));
    let cubes: Vec<(u32, u32)> = all_cubes(n)
        .into_iter()
        .filter(|&(c, v)| implicant(c, v))
        .collect();
    // Keep maximal cubes only.
    let primes: Vec<(u32, u32)> = cubes
        .iter()
        .copied()
        .filter(|&(c, v)| (0..n).all(|b| c & (1 << b) == 0 || !implicant(c & !(1 << b), v & !(1 << b))))
        .collect();
    let index: HashMap<usize, usize> = on.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let masks: Vec<(u64, usize)> = primes
        .iter()
        .map(|&(c, v)| {
            let mut m = 0u64;
            for (&r, &i) in &index {
                if (r as u32) & c == v {
                    m |= 1 << i;
                }
            }
            (m, c.count_ones() as usize)
        })
        .filter(|&(m, _)| m != 0)
        .collect();
    let full: u64 = if on.len() == 64 { u64::MAX } else { (1u64 << on.len()) - 1 };
    let mut memo = HashMap::new();
    solve(full, &masks, &mut memo)
}

fn solve(left: u64, masks: &[(u64, usize)], memo: &mut HashMap<u64, usize>) -> usize {
    if left == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&left) {
        return v;
    }
    let low = left & left.wrapping_neg();
    let mut best = usize::MAX;
    for &(m, cost) in masks {
        if m & low != 0 {
            let sub = solve(left & !m, masks, memo);
            best = best.min(sub + cost);
        }
    }
    memo.insert(left, best);
    best
}

pub fn random_table<R: Rng>(rng: &mut R, n: usize, p_on: f64, p_dc: f64) -> (Vec<bool>, Vec<bool>) {
    let rows = 1 << n;
    let outputs = (0..rows).map(|_| rng.gen_bool(p_on)).collect();
    let dc = (0..rows).map(|_| rng.gen_bool(p_dc)).collect();
    (outputs, dc)
}

/// A random well-formed DNF over `n` variables.
pub fn random_dnf<R: Rng>(rng: &mut R, n: usize) -> Dnf {
    let clauses = rng.gen_range(0..=5);
    let mut out: Vec<Vec<Literal>> = Vec::new();
    for _ in 0..clauses {
        let mut clause = Vec::new();
        for var in 0..n {
            match rng.gen_range(0..3) {
                0 => clause.push(Literal::pos(var)),
                1 => clause.push(Literal::neg(var)),
                _ => {}
            }
        }
        if !out.contains(&clause) {
            out.push(clause);
        }
    }
    Dnf::new(out)
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

pub fn row_of(s: &str) -> usize {
    usize::from_str_radix(s, 2).unwrap()
}
