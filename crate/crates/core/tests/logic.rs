mod common;

use common::{brute_min_literals, random_table, row_of};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttrules::data::{FeatureColumn, FeatureKind, FeatureSchema};
use ttrules::logic::{
    dc_mask_for_patch, enumerate_block, minimize, prime_implicants, quine_mccluskey, row_bits, Literal,
};
use ttrules::net::{LttBlock, LttSpec};
use ttrules::toy;

fn table(n: usize, on: &[&str]) -> Vec<bool> {
    let mut t = vec![false; 1 << n];
    for r in on {
        t[row_of(r)] = true;
    }
    t
}

#[test]
fn toy_block_table_has_single_one() {
    let t = enumerate_block(&toy::block(), 0).unwrap();
    assert_eq!(t.outputs, table(4, &["0001"]));
}

#[test]
fn zero_weights_give_zero_table() {
    let spec = LttSpec {
        n: 4,
        stride: 1,
        amplification: 2,
        k1: 3,
        k2: 2,
        inner_bn: false,
    };
    let blk = LttBlock::new(spec, vec![0.0; 6], None, vec![0.0; 4]).unwrap();
    assert_eq!(enumerate_block(&blk, 0).unwrap().ones(), 0);
}

#[test]
fn random_block_tables_match_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let k1 = rng.gen_range(1..=n);
        let spec = LttSpec {
            n,
            stride: 1,
            amplification: rng.gen_range(1..=4),
            k1,
            k2: n - k1 + 1,
            inner_bn: rng.gen_bool(0.5),
        };
        let blk = LttBlock::random(spec, &mut rng);
        let t = enumerate_block(&blk, 3).unwrap();
        assert_eq!(t.filter_id, 3);
        for r in 0..1 << n {
            assert_eq!(t.outputs[r], blk.forward(&row_bits(n, r)), "row {r}");
        }
    }
}

#[test]
fn single_minterm_needs_every_literal() {
    let d = quine_mccluskey(&table(4, &["0001"]), &[false; 16]);
    assert_eq!(
        d.clauses,
        vec![vec![Literal::neg(0), Literal::neg(1), Literal::neg(2), Literal::pos(3)]]
    );
    assert_eq!(d.to_string(), "(x3 AND NOT x0 AND NOT x1 AND NOT x2)");
}

#[test]
fn dont_cares_drop_a_literal() {
    let mut dc = vec![false; 16];
    for r in ["0011", "0111", "1011", "1111"] {
        dc[row_of(r)] = true;
    }
    let d = quine_mccluskey(&table(4, &["0001"]), &dc);
    assert_eq!(d.clauses, vec![vec![Literal::neg(0), Literal::neg(1), Literal::pos(3)]]);
}

#[test]
fn all_ones_is_verum() {
    let d = quine_mccluskey(&[true; 8], &[false; 8]);
    assert!(d.is_true());
    assert_eq!(d.clauses.len(), 1);
    let d = quine_mccluskey(&[false; 8], &[false; 8]);
    assert!(d.is_false());
}

fn group_schema(names: &[&str], grouped: &[bool]) -> FeatureSchema {
    let columns = names
        .iter()
        .zip(grouped)
        .map(|(n, &g)| FeatureColumn {
            name: n.to_string(),
            kind: if g { FeatureKind::CategoricalExpanded } else { FeatureKind::Binary },
            group_id: g.then_some(0),
            category_label: g.then(|| n.to_string()),
        })
        .collect();
    FeatureSchema::new(columns, vec!["g".into()]).unwrap()
}

#[test]
fn dc_mask_of_toy_second_patch() {
    let m = dc_mask_for_patch(&toy::schema(), &[1, 2, 3, 4], 1);
    let rows: Vec<usize> = (0..16).filter(|&r| m.dont_care[r]).collect();
    let expect: Vec<usize> = ["0011", "0111", "1011", "1111"].iter().map(|r| row_of(r)).collect();
    assert_eq!(rows, expect);
    assert_eq!(m.patch_id, 1);
    assert_eq!(dc_mask_for_patch(&toy::schema(), &[0, 1, 2, 3], 0).count(), 0);
}

#[test]
fn dc_mask_three_of_a_group() {
    let s = group_schema(&["a", "b", "c", "d", "e"], &[false, true, true, true, false]);
    let m = dc_mask_for_patch(&s, &[0, 1, 2, 3, 4], 0);
    for r in 0..32 {
        let b = row_bits(5, r);
        let hot = b[1..4].iter().filter(|&&x| x).count();
        assert_eq!(m.dont_care[r], hot >= 2, "row {r}");
    }
    // 4 of 8 group assignments have two or more bits set, times 4 free rows.
    assert_eq!(m.count(), 16);
}

#[test]
fn oracle_agrees_on_small_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let (t, dc) = random_table(&mut rng, n, 0.5, 0.2);
        let d = quine_mccluskey(&t, &dc);
        assert_eq!(d.literal_count(), brute_min_literals(&t, &dc), "{t:?} {dc:?}");
    }
}

fn table_strategy() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (1usize..=7).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), 1 << n),
            proptest::collection::vec(proptest::bool::weighted(0.2), 1 << n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn minimized_dnf_is_sound((t, dc) in table_strategy()) {
        let n = t.len().trailing_zeros() as usize;
        let d = quine_mccluskey(&t, &dc);
        prop_assert!(d.is_well_formed());
        for r in 0..t.len() {
            if !dc[r] {
                prop_assert_eq!(d.eval_row(n, r), t[r]);
            }
        }
    }

    #[test]
    fn dont_cares_never_add_literals((t, dc) in table_strategy()) {
        let with = quine_mccluskey(&t, &dc).literal_count();
        let without = quine_mccluskey(&t, &vec![false; t.len()]).literal_count();
        prop_assert!(with <= without);
    }

    #[test]
    fn emitted_clauses_are_prime((t, dc) in table_strategy()) {
        let n = t.len().trailing_zeros() as usize;
        let d = quine_mccluskey(&t, &dc);
        for clause in &d.clauses {
            for drop in 0..clause.len() {
                let mut widened = clause.clone();
                widened.remove(drop);
                let hits_off = (0..t.len()).any(|r| {
                    let b = row_bits(n, r);
                    widened.iter().all(|l| l.eval(&b)) && !t[r] && !dc[r]
                });
                prop_assert!(hits_off, "clause {:?} is not prime", clause);
            }
        }
    }

    #[test]
    fn primes_cover_the_on_set((t, dc) in table_strategy()) {
        let n = t.len().trailing_zeros() as usize;
        let primes = prime_implicants(&t, &dc);
        for r in 0..t.len() {
            if t[r] && !dc[r] {
                prop_assert!(primes.iter().any(|p| p.covers(r)));
            }
        }
        for p in &primes {
            prop_assert!(p.rows(n).iter().all(|&r| t[r] || dc[r]));
        }
        let (d, cover) = minimize(&t, &dc);
        prop_assert_eq!(d.clauses.len(), cover.len());
        prop_assert!(cover.iter().all(|c| primes.contains(c)));
    }
}
