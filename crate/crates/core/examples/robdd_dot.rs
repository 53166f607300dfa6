//! Decision diagrams for a rule, under the natural and the best variable order.
//!
//! Run with `cargo run --example robdd_dot > rule.dot` and render with
//! `dot -Tsvg rule.dot`.

use ttrules::logic::{Dnf, Literal};
use ttrules::robdd::{best_order, build_from_dnf, natural_order, to_dot};

fn main() -> ttrules::Result<()> {
    // (a1 AND b1) OR (a2 AND b2) OR (a3 AND b3) with the pairs split apart.
    let names: Vec<String> = ["a1", "a2", "a3", "b1", "b2", "b3"].map(String::from).to_vec();
    let f = Dnf::new(vec![
        vec![Literal::pos(0), Literal::pos(3)],
        vec![Literal::pos(1), Literal::pos(4)],
        vec![Literal::pos(2), Literal::pos(5)],
    ]);

    let natural = build_from_dnf(&f, 6, &natural_order(6))?;
    let order = best_order(&f, 6)?;
    let best = build_from_dnf(&f, 6, &order)?;
    let by_name: Vec<&str> = order.iter().map(|&v| names[v].as_str()).collect();
    eprintln!("natural order: {} decision nodes", natural.decision_nodes());
    eprintln!("order {by_name:?}: {} decision nodes", best.decision_nodes());

    for r in 0..64usize {
        let a: Vec<bool> = (0..6).map(|j| r >> j & 1 == 1).collect();
        assert_eq!(natural.evaluate(&a), f.eval(&a));
        assert_eq!(best.evaluate(&a), f.eval(&a));
    }

    print!("{}", to_dot(&best, "pairs", &names, "fires", "silent")?);
    Ok(())
}
