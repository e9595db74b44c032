use std::collections::HashMap;

use gajd::hypergraph::{Attribute, AttributeSet};
use gajd::oracle::random_positive;
use gajd::prelation::DomainSpec;
use gajd::symbolic::{evaluate, multiply, Binding, MarginalAtom, RationalExpression, Variable};
use proptest::prelude::*;

const COLS: usize = 4;

fn columns() -> Vec<Attribute> {
    (1..=COLS)
        .map(|i| Attribute::new(format!("A{i}")).unwrap())
        .collect()
}

/// One atom: a nonempty column mask plus, per column, distinguished or one
/// of two nondistinguished variables.
fn atom() -> impl Strategy<Value = MarginalAtom> {
    (1u8..(1 << COLS), proptest::collection::vec(0u32..3, COLS)).prop_map(|(mask, kinds)| {
        let cols = columns();
        MarginalAtom::new((0..COLS).filter(|c| mask >> c & 1 == 1).map(|c| {
            let col = cols[c].clone();
            match kinds[c] {
                0 => Variable::distinguished(c as u32 + 1, col),
                k => Variable::nondistinguished(10 * c as u32 + k, col),
            }
        }))
    })
}

fn expr() -> impl Strategy<Value = RationalExpression> {
    (
        proptest::collection::vec(atom(), 0..4),
        proptest::collection::vec(atom(), 0..3),
    )
        .prop_map(|(n, d)| RationalExpression::new(n, d))
}

fn all_vars(es: &[&RationalExpression]) -> Vec<Variable> {
    let mut v: Vec<Variable> = es
        .iter()
        .flat_map(|e| {
            e.atoms()
                .flat_map(|a| a.variables().cloned())
                .collect::<Vec<_>>()
        })
        .collect();
    v.sort();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_with_inverse_cancels(e in expr()) {
        prop_assert!(multiply(&e, &e.inverse()).is_one());
        prop_assert_eq!(e.inverse().inverse(), e);
    }

    #[test]
    fn multiplication_is_commutative_and_associative(a in expr(), b in expr(), c in expr()) {
        prop_assert_eq!(multiply(&a, &b), multiply(&b, &a));
        prop_assert_eq!(multiply(&multiply(&a, &b), &c), multiply(&a, &multiply(&b, &c)));
        prop_assert_eq!(multiply(&a, &RationalExpression::one()), a);
    }

    #[test]
    fn canonical_form_ignores_input_order(n in proptest::collection::vec(atom(), 0..4), d in proptest::collection::vec(atom(), 0..3)) {
        let mut rn = n.clone();
        rn.reverse();
        let mut rd = d.clone();
        rd.reverse();
        let a = RationalExpression::new(n, d);
        let b = RationalExpression::new(rn, rd);
        prop_assert_eq!(a.to_string(), b.to_string());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn no_atom_on_both_sides(e in expr()) {
        for a in e.numerator() {
            prop_assert!(!e.denominator().contains(a));
        }
    }

    #[test]
    fn evaluation_is_multiplicative(a in expr(), b in expr(), seed in 0u64..1000, values in proptest::collection::vec(0u32..2, 32)) {
        let scheme: AttributeSet = columns().into_iter().collect();
        let joint = random_positive(&scheme, &DomainSpec::binary(&scheme), seed).unwrap();
        let binding: Binding = all_vars(&[&a, &b])
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, values[i % values.len()]))
            .collect::<HashMap<_, _>>();
        let ea = evaluate(&a, &joint, &binding).unwrap().value;
        let eb = evaluate(&b, &joint, &binding).unwrap().value;
        let eab = evaluate(&multiply(&a, &b), &joint, &binding).unwrap().value;
        prop_assert!((eab - ea * eb).abs() <= 1e-9 * eab.abs().max(1.0), "{} vs {}", eab, ea * eb);
    }
}
