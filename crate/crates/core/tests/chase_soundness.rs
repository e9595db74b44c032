use std::collections::HashMap;

use gajd::chase::{chase, implies, ChaseError, ChaseOptions, JRule, Strategy};
use gajd::hypergraph::AttributeSet;
use gajd::oracle::{project_onto, random_positive};
use gajd::prelation::{DomainSpec, Gajd, WeightedRelation};
use gajd::symbolic::{Binding, Evaluator, Variable};
use gajd::tableau::build_tr;

fn g(edges: &[&[&str]]) -> Gajd {
    Gajd::from_names(edges).unwrap()
}

struct Case {
    constraints: Vec<Gajd>,
    target: Gajd,
    holds: bool,
}

fn cases() -> Vec<Case> {
    let chain = g(&[&["A", "B"], &["B", "C"], &["C", "D"]]);
    vec![
        Case {
            constraints: vec![
                g(&[&["A", "B"], &["B", "C", "D"]]),
                g(&[&["A", "B", "C"], &["C", "D"]]),
            ],
            target: chain.clone(),
            holds: true,
        },
        Case {
            constraints: vec![g(&[&["A", "B"], &["B", "C", "D"]])],
            target: chain.clone(),
            holds: false,
        },
        Case {
            constraints: vec![g(&[&["A", "B"], &["B", "C", "D"]])],
            target: g(&[&["A", "B", "C"], &["B", "C", "D"]]),
            holds: true,
        },
        Case {
            constraints: vec![chain.clone()],
            target: g(&[&["A", "B", "C"], &["C", "D"]]),
            holds: true,
        },
        Case {
            constraints: vec![g(&[&["A", "B", "C"], &["C", "D"]])],
            target: g(&[&["A", "B"], &["B", "C", "D"]]),
            holds: false,
        },
        Case {
            constraints: vec![g(&[&["A", "B"], &["A", "C"], &["A", "D"]])],
            target: g(&[&["A", "B", "C"], &["A", "D"]]),
            holds: true,
        },
        Case {
            constraints: vec![],
            target: g(&[&["A", "B"], &["B", "C", "D"]]),
            holds: false,
        },
    ]
}

fn named(cs: &[Gajd]) -> Vec<(String, Gajd)> {
    cs.iter()
        .enumerate()
        .map(|(i, c)| (format!("C{}", i + 1), c.clone()))
        .collect()
}

/// A strictly positive relation satisfying every constraint.
fn satisfying(scheme: &AttributeSet, cs: &[Gajd], seed: u64) -> WeightedRelation {
    let domains = DomainSpec::binary(scheme);
    let p = random_positive(scheme, &domains, seed).unwrap();
    if cs.is_empty() {
        return p;
    }
    let proj = project_onto(&p, cs, 200).unwrap();
    assert!(
        proj.max_residual() <= 1e-10,
        "projection did not converge: {:e}",
        proj.max_residual()
    );
    proj.relation
}

fn bindings(vars: &[Variable]) -> impl Iterator<Item = Binding> + '_ {
    (0u32..1 << vars.len()).map(move |m| {
        vars.iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), m >> i & 1))
            .collect::<HashMap<_, _>>()
    })
}

#[test]
fn verdicts() {
    for c in cases() {
        let v = implies(&named(&c.constraints), &c.target, ChaseOptions::default()).unwrap();
        assert_eq!(v.holds, c.holds, "{} given {:?}", c.target, c.constraints);
        assert_eq!(v.factorization.is_some(), c.holds);
    }
}

#[test]
fn every_row_expression_is_sound_on_satisfying_relations() {
    // Each chased row stands for phi(row); on a relation satisfying the
    // constraints its expression must agree with the joint for every
    // assignment of the row's variables.
    for c in cases() {
        let rules: Vec<JRule> = named(&c.constraints)
            .into_iter()
            .map(|(n, g)| JRule::new(n, g))
            .collect();
        let trace = chase(&build_tr(&c.target), &rules, ChaseOptions::default()).unwrap();
        for seed in 0..5 {
            let rel = satisfying(c.target.scheme(), &c.constraints, seed);
            let mut ev = Evaluator::new(&rel);
            for row in trace.final_tableau.rows() {
                for b in bindings(row.cells()) {
                    let tuple: Vec<u32> = row.cells().iter().map(|v| b[v]).collect();
                    let want = rel.weight(&tuple);
                    let got = ev.evaluate(row.expr(), &b).unwrap();
                    assert!(!got.zero_denominator);
                    assert!(
                        (got.value - want).abs() <= 1e-8,
                        "{}: row {} expr {} gives {} vs {}",
                        c.target,
                        row.pattern_string(),
                        row.expr(),
                        got.value,
                        want
                    );
                }
            }
        }
    }
}

#[test]
fn factorization_reconstructs_the_joint() {
    for c in cases().into_iter().filter(|c| c.holds) {
        let v = implies(&named(&c.constraints), &c.target, ChaseOptions::default()).unwrap();
        let f = v.factorization.unwrap();
        assert!(f.is_distinguished());
        let row = v
            .trace
            .final_tableau
            .row(v.distinguished_row.unwrap())
            .clone();
        let rel = satisfying(c.target.scheme(), &c.constraints, 42);
        let mut ev = Evaluator::new(&rel);
        for b in bindings(row.cells()) {
            let tuple: Vec<u32> = row.cells().iter().map(|v| b[v]).collect();
            assert!((ev.evaluate(&f, &b).unwrap().value - rel.weight(&tuple)).abs() <= 1e-8);
        }
    }
}

#[test]
fn traces_replay_and_orders_agree() {
    for c in cases() {
        let rules: Vec<JRule> = named(&c.constraints)
            .into_iter()
            .map(|(n, g)| JRule::new(n, g))
            .collect();
        let t = build_tr(&c.target);
        let base = chase(&t, &rules, ChaseOptions::default()).unwrap();
        assert_eq!(base.replay().unwrap(), base.final_tableau);
        for seed in 0..10 {
            let opts = ChaseOptions {
                strategy: Strategy::Shuffled(seed),
                ..ChaseOptions::default()
            };
            let other = chase(&t, &rules, opts).unwrap();
            assert_eq!(other.replay().unwrap(), other.final_tableau);
            assert_eq!(other.pattern_set(), base.pattern_set());
        }
    }
}

#[test]
fn tampered_trace_fails_replay() {
    let c = &cases()[0];
    let rules: Vec<JRule> = named(&c.constraints)
        .into_iter()
        .map(|(n, g)| JRule::new(n, g))
        .collect();
    let mut trace = chase(&build_tr(&c.target), &rules, ChaseOptions::default()).unwrap();
    trace.steps[0].selected.reverse();
    assert!(matches!(
        trace.replay(),
        Err(ChaseError::Replay { step: 1, .. })
    ));
}

#[test]
fn row_cap_reports_partial_trace() {
    let c = &cases()[0];
    let opts = ChaseOptions {
        max_rows: 4,
        ..ChaseOptions::default()
    };
    match implies(&named(&c.constraints), &c.target, opts) {
        Err(ChaseError::RowLimit { limit, trace }) => {
            assert_eq!(limit, 4);
            assert_eq!(trace.final_tableau.len(), 4);
        }
        other => panic!("expected row limit, got {other:?}"),
    }
}
