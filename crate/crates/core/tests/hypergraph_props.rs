use gajd::hypergraph::{interaction_set, Attribute, AttributeSet, Hypergraph, HypertreeCertificate};
use gajd::oracle::random_positive;
use gajd::prelation::{mpj_map, DomainSpec, Gajd};
use proptest::prelude::*;

const ATTRS: usize = 4;

fn to_hypergraph(masks: &[u8]) -> Option<Hypergraph> {
    let names: Vec<Attribute> = (1..=ATTRS).map(|i| Attribute::new(format!("A{i}")).unwrap()).collect();
    let edges: Vec<AttributeSet> = masks
        .iter()
        .map(|&m| (0..ATTRS).filter(|a| m >> a & 1 == 1).map(|a| names[a].clone()).collect())
        .collect();
    Hypergraph::new(edges).ok()
}

fn hypergraph() -> impl Strategy<Value = Hypergraph> {
    proptest::collection::btree_set(1u8..(1 << ATTRS), 1..=5)
        .prop_map(|s| to_hypergraph(&s.into_iter().collect::<Vec<_>>()).unwrap())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn valid_certificates(h: &Hypergraph) -> Vec<HypertreeCertificate> {
    permutations(h.len())
        .into_iter()
        .filter_map(|p| HypertreeCertificate::from_ordering(h, p).ok())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn greedy_agrees_with_exhaustive_search(h in hypergraph()) {
        let exhaustive = valid_certificates(&h);
        match h.find_certificate() {
            Ok(cert) => {
                prop_assert!(!exhaustive.is_empty());
                prop_assert!(cert.validate(&h).is_ok());
            }
            Err(e) => {
                prop_assert!(exhaustive.is_empty(), "greedy missed {:?}", exhaustive[0].ordering());
                for &w in &e.witness {
                    prop_assert!(w < h.len());
                }
            }
        }
    }

    #[test]
    fn certificate_choice_does_not_matter(h in hypergraph(), seed in any::<u64>()) {
        let certs = valid_certificates(&h);
        prop_assume!(!certs.is_empty());
        let scheme = h.nodes().clone();
        let rel = random_positive(&scheme, &DomainSpec::binary(&scheme), seed).unwrap();
        let first = Gajd::with_certificate(h.clone(), certs[0].clone()).unwrap();
        let base = mpj_map(&rel, &first).unwrap();
        let sets = interaction_set(&certs[0], &h).unwrap().sorted();
        for c in &certs[1..] {
            let other = Gajd::with_certificate(h.clone(), c.clone()).unwrap();
            prop_assert!(mpj_map(&rel, &other).unwrap().max_abs_diff(&base).unwrap() <= 1e-12);
            prop_assert_eq!(interaction_set(c, &h).unwrap().sorted(), sets.clone());
        }
    }
}
