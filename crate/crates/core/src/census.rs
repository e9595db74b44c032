//! Bounded enumeration of hypertrees.
//!
//! [`hypertree_census`] lists every hypertree with at most `max_edges` edges
//! over at most `max_attrs` attributes, one per isomorphism class. Each is
//! grown edge by edge: a new edge is a subset of an existing edge plus fresh
//! attributes, which is exactly a twig of what came before. The edges of each
//! result are therefore stored in a construction ordering.

use std::collections::HashSet;

use crate::hypergraph::{Attribute, AttributeSet, Hypergraph};

/// Edges as attribute bitmasks over attributes `0..n`.
#[derive(Debug, Clone)]
struct Shape {
    n: usize,
    edges: Vec<u32>,
}

impl Shape {
    /// Invariant under attribute relabelling and edge reordering: the least,
    /// over edge permutations, of the sorted per-attribute membership masks.
    fn canonical(&self) -> (usize, Vec<u32>) {
        let m = self.edges.len();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut best: Option<Vec<u32>> = None;
        loop {
            let mut rows: Vec<u32> = (0..self.n)
                .map(|a| {
                    perm.iter()
                        .enumerate()
                        .filter(|(_, &e)| self.edges[e] >> a & 1 == 1)
                        .fold(0u32, |acc, (pos, _)| acc | 1 << pos)
                })
                .collect();
            rows.sort_unstable();
            if best.as_ref().is_none_or(|b| rows < *b) {
                best = Some(rows);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        (m, best.unwrap_or_default())
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn subsets(mask: u32) -> impl Iterator<Item = u32> {
    // All submasks of `mask`, including 0 and `mask` itself.
    let mut s = Some(mask);
    std::iter::from_fn(move || {
        let cur = s?;
        s = if cur == 0 {
            None
        } else {
            Some((cur - 1) & mask)
        };
        Some(cur)
    })
}

fn to_hypergraph(s: &Shape) -> Hypergraph {
    let names: Vec<Attribute> = (1..=s.n)
        .map(|i| Attribute::new(format!("A{i}")).expect("valid"))
        .collect();
    let edges = s
        .edges
        .iter()
        .map(|&e| {
            (0..s.n)
                .filter(|&a| e >> a & 1 == 1)
                .map(|a| names[a].clone())
                .collect()
        })
        .collect();
    Hypergraph::new(edges).expect("census edges are distinct and nonempty")
}

/// One hypertree per isomorphism class, attributes named `A1..An`, edges in
/// a construction ordering. Ordered by edge count, then discovery order.
pub fn hypertree_census(max_edges: usize, max_attrs: usize) -> Vec<Hypergraph> {
    assert!(
        max_attrs <= 31 && max_edges <= 31,
        "census bounds too large"
    );
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut level: Vec<Shape> = Vec::new();
    if max_edges == 0 {
        return out;
    }
    for k in 1..=max_attrs {
        level.push(Shape {
            n: k,
            edges: vec![(1u32 << k) - 1],
        });
    }
    for s in &level {
        seen.insert(s.canonical());
    }
    for edges in 1..=max_edges {
        out.extend(level.iter().map(to_hypergraph));
        if edges == max_edges {
            break;
        }
        let mut next = Vec::new();
        for s in &level {
            for &host in &s.edges {
                for keep in subsets(host) {
                    for fresh in 0..=(max_attrs - s.n) {
                        let e = keep | (((1u32 << fresh) - 1) << s.n);
                        if e == 0 || s.edges.contains(&e) {
                            continue;
                        }
                        let mut grown = s.clone();
                        grown.n += fresh;
                        grown.edges.push(e);
                        if seen.insert(grown.canonical()) {
                            next.push(grown);
                        }
                    }
                }
            }
        }
        level = next;
    }
    out
}

/// Every hypertree over exactly the attributes of `scheme` with at most
/// `max_edges` edges, as edge sets (edges listed in ascending order).
pub fn labelled_hypertrees(scheme: &AttributeSet, max_edges: usize) -> Vec<Hypergraph> {
    let attrs = scheme.to_vec();
    let n = attrs.len();
    assert!(n <= 16, "scheme too large to enumerate");
    let full = (1u32 << n) - 1;
    let masks: Vec<u32> = (1..=full).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<u32> = Vec::new();
    fn go(
        masks: &[u32],
        start: usize,
        max: usize,
        full: u32,
        chosen: &mut Vec<u32>,
        attrs: &[Attribute],
        out: &mut Vec<Hypergraph>,
    ) {
        if !chosen.is_empty() && chosen.iter().fold(0, |a, &e| a | e) == full {
            let edges = chosen
                .iter()
                .map(|&e| {
                    (0..attrs.len())
                        .filter(|&a| e >> a & 1 == 1)
                        .map(|a| attrs[a].clone())
                        .collect()
                })
                .collect();
            let h = Hypergraph::new(edges).expect("distinct nonempty edges");
            if h.is_hypertree() {
                out.push(h);
            }
        }
        if chosen.len() == max {
            return;
        }
        for i in start..masks.len() {
            chosen.push(masks[i]);
            go(masks, i + 1, max, full, chosen, attrs, out);
            chosen.pop();
        }
    }
    go(&masks, 0, max_edges, full, &mut chosen, &attrs, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        // One edge: one class per size.
        assert_eq!(hypertree_census(1, 3).len(), 3);
        // Two attributes: {A}, {AB}, {A}{B}, {A}{AB}.
        assert_eq!(hypertree_census(2, 2).len(), 4);
    }

    #[test]
    fn census_members_are_hypertrees_in_construction_order() {
        for h in hypertree_census(3, 4) {
            let order: Vec<usize> = (0..h.len()).collect();
            assert!(
                crate::hypergraph::HypertreeCertificate::from_ordering(&h, order).is_ok(),
                "{h}"
            );
        }
    }

    #[test]
    fn census_has_no_isomorphic_duplicates() {
        let all = hypertree_census(3, 4);
        let mut forms = HashSet::new();
        for h in &all {
            let nodes = h.nodes().to_vec();
            let s = Shape {
                n: nodes.len(),
                edges: h
                    .edges()
                    .iter()
                    .map(|e| {
                        nodes
                            .iter()
                            .enumerate()
                            .filter(|(_, a)| e.contains(a))
                            .fold(0, |m, (i, _)| m | 1 << i)
                    })
                    .collect(),
            };
            assert!(forms.insert(s.canonical()), "{h}");
        }
    }

    #[test]
    fn labelled_enumeration() {
        let s = AttributeSet::parse(["A", "B"]).unwrap();
        // {AB}, {A}{B}, {A}{AB}, {B}{AB}, {A}{B}{AB}
        assert_eq!(labelled_hypertrees(&s, 3).len(), 5);
        let s3 = AttributeSet::parse(["A", "B", "C"]).unwrap();
        let all = labelled_hypertrees(&s3, 3);
        assert!(all.iter().all(|h| h.nodes() == &s3 && h.len() <= 3));
        let triangle =
            Hypergraph::from_names(&[vec!["A", "B"], vec!["A", "C"], vec!["B", "C"]]).unwrap();
        assert!(!all.contains(&triangle));
    }
}
