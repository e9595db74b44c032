//! Attribute universes, hypergraphs and hypertree recognition.
//!
//! A hypergraph is a sequence of hyperedges (attribute subsets). It is a
//! hypertree when its edges admit a construction ordering `R_1, ..., R_N` in
//! which every `R_i` (i >= 2) is a twig of the prefix `{R_1, ..., R_i}`. A
//! [`HypertreeCertificate`] records such an ordering together with a branching
//! function, and the [`InteractionSet`] is the multiset of branch/twig
//! intersections it induces.
//!
//! Branching is indexed by *position in the ordering*: `branching[i]` is the
//! position `j < i` of the branch of the edge at position `i`. The original
//! edge index of a position is `ordering[i]`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("attribute name must be a non-empty identifier, got {0:?}")]
    BadAttributeName(String),
    #[error("hypergraph has no edges")]
    NoEdges,
    #[error("edge {0} is empty")]
    EmptyEdge(usize),
    #[error("edges {first} and {second} are identical ({edge})")]
    DuplicateEdge {
        first: usize,
        second: usize,
        edge: AttributeSet,
    },
    #[error("edge {edge} is not contained in the node set {nodes}")]
    EdgeOutsideNodes {
        edge: AttributeSet,
        nodes: AttributeSet,
    },
    #[error("node {0} appears in no edge")]
    UncoveredNode(Attribute),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("candidate edge {0} is not in the `within` set")]
    CandidateNotWithin(usize),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

/// A named attribute. Ordering is by name, comparing embedded digit runs
/// numerically so that `A2 < A10`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Attribute(Arc<str>);

impl Attribute {
    pub fn new(name: impl AsRef<str>) -> Result<Self, HypergraphError> {
        let name = name.as_ref();
        let valid = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_alphanumeric() || c == '_' || c == '.' || c == '-')
            && !name.starts_with('#');
        if !valid {
            return Err(HypergraphError::BadAttributeName(name.to_string()));
        }
        Ok(Attribute(Arc::from(name)))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl Ord for Attribute {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Attribute {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Attribute> for String {
    fn from(a: Attribute) -> String {
        a.0.to_string()
    }
}

impl TryFrom<String> for Attribute {
    type Error = HypergraphError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Attribute::new(s)
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.char_indices().peekable(), b.char_indices().peekable());
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((sa, ca)), Some((sb, cb))) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let ea = a[sa..]
                        .find(|c: char| !c.is_ascii_digit())
                        .map_or(a.len(), |e| sa + e);
                    let eb = b[sb..]
                        .find(|c: char| !c.is_ascii_digit())
                        .map_or(b.len(), |e| sb + e);
                    let (da, db) = (
                        a[sa..ea].trim_start_matches('0'),
                        b[sb..eb].trim_start_matches('0'),
                    );
                    let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    while ai.peek().is_some_and(|&(i, _)| i < ea) {
                        ai.next();
                    }
                    while bi.peek().is_some_and(|&(i, _)| i < eb) {
                        bi.next();
                    }
                } else {
                    let ord = ca.cmp(&cb);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    ai.next();
                    bi.next();
                }
            }
        }
    }
}

/// An ordered set of attributes; iteration follows the attribute order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeSet(BTreeSet<Attribute>);

impl AttributeSet {
    pub fn new() -> Self {
        AttributeSet(BTreeSet::new())
    }

    /// Builds a set from attribute names, e.g. `AttributeSet::parse(["A1", "A2"])`.
    pub fn parse<I, S>(names: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        names.into_iter().map(Attribute::new).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &Attribute) -> bool {
        self.0.contains(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Attribute> + '_ {
        self.0.iter()
    }

    pub fn insert(&mut self, a: Attribute) -> bool {
        self.0.insert(a)
    }

    pub fn union(&self, other: &AttributeSet) -> AttributeSet {
        AttributeSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &AttributeSet) -> AttributeSet {
        AttributeSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &AttributeSet) -> AttributeSet {
        AttributeSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &AttributeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Position of `a` in iteration order.
    pub fn position(&self, a: &Attribute) -> Option<usize> {
        self.0.iter().position(|x| x == a)
    }

    /// Positions of every member of `sub` within `self`, in `sub`'s order.
    pub fn positions_of(&self, sub: &AttributeSet) -> Option<Vec<usize>> {
        sub.iter().map(|a| self.position(a)).collect()
    }

    pub fn to_vec(&self) -> Vec<Attribute> {
        self.0.iter().cloned().collect()
    }
}

impl FromIterator<Attribute> for AttributeSet {
    fn from_iter<T: IntoIterator<Item = Attribute>>(iter: T) -> Self {
        AttributeSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a AttributeSet {
    type Item = &'a Attribute;
    type IntoIter = std::collections::btree_set::Iter<'a, Attribute>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Renders as `{A1 A2}`, the problem-file syntax.
impl fmt::Display for AttributeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for AttributeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwigStatus {
    /// The candidate is the only edge under consideration.
    Sole,
    /// Twig with the smallest-index branch.
    Twig {
        branch: usize,
    },
    NotTwig,
}

impl TwigStatus {
    pub fn is_twig(self) -> bool {
        !matches!(self, TwigStatus::NotTwig)
    }

    pub fn branch(self) -> Option<usize> {
        match self {
            TwigStatus::Twig { branch } => Some(branch),
            _ => None,
        }
    }
}

/// The hypergraph is not a hypertree. `witness` holds the edge indices left
/// when twig removal gets stuck; none of them is a twig of the group.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a hypertree: no twig among edges {}", render_edges(.edges))]
pub struct NotHypertree {
    pub witness: Vec<usize>,
    pub edges: Vec<AttributeSet>,
}

fn render_edges(edges: &[AttributeSet]) -> String {
    edges
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypergraph {
    nodes: AttributeSet,
    edges: Vec<AttributeSet>,
}

impl Hypergraph {
    /// Hypergraph whose node set is the union of `edges`.
    pub fn new(edges: Vec<AttributeSet>) -> Result<Self, HypergraphError> {
        let nodes = edges
            .iter()
            .fold(AttributeSet::new(), |acc, e| acc.union(e));
        Self::with_nodes(nodes, edges)
    }

    pub fn with_nodes(
        nodes: AttributeSet,
        edges: Vec<AttributeSet>,
    ) -> Result<Self, HypergraphError> {
        if edges.is_empty() {
            return Err(HypergraphError::NoEdges);
        }
        for (i, e) in edges.iter().enumerate() {
            if e.is_empty() {
                return Err(HypergraphError::EmptyEdge(i));
            }
            if !e.is_subset(&nodes) {
                return Err(HypergraphError::EdgeOutsideNodes {
                    edge: e.clone(),
                    nodes: nodes.clone(),
                });
            }
            if let Some(first) = edges[..i].iter().position(|f| f == e) {
                return Err(HypergraphError::DuplicateEdge {
                    first,
                    second: i,
                    edge: e.clone(),
                });
            }
        }
        for a in &nodes {
            if !edges.iter().any(|e| e.contains(a)) {
                return Err(HypergraphError::UncoveredNode(a.clone()));
            }
        }
        Ok(Hypergraph { nodes, edges })
    }

    /// Convenience constructor from name lists, e.g. `[["A","B"], ["B","C"]]`.
    pub fn from_names<E, S>(edges: &[E]) -> Result<Self, HypergraphError>
    where
        E: AsRef<[S]>,
        S: AsRef<str>,
    {
        let edges = edges
            .iter()
            .map(|e| AttributeSet::parse(e.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(edges)
    }

    pub fn nodes(&self) -> &AttributeSet {
        &self.nodes
    }

    pub fn edges(&self) -> &[AttributeSet] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &AttributeSet {
        &self.edges[i]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Twig test for `candidate` within the edge subset `within`.
    ///
    /// `candidate` is a twig iff some other `R_j` in `within` satisfies
    /// `(U(within - {candidate})) ∩ R_candidate = R_j ∩ R_candidate`.
    pub fn is_twig(
        &self,
        candidate: usize,
        within: &[usize],
    ) -> Result<TwigStatus, HypergraphError> {
        if let Some(&bad) = within
            .iter()
            .chain([&candidate])
            .find(|&&i| i >= self.edges.len())
        {
            return Err(HypergraphError::EdgeOutOfRange(bad));
        }
        if !within.contains(&candidate) {
            return Err(HypergraphError::CandidateNotWithin(candidate));
        }
        Ok(self.twig_status(candidate, within))
    }

    fn twig_status(&self, candidate: usize, within: &[usize]) -> TwigStatus {
        let cand = &self.edges[candidate];
        let mut others: Vec<usize> = within.iter().copied().filter(|&i| i != candidate).collect();
        if others.is_empty() {
            return TwigStatus::Sole;
        }
        others.sort_unstable();
        others.dedup();
        let rest = others
            .iter()
            .fold(AttributeSet::new(), |acc, &i| acc.union(&self.edges[i]));
        let shared = rest.intersection(cand);
        others
            .into_iter()
            .find(|&j| self.edges[j].intersection(cand) == shared)
            .map_or(TwigStatus::NotTwig, |branch| TwigStatus::Twig { branch })
    }

    /// Recognizes a hypertree by greedy twig removal.
    ///
    /// At each step the largest-index twig of the remaining edges is removed;
    /// the construction ordering is the reverse of the removal order. When the
    /// input order already is a construction ordering it is returned unchanged.
    pub fn find_certificate(&self) -> Result<HypertreeCertificate, NotHypertree> {
        let mut remaining: Vec<usize> = (0..self.edges.len()).collect();
        let mut removed = Vec::with_capacity(self.edges.len());
        while remaining.len() > 1 {
            let twig = remaining
                .iter()
                .rev()
                .copied()
                .find(|&c| self.twig_status(c, &remaining).is_twig());
            match twig {
                Some(c) => {
                    remaining.retain(|&i| i != c);
                    removed.push(c);
                }
                None => {
                    return Err(NotHypertree {
                        edges: remaining.iter().map(|&i| self.edges[i].clone()).collect(),
                        witness: remaining,
                    })
                }
            }
        }
        removed.extend(remaining);
        removed.reverse();
        Ok(HypertreeCertificate::from_ordering(self, removed)
            .expect("twig removal yields a valid construction ordering"))
    }

    pub fn is_hypertree(&self) -> bool {
        self.find_certificate().is_ok()
    }
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_edges(&self.edges))
    }
}

/// A tree construction ordering plus its branching function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HypertreeCertificate {
    ordering: Vec<usize>,
    branching: Vec<Option<usize>>,
}

impl HypertreeCertificate {
    /// Validates `ordering` against `h` and derives the branching, choosing
    /// the smallest valid branch position for each twig.
    pub fn from_ordering(h: &Hypergraph, ordering: Vec<usize>) -> Result<Self, HypergraphError> {
        check_permutation(h, &ordering)?;
        let mut branching = vec![None; ordering.len()];
        for i in 1..ordering.len() {
            let prefix = &ordering[..=i];
            let cand = h.edge(ordering[i]);
            let rest = prefix[..i]
                .iter()
                .fold(AttributeSet::new(), |acc, &e| acc.union(h.edge(e)));
            let shared = rest.intersection(cand);
            let j = (0..i)
                .find(|&j| h.edge(ordering[j]).intersection(cand) == shared)
                .ok_or_else(|| {
                    HypergraphError::InvalidCertificate(format!(
                        "edge {} at position {} is not a twig of its prefix",
                        cand,
                        i + 1
                    ))
                })?;
            branching[i] = Some(j);
        }
        Ok(HypertreeCertificate {
            ordering,
            branching,
        })
    }

    /// Accepts an explicit branching after checking it against `h`.
    pub fn with_branching(
        h: &Hypergraph,
        ordering: Vec<usize>,
        branching: Vec<Option<usize>>,
    ) -> Result<Self, HypergraphError> {
        let cert = HypertreeCertificate {
            ordering,
            branching,
        };
        cert.validate(h)?;
        Ok(cert)
    }

    /// Replays the twig test over every prefix.
    pub fn validate(&self, h: &Hypergraph) -> Result<(), HypergraphError> {
        check_permutation(h, &self.ordering)?;
        if self.branching.len() != self.ordering.len()
            || self.branching.first().is_some_and(|b| b.is_some())
        {
            return Err(HypergraphError::InvalidCertificate(
                "branching must have one entry per position and none for the first".into(),
            ));
        }
        for i in 1..self.ordering.len() {
            let j = self.branching[i].ok_or_else(|| {
                HypergraphError::InvalidCertificate(format!("position {} has no branch", i + 1))
            })?;
            if j >= i {
                return Err(HypergraphError::InvalidCertificate(format!(
                    "branch position {} must precede position {}",
                    j + 1,
                    i + 1
                )));
            }
            let cand = h.edge(self.ordering[i]);
            let rest = self.ordering[..i]
                .iter()
                .fold(AttributeSet::new(), |acc, &e| acc.union(h.edge(e)));
            if rest.intersection(cand) != h.edge(self.ordering[j]).intersection(cand) {
                return Err(HypergraphError::InvalidCertificate(format!(
                    "edge at position {} is not a branch for position {}",
                    j + 1,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Edge indices in construction order.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    /// `branching()[i]` is the position of the branch of position `i`.
    pub fn branching(&self) -> &[Option<usize>] {
        &self.branching
    }

    /// Branch as an original edge index, for the edge at position `i`.
    pub fn branch_edge(&self, i: usize) -> Option<usize> {
        self.branching[i].map(|j| self.ordering[j])
    }

    pub fn len(&self) -> usize {
        self.ordering.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordering.is_empty()
    }

    /// Edges of `h` in construction order.
    pub fn ordered_edges<'h>(&self, h: &'h Hypergraph) -> Vec<&'h AttributeSet> {
        self.ordering.iter().map(|&i| h.edge(i)).collect()
    }
}

fn check_permutation(h: &Hypergraph, ordering: &[usize]) -> Result<(), HypergraphError> {
    let mut seen = vec![false; h.len()];
    for &i in ordering {
        if i >= h.len() {
            return Err(HypergraphError::EdgeOutOfRange(i));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(HypergraphError::InvalidCertificate(format!(
                "edge {i} repeated in ordering"
            )));
        }
    }
    if ordering.len() != h.len() {
        return Err(HypergraphError::InvalidCertificate(
            "ordering must list every edge exactly once".into(),
        ));
    }
    Ok(())
}

/// Branch/twig intersections `R_{j(i)} ∩ R_i` for `i = 2..N`, in certificate order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSet(Vec<AttributeSet>);

impl InteractionSet {
    pub fn members(&self) -> &[AttributeSet] {
        &self.0
    }

    pub fn as_set(&self) -> BTreeSet<AttributeSet> {
        self.0.iter().cloned().collect()
    }

    /// Sorted copy, for multiset comparison.
    pub fn sorted(&self) -> Vec<AttributeSet> {
        let mut v = self.0.clone();
        v.sort();
        v
    }
}

pub fn interaction_set(
    cert: &HypertreeCertificate,
    h: &Hypergraph,
) -> Result<InteractionSet, HypergraphError> {
    cert.validate(h)?;
    let members = (1..cert.len())
        .map(|i| {
            let twig = h.edge(cert.ordering[i]);
            let branch = h.edge(cert.branch_edge(i).expect("validated"));
            branch.intersection(twig)
        })
        .collect();
    Ok(InteractionSet(members))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> AttributeSet {
        AttributeSet::parse(names).unwrap()
    }

    fn four_edge_tree() -> Hypergraph {
        Hypergraph::from_names(&[
            vec!["A1", "A2", "A3"],
            vec!["A1", "A2", "A4"],
            vec!["A2", "A3", "A5"],
            vec!["A5", "A6"],
        ])
        .unwrap()
    }

    fn triangle() -> Hypergraph {
        Hypergraph::from_names(&[vec!["A", "B"], vec!["B", "C"], vec!["C", "A"]]).unwrap()
    }

    #[test]
    fn natural_attribute_order() {
        let mut v: Vec<Attribute> = ["A10", "A2", "A1", "B", "A02"]
            .iter()
            .map(|n| Attribute::new(n).unwrap())
            .collect();
        v.sort();
        let names: Vec<&str> = v.iter().map(|a| a.name()).collect();
        assert_eq!(names, ["A1", "A02", "A2", "A10", "B"]);
    }

    #[test]
    fn bad_names_rejected() {
        assert!(Attribute::new("").is_err());
        assert!(Attribute::new("A B").is_err());
        assert!(Attribute::new("{A").is_err());
    }

    #[test]
    fn last_edge_is_twig_with_smallest_branch() {
        let h = four_edge_tree();
        let st = h.is_twig(3, &[0, 1, 2, 3]).unwrap();
        assert_eq!(st, TwigStatus::Twig { branch: 2 });
        assert_eq!(h.edge(2), &set(&["A2", "A3", "A5"]));
    }

    #[test]
    fn sole_edge_is_twig() {
        let h = Hypergraph::from_names(&[vec!["A", "B"]]).unwrap();
        assert_eq!(h.is_twig(0, &[0]).unwrap(), TwigStatus::Sole);
    }

    #[test]
    fn triangle_edge_is_not_twig() {
        assert_eq!(
            triangle().is_twig(0, &[0, 1, 2]).unwrap(),
            TwigStatus::NotTwig
        );
    }

    #[test]
    fn twig_usage_errors() {
        let h = triangle();
        assert_eq!(
            h.is_twig(0, &[1, 2]),
            Err(HypergraphError::CandidateNotWithin(0))
        );
        assert_eq!(h.is_twig(7, &[7]), Err(HypergraphError::EdgeOutOfRange(7)));
    }

    #[test]
    fn triangle_is_not_a_hypertree() {
        let err = triangle().find_certificate().unwrap_err();
        assert_eq!(err.witness, vec![0, 1, 2]);
        assert_eq!(
            err.to_string(),
            "not a hypertree: no twig among edges {A B} {B C} {A C}"
        );
    }

    #[test]
    fn single_edge_certificate_is_trivial() {
        let h = Hypergraph::from_names(&[vec!["A", "B"]]).unwrap();
        let c = h.find_certificate().unwrap();
        assert_eq!(c.ordering(), &[0]);
        assert_eq!(c.branching(), &[None]);
        assert!(interaction_set(&c, &h).unwrap().members().is_empty());
    }

    #[test]
    fn alternate_ordering_is_a_valid_certificate() {
        let h = four_edge_tree();
        // R3, R1, R2, R4 with branching R1 -> R3, R2 -> R1, R4 -> R3.
        let c = HypertreeCertificate::from_ordering(&h, vec![2, 0, 1, 3]).unwrap();
        assert_eq!(c.branching(), &[None, Some(0), Some(1), Some(0)]);
        assert_eq!(c.branch_edge(1), Some(2));
        assert_eq!(c.branch_edge(2), Some(0));
        assert_eq!(c.branch_edge(3), Some(2));
        let l = interaction_set(&c, &h).unwrap();
        assert_eq!(
            l.members(),
            &[set(&["A2", "A3"]), set(&["A1", "A2"]), set(&["A5"])]
        );
    }

    #[test]
    fn greedy_certificate_keeps_input_order_when_valid() {
        let h = four_edge_tree();
        let c = h.find_certificate().unwrap();
        assert_eq!(c.ordering(), &[0, 1, 2, 3]);
        c.validate(&h).unwrap();
        let alt = HypertreeCertificate::from_ordering(&h, vec![2, 0, 1, 3]).unwrap();
        assert_eq!(
            interaction_set(&c, &h).unwrap().as_set(),
            interaction_set(&alt, &h).unwrap().as_set()
        );
    }

    #[test]
    fn chain_interaction_set() {
        let h = Hypergraph::from_names(&[vec!["A1", "A2"], vec!["A2", "A3"], vec!["A3", "A4"]])
            .unwrap();
        let c = h.find_certificate().unwrap();
        assert_eq!(c.ordering(), &[0, 1, 2]);
        assert_eq!(
            interaction_set(&c, &h).unwrap().members(),
            &[set(&["A2"]), set(&["A3"])]
        );
    }

    #[test]
    fn greedy_recovers_from_bad_input_order() {
        // {AB, CD, BC}: AB then CD is a valid prefix but cannot be extended
        // when built forwards; removal from the back still succeeds.
        let h = Hypergraph::from_names(&[vec!["A", "B"], vec!["C", "D"], vec!["B", "C"]]).unwrap();
        let c = h.find_certificate().unwrap();
        c.validate(&h).unwrap();
    }

    #[test]
    fn invalid_certificates_rejected() {
        let h = four_edge_tree();
        assert!(HypertreeCertificate::from_ordering(&h, vec![0, 3, 1, 2]).is_err());
        assert!(HypertreeCertificate::from_ordering(&h, vec![0, 1, 2]).is_err());
        assert!(HypertreeCertificate::from_ordering(&h, vec![0, 0, 1, 2]).is_err());
        assert!(HypertreeCertificate::with_branching(
            &h,
            vec![0, 1, 2, 3],
            vec![None, Some(0), Some(1), Some(2)]
        )
        .is_err());
        assert!(HypertreeCertificate::with_branching(
            &h,
            vec![0, 1, 2, 3],
            vec![None, Some(0), Some(0), Some(2)]
        )
        .is_ok());
        let bad = HypertreeCertificate::with_branching(
            &h,
            vec![0, 1, 2, 3],
            vec![None, Some(0), Some(0), Some(2)],
        )
        .unwrap();
        assert!(interaction_set(&bad, &triangle()).is_err());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Hypergraph::new(vec![]), Err(HypergraphError::NoEdges));
        assert!(matches!(
            Hypergraph::from_names(&[vec!["A"], vec!["A"]]),
            Err(HypergraphError::DuplicateEdge {
                first: 0,
                second: 1,
                ..
            })
        ));
        assert!(matches!(
            Hypergraph::with_nodes(set(&["A", "B"]), vec![set(&["A"])]),
            Err(HypergraphError::UncoveredNode(_))
        ));
        assert!(matches!(
            Hypergraph::with_nodes(set(&["A"]), vec![set(&["A", "B"])]),
            Err(HypergraphError::EdgeOutsideNodes { .. })
        ));
    }

    #[test]
    fn contained_edge_is_a_twig() {
        let h = Hypergraph::from_names(&[vec!["A", "B", "C"], vec!["B"]]).unwrap();
        assert_eq!(
            h.is_twig(1, &[0, 1]).unwrap(),
            TwigStatus::Twig { branch: 0 }
        );
        assert!(h.is_hypertree());
    }
}
