//! Weighted relations and the marginalize/product-join algebra.
//!
//! A [`WeightedRelation`] is a finite table of tuples over an attribute set
//! with one nonnegative weight per tuple. Absent tuples have weight zero.
//! Values are domain indices; [`DomainSpec`] carries the labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::hypergraph::{
    Attribute, AttributeSet, Hypergraph, HypergraphError, HypertreeCertificate, InteractionSet,
    NotHypertree,
};

/// Index of a value within an attribute's domain.
pub type Value = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelationError {
    #[error("{sub} is not a subset of the scheme {scheme}")]
    NotSubset {
        sub: AttributeSet,
        scheme: AttributeSet,
    },
    #[error("scheme mismatch: expected {expected}, found {found}")]
    SchemeMismatch {
        expected: AttributeSet,
        found: AttributeSet,
    },
    #[error("edges {x} and {y} do not cover the scheme {scheme}")]
    Coverage {
        x: AttributeSet,
        y: AttributeSet,
        scheme: AttributeSet,
    },
    #[error("tuple has {found} values but the scheme has {expected} attributes")]
    Arity { expected: usize, found: usize },
    #[error("weight {0} is not a finite nonnegative number")]
    BadWeight(f64),
    #[error("duplicate tuple {0:?}")]
    DuplicateTuple(Vec<Value>),
    #[error("attribute {0} has no declared domain")]
    MissingDomain(Attribute),
    #[error("domain of {0} must be nonempty with unique labels")]
    BadDomain(Attribute),
    #[error("unknown value {label:?} for attribute {attr}")]
    UnknownValue { attr: Attribute, label: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    NotHypertree(#[from] NotHypertree),
}

/// Finite value domain per attribute.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainSpec {
    domains: BTreeMap<Attribute, Vec<String>>,
}

impl DomainSpec {
    pub const DEFAULT_SIZE: usize = 2;

    /// Every attribute of `attrs` gets the domain `0..size`.
    pub fn uniform(attrs: &AttributeSet, size: usize) -> Self {
        let mut d = DomainSpec::default();
        for a in attrs {
            d.set_size(a.clone(), size);
        }
        d
    }

    pub fn binary(attrs: &AttributeSet) -> Self {
        Self::uniform(attrs, Self::DEFAULT_SIZE)
    }

    /// Domain labelled `"0".."size-1"`.
    pub fn set_size(&mut self, attr: Attribute, size: usize) {
        self.domains
            .insert(attr, (0..size).map(|v| v.to_string()).collect());
    }

    pub fn set_labels(
        &mut self,
        attr: Attribute,
        labels: Vec<String>,
    ) -> Result<(), RelationError> {
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if labels.is_empty() || seen.len() != labels.len() {
            return Err(RelationError::BadDomain(attr));
        }
        self.domains.insert(attr, labels);
        Ok(())
    }

    pub fn attributes(&self) -> AttributeSet {
        self.domains.keys().cloned().collect()
    }

    pub fn size(&self, attr: &Attribute) -> Option<usize> {
        self.domains.get(attr).map(Vec::len)
    }

    pub fn labels(&self, attr: &Attribute) -> Option<&[String]> {
        self.domains.get(attr).map(Vec::as_slice)
    }

    pub fn label(&self, attr: &Attribute, v: Value) -> Option<&str> {
        self.domains.get(attr)?.get(v as usize).map(String::as_str)
    }

    pub fn value_of(&self, attr: &Attribute, label: &str) -> Option<Value> {
        self.domains
            .get(attr)?
            .iter()
            .position(|l| l == label)
            .map(|i| i as Value)
    }

    /// Number of tuples over `scheme`; `None` on overflow.
    pub fn cells(&self, scheme: &AttributeSet) -> Result<Option<usize>, RelationError> {
        let mut n: usize = 1;
        for a in scheme {
            let s = self
                .size(a)
                .ok_or_else(|| RelationError::MissingDomain(a.clone()))?;
            match n.checked_mul(s) {
                Some(m) => n = m,
                None => return Ok(None),
            }
        }
        Ok(Some(n))
    }

    /// All tuples over `scheme` in lexicographic order.
    pub fn tuples(&self, scheme: &AttributeSet) -> Result<Vec<Vec<Value>>, RelationError> {
        let sizes = scheme
            .iter()
            .map(|a| {
                self.size(a)
                    .ok_or_else(|| RelationError::MissingDomain(a.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = vec![Vec::with_capacity(sizes.len())];
        for &s in &sizes {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..s as Value).map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

/// A weighted relation: tuples over `scheme` (values in scheme order) to weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRelation {
    scheme: AttributeSet,
    rows: BTreeMap<Vec<Value>, f64>,
}

fn check_weight(w: f64) -> Result<(), RelationError> {
    if w.is_finite() && w >= 0.0 {
        Ok(())
    } else {
        Err(RelationError::BadWeight(w))
    }
}

impl WeightedRelation {
    pub fn empty(scheme: AttributeSet) -> Self {
        WeightedRelation {
            scheme,
            rows: BTreeMap::new(),
        }
    }

    pub fn from_rows<I>(scheme: AttributeSet, rows: I) -> Result<Self, RelationError>
    where
        I: IntoIterator<Item = (Vec<Value>, f64)>,
    {
        let mut rel = Self::empty(scheme);
        for (t, w) in rows {
            rel.insert(t, w)?;
        }
        Ok(rel)
    }

    /// Dense relation over the declared domains with weights from `f`.
    pub fn dense(
        scheme: AttributeSet,
        domains: &DomainSpec,
        mut f: impl FnMut(&[Value]) -> f64,
    ) -> Result<Self, RelationError> {
        let tuples = domains.tuples(&scheme)?;
        let mut rows = BTreeMap::new();
        for t in tuples {
            let w = f(&t);
            check_weight(w)?;
            rows.insert(t, w);
        }
        Ok(WeightedRelation { scheme, rows })
    }

    /// Weight 1 on every tuple over the scheme.
    pub fn unit(scheme: AttributeSet, domains: &DomainSpec) -> Result<Self, RelationError> {
        Self::dense(scheme, domains, |_| 1.0)
    }

    pub fn insert(&mut self, tuple: Vec<Value>, weight: f64) -> Result<(), RelationError> {
        if tuple.len() != self.scheme.len() {
            return Err(RelationError::Arity {
                expected: self.scheme.len(),
                found: tuple.len(),
            });
        }
        check_weight(weight)?;
        if self.rows.contains_key(&tuple) {
            return Err(RelationError::DuplicateTuple(tuple));
        }
        self.rows.insert(tuple, weight);
        Ok(())
    }

    pub fn scheme(&self) -> &AttributeSet {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Value], f64)> + '_ {
        self.rows.iter().map(|(t, &w)| (t.as_slice(), w))
    }

    /// Weight at `tuple`; zero when absent.
    pub fn weight(&self, tuple: &[Value]) -> f64 {
        self.rows.get(tuple).copied().unwrap_or(0.0)
    }

    pub fn get(&self, tuple: &[Value]) -> Option<f64> {
        self.rows.get(tuple).copied()
    }

    pub fn total(&self) -> f64 {
        self.rows.values().sum()
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.rows.values().copied().reduce(f64::min)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total() - 1.0).abs() <= tol
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.rows.values().all(|&w| w > 0.0)
    }

    pub fn normalized(&self) -> Self {
        let z = self.total();
        self.map_weights(|w| w / z)
    }

    pub fn map_weights(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        WeightedRelation {
            scheme: self.scheme.clone(),
            rows: self.rows.iter().map(|(t, &w)| (t.clone(), f(w))).collect(),
        }
    }

    /// Drops tuples with weight zero.
    pub fn support(&self) -> Self {
        WeightedRelation {
            scheme: self.scheme.clone(),
            rows: self
                .rows
                .iter()
                .filter(|(_, &w)| w != 0.0)
                .map(|(t, &w)| (t.clone(), w))
                .collect(),
        }
    }

    /// Largest pointwise difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &WeightedRelation) -> Result<f64, RelationError> {
        self.expect_scheme(&other.scheme)?;
        let a = self.rows.iter().map(|(t, &w)| (w - other.weight(t)).abs());
        let b = other
            .rows
            .iter()
            .filter(|(t, _)| !self.rows.contains_key(*t))
            .map(|(_, &w)| w.abs());
        Ok(a.chain(b).fold(0.0, f64::max))
    }

    fn expect_scheme(&self, scheme: &AttributeSet) -> Result<(), RelationError> {
        if &self.scheme != scheme {
            return Err(RelationError::SchemeMismatch {
                expected: scheme.clone(),
                found: self.scheme.clone(),
            });
        }
        Ok(())
    }

    fn positions(&self, sub: &AttributeSet) -> Result<Vec<usize>, RelationError> {
        self.scheme
            .positions_of(sub)
            .ok_or_else(|| RelationError::NotSubset {
                sub: sub.clone(),
                scheme: self.scheme.clone(),
            })
    }

    /// Sums weights over the attributes outside `onto`.
    pub fn marginalize(&self, onto: &AttributeSet) -> Result<WeightedRelation, RelationError> {
        let pos = self.positions(onto)?;
        let mut rows: BTreeMap<Vec<Value>, f64> = BTreeMap::new();
        for (t, &w) in &self.rows {
            let key: Vec<Value> = pos.iter().map(|&p| t[p]).collect();
            *rows.entry(key).or_insert(0.0) += w;
        }
        Ok(WeightedRelation {
            scheme: onto.clone(),
            rows,
        })
    }

    /// Natural join with pointwise product of weights.
    pub fn product_join(&self, other: &WeightedRelation) -> WeightedRelation {
        let scheme = self.scheme.union(&other.scheme);
        let common = self.scheme.intersection(&other.scheme);
        let lp = self.scheme.positions_of(&common).expect("subset");
        let rp = other.scheme.positions_of(&common).expect("subset");
        // For each output attribute: take it from the left (true) or right (false).
        let sources: Vec<(bool, usize)> = scheme
            .iter()
            .map(|a| match self.scheme.position(a) {
                Some(p) => (true, p),
                None => (false, other.scheme.position(a).expect("in union")),
            })
            .collect();

        let mut index: HashMap<Vec<Value>, Vec<(&Vec<Value>, f64)>> = HashMap::new();
        for (t, &w) in &other.rows {
            let key: Vec<Value> = rp.iter().map(|&p| t[p]).collect();
            index.entry(key).or_default().push((t, w));
        }
        let mut rows = BTreeMap::new();
        for (lt, &lw) in &self.rows {
            let key: Vec<Value> = lp.iter().map(|&p| lt[p]).collect();
            if let Some(matches) = index.get(&key) {
                for &(rt, rw) in matches {
                    let t: Vec<Value> = sources
                        .iter()
                        .map(|&(left, p)| if left { lt[p] } else { rt[p] })
                        .collect();
                    rows.insert(t, lw * rw);
                }
            }
        }
        WeightedRelation { scheme, rows }
    }

    /// Reciprocal weights; zero-weight tuples are dropped.
    pub fn inverse(&self) -> WeightedRelation {
        WeightedRelation {
            scheme: self.scheme.clone(),
            rows: self
                .rows
                .iter()
                .filter(|(_, &w)| w != 0.0)
                .map(|(t, &w)| (t.clone(), 1.0 / w))
                .collect(),
        }
    }

    /// `self ⊗ other = self × other × (other↓(X∩Y))^-1`.
    ///
    /// The intersection marginal is taken from `other`. Tuples whose
    /// intersection marginal is zero are dropped.
    pub fn monotone_join(&self, other: &WeightedRelation) -> WeightedRelation {
        let common = self.scheme.intersection(&other.scheme);
        let sep = other
            .marginalize(&common)
            .expect("intersection is a subset");
        self.product_join(other).product_join(&sep.inverse())
    }

    /// Renders the relation as text: a header of attribute names plus `f`,
    /// then one tuple per line with the weight in 17 significant digits.
    pub fn to_text(&self, domains: &DomainSpec) -> String {
        let attrs = self.scheme.to_vec();
        let mut out = String::new();
        for a in &attrs {
            let _ = write!(out, "{a} ");
        }
        out.push_str("f\n");
        for (t, &w) in &self.rows {
            for (a, &v) in attrs.iter().zip(t) {
                match domains.label(a, v) {
                    Some(l) => out.push_str(l),
                    None => {
                        let _ = write!(out, "{v}");
                    }
                }
                out.push(' ');
            }
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format.
    pub fn from_text(text: &str, domains: &DomainSpec) -> Result<Self, RelationError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(RelationError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let mut names: Vec<&str> = header.split_whitespace().collect();
        if names.pop() != Some("f") {
            return Err(RelationError::Parse {
                line: hline,
                msg: "header must end with `f`".into(),
            });
        }
        let attrs = names
            .iter()
            .map(Attribute::new)
            .collect::<Result<Vec<_>, _>>()?;
        let scheme: AttributeSet = attrs.iter().cloned().collect();
        if scheme.len() != attrs.len() {
            return Err(RelationError::Parse {
                line: hline,
                msg: "duplicate attribute in header".into(),
            });
        }
        // Header order may differ from scheme order.
        let perm: Vec<usize> = scheme
            .iter()
            .map(|a| attrs.iter().position(|b| b == a).expect("same set"))
            .collect();
        let mut rel = WeightedRelation::empty(scheme);
        for (line, text) in lines {
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields.len() != attrs.len() + 1 {
                return Err(RelationError::Parse {
                    line,
                    msg: format!("expected {} fields", attrs.len() + 1),
                });
            }
            let raw = attrs
                .iter()
                .zip(&fields)
                .map(|(a, l)| {
                    domains
                        .value_of(a, l)
                        .ok_or_else(|| RelationError::UnknownValue {
                            attr: a.clone(),
                            label: l.to_string(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let w: f64 = fields[attrs.len()]
                .parse()
                .map_err(|_| RelationError::Parse {
                    line,
                    msg: format!("bad weight {:?}", fields[attrs.len()]),
                })?;
            let tuple = perm.iter().map(|&p| raw[p]).collect();
            rel.insert(tuple, w).map_err(|e| match e {
                RelationError::DuplicateTuple(_) | RelationError::BadWeight(_) => {
                    RelationError::Parse {
                        line,
                        msg: e.to_string(),
                    }
                }
                other => other,
            })?;
        }
        Ok(rel)
    }
}

impl fmt::Display for WeightedRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&DomainSpec::default()))
    }
}

/// A generalized acyclic join dependency `⊗R` over a hypertree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gajd {
    edges: Hypergraph,
    certificate: HypertreeCertificate,
}

impl Gajd {
    /// Fails with the twig-removal witness when `edges` is not a hypertree.
    pub fn new(edges: Hypergraph) -> Result<Self, NotHypertree> {
        let certificate = edges.find_certificate()?;
        Ok(Gajd { edges, certificate })
    }

    pub fn with_certificate(
        edges: Hypergraph,
        certificate: HypertreeCertificate,
    ) -> Result<Self, HypergraphError> {
        certificate.validate(&edges)?;
        Ok(Gajd { edges, certificate })
    }

    /// Convenience: `Gajd::from_names(&[vec!["A","B"], vec!["B","C"]])`.
    pub fn from_names<E, S>(edges: &[E]) -> Result<Self, RelationError>
    where
        E: AsRef<[S]>,
        S: AsRef<str>,
    {
        Ok(Gajd::new(Hypergraph::from_names(edges)?)?)
    }

    pub fn scheme(&self) -> &AttributeSet {
        self.edges.nodes()
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.edges
    }

    pub fn certificate(&self) -> &HypertreeCertificate {
        &self.certificate
    }

    /// Edges in construction order.
    pub fn ordered_edges(&self) -> Vec<&AttributeSet> {
        self.certificate.ordered_edges(&self.edges)
    }

    pub fn interaction_set(&self) -> InteractionSet {
        crate::hypergraph::interaction_set(&self.certificate, &self.edges).expect("validated")
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Renders as `(x){A1 A2} {A2 A3}` in input edge order.
impl fmt::Display for Gajd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x){}", self.edges)
    }
}

/// The marginalize-product-join mapping: left fold of `⊗` over the
/// marginals of `rel` in the certificate's construction order.
pub fn mpj_map(rel: &WeightedRelation, g: &Gajd) -> Result<WeightedRelation, RelationError> {
    rel.expect_scheme(g.scheme())?;
    let mut edges = g.ordered_edges().into_iter();
    let first = edges.next().expect("nonempty hypergraph");
    let mut acc = rel.marginalize(first)?;
    for e in edges {
        acc = acc.monotone_join(&rel.marginalize(e)?);
    }
    Ok(acc)
}

/// Satisfaction check: `(holds, max |rel - mpj_map(rel, g)|)`.
pub fn satisfies(rel: &WeightedRelation, g: &Gajd, tol: f64) -> Result<(bool, f64), RelationError> {
    let residual = mpj_map(rel, g)?.max_abs_diff(rel)?;
    Ok((residual <= tol, residual))
}

/// Residual of the conditional independence of `x` and `y` given `x ∩ y`.
pub fn ci_residual(
    rel: &WeightedRelation,
    x: &AttributeSet,
    y: &AttributeSet,
) -> Result<f64, RelationError> {
    if &x.union(y) != rel.scheme() {
        return Err(RelationError::Coverage {
            x: x.clone(),
            y: y.clone(),
            scheme: rel.scheme().clone(),
        });
    }
    let edges = if x == y {
        vec![x.clone()]
    } else {
        vec![x.clone(), y.clone()]
    };
    let g = Gajd::new(Hypergraph::new(edges)?)?;
    Ok(satisfies(rel, &g, 0.0)?.1)
}
