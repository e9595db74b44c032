//! Symbolic marginal expressions attached to tableau rows.
//!
//! An atom `phi(v1,...,vk)` names the marginal of the joint over the columns
//! its variables occupy, evaluated at the values bound to those variables.
//! Row weights are monomials: a multiset of atoms over a multiset of atoms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::hypergraph::{Attribute, AttributeSet};
use crate::prelation::{Value, WeightedRelation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolicError {
    #[error("{to} is not a subset of the atom's attributes {from}")]
    NotSubset {
        from: AttributeSet,
        to: AttributeSet,
    },
    #[error("variable {0} is unbound")]
    Unbound(Variable),
    #[error("atom over {atom} is outside the joint's scheme {scheme}")]
    OutsideScheme {
        atom: AttributeSet,
        scheme: AttributeSet,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Distinguished,
    Nondistinguished,
}

/// A tableau variable. Distinguished variables print as `a<i>`, the others as
/// `b<k>`; each lives in exactly one column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub kind: VarKind,
    pub index: u32,
    pub column: Attribute,
}

impl Variable {
    pub fn distinguished(index: u32, column: Attribute) -> Self {
        Variable {
            kind: VarKind::Distinguished,
            index,
            column,
        }
    }

    pub fn nondistinguished(index: u32, column: Attribute) -> Self {
        Variable {
            kind: VarKind::Nondistinguished,
            index,
            column,
        }
    }

    pub fn is_distinguished(&self) -> bool {
        self.kind == VarKind::Distinguished
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.kind {
            VarKind::Distinguished => 'a',
            VarKind::Nondistinguished => 'b',
        };
        write!(f, "{p}{}", self.index)
    }
}

/// Variable assignment used for evaluation.
pub type Binding = HashMap<Variable, Value>;

/// `phi` over a set of columns, each holding one variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarginalAtom {
    cells: BTreeMap<Attribute, Variable>,
}

impl MarginalAtom {
    /// Builds an atom from variables; the column of each variable is its key.
    pub fn new(vars: impl IntoIterator<Item = Variable>) -> Self {
        MarginalAtom {
            cells: vars.into_iter().map(|v| (v.column.clone(), v)).collect(),
        }
    }

    pub fn over(&self) -> AttributeSet {
        self.cells.keys().cloned().collect()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> + '_ {
        self.cells.values()
    }

    pub fn get(&self, column: &Attribute) -> Option<&Variable> {
        self.cells.get(column)
    }

    pub fn contains(&self, v: &Variable) -> bool {
        self.cells.get(&v.column) == Some(v)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_distinguished(&self) -> bool {
        self.cells.values().all(Variable::is_distinguished)
    }
}

/// Ordered by attribute set first, then by the variables in column order.
impl Ord for MarginalAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cells
            .keys()
            .cmp(other.cells.keys())
            .then_with(|| self.cells.values().cmp(other.cells.values()))
    }
}

impl PartialOrd for MarginalAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MarginalAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("phi(")?;
        for (i, v) in self.cells.values().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Keeps the columns of `atom` that lie in `to`.
pub fn restrict_atom(
    atom: &MarginalAtom,
    to: &AttributeSet,
) -> Result<MarginalAtom, SymbolicError> {
    let from = atom.over();
    if !to.is_subset(&from) {
        return Err(SymbolicError::NotSubset {
            from,
            to: to.clone(),
        });
    }
    Ok(MarginalAtom {
        cells: atom
            .cells
            .iter()
            .filter(|(a, _)| to.contains(a))
            .map(|(a, v)| (a.clone(), v.clone()))
            .collect(),
    })
}

/// A quotient of atom multisets, kept sorted with common atoms cancelled.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalExpression {
    numerator: Vec<MarginalAtom>,
    denominator: Vec<MarginalAtom>,
}

impl RationalExpression {
    /// The empty expression, `1`.
    pub fn one() -> Self {
        Self::default()
    }

    pub fn atom(atom: MarginalAtom) -> Self {
        RationalExpression {
            numerator: vec![atom],
            denominator: Vec::new(),
        }
    }

    pub fn new(numerator: Vec<MarginalAtom>, denominator: Vec<MarginalAtom>) -> Self {
        let mut e = RationalExpression {
            numerator,
            denominator,
        };
        e.canonicalize();
        e
    }

    pub fn numerator(&self) -> &[MarginalAtom] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[MarginalAtom] {
        &self.denominator
    }

    pub fn is_one(&self) -> bool {
        self.numerator.is_empty() && self.denominator.is_empty()
    }

    pub fn inverse(&self) -> Self {
        RationalExpression {
            numerator: self.denominator.clone(),
            denominator: self.numerator.clone(),
        }
    }

    /// True when every atom mentions only distinguished variables.
    pub fn is_distinguished(&self) -> bool {
        self.atoms().all(MarginalAtom::is_distinguished)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &MarginalAtom> + '_ {
        self.numerator.iter().chain(&self.denominator)
    }

    fn canonicalize(&mut self) {
        self.numerator.sort();
        self.denominator.sort();
        let (mut n, mut d) = (Vec::new(), Vec::new());
        let (mut i, mut j) = (0, 0);
        while i < self.numerator.len() && j < self.denominator.len() {
            match self.numerator[i].cmp(&self.denominator[j]) {
                Ordering::Less => {
                    n.push(self.numerator[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    d.push(self.denominator[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        n.extend_from_slice(&self.numerator[i..]);
        d.extend_from_slice(&self.denominator[j..]);
        self.numerator = n;
        self.denominator = d;
    }
}

pub fn multiply(a: &RationalExpression, b: &RationalExpression) -> RationalExpression {
    RationalExpression::new(
        a.numerator.iter().chain(&b.numerator).cloned().collect(),
        a.denominator
            .iter()
            .chain(&b.denominator)
            .cloned()
            .collect(),
    )
}

impl fmt::Display for RationalExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn product(f: &mut fmt::Formatter<'_>, atoms: &[MarginalAtom]) -> fmt::Result {
            for (i, a) in atoms.iter().enumerate() {
                if i > 0 {
                    f.write_str("*")?;
                }
                write!(f, "{a}")?;
            }
            Ok(())
        }
        if self.numerator.is_empty() {
            f.write_str("1")?;
        } else {
            product(f, &self.numerator)?;
        }
        match self.denominator.len() {
            0 => Ok(()),
            1 => write!(f, "/{}", self.denominator[0]),
            _ => {
                f.write_str("/(")?;
                product(f, &self.denominator)?;
                f.write_str(")")
            }
        }
    }
}

/// The row-combination formula: `prod phi(w_ki[Q_i]) / prod phi(w[Q_j(i) & Q_i])`.
///
/// `parts` pairs each selected row's pattern restricted to `Q_i`; `separators`
/// are the branch/twig intersections of the rule's certificate, and `new_row`
/// supplies the variables for the denominators.
pub fn join_expression(
    parts: &[MarginalAtom],
    new_row: &MarginalAtom,
    separators: &[AttributeSet],
) -> Result<RationalExpression, SymbolicError> {
    let denominator = separators
        .iter()
        .map(|s| restrict_atom(new_row, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalExpression::new(parts.to_vec(), denominator))
}

/// One step of summing a row expression down to a sub-scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rewrite {
    /// `variable` occurred in a single numerator atom, which was marginalized.
    Restricted {
        variable: Variable,
        from: MarginalAtom,
        to: MarginalAtom,
    },
    /// No closed form: the whole factor became the raw atom.
    Fallback {
        variable: Variable,
        atom: MarginalAtom,
    },
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rewrite::Restricted { variable, from, to } => {
                write!(f, "sum {variable}: {from} -> {to}")
            }
            Rewrite::Fallback { variable, atom } => {
                write!(f, "sum {variable}: no closed form, use {atom}")
            }
        }
    }
}

/// Sums `expr`, the weight of a row with cells `row`, over every column
/// outside `onto`.
///
/// A summed variable that occurs in exactly one numerator atom, once, and in
/// no denominator atom is summed out of that atom. If some variable does not
/// qualify, the result is the raw atom `phi(row[onto])`. Either way the
/// steps are returned.
pub fn marginalize_expression(
    expr: &RationalExpression,
    row: &MarginalAtom,
    onto: &AttributeSet,
) -> Result<(RationalExpression, Vec<Rewrite>), SymbolicError> {
    let raw = restrict_atom(row, onto)?;
    let mut current = expr.clone();
    let mut log = Vec::new();
    for (col, v) in &row.cells {
        if onto.contains(col) {
            continue;
        }
        let in_den = current.denominator.iter().any(|a| a.contains(v));
        let hits: Vec<usize> = (0..current.numerator.len())
            .filter(|&i| current.numerator[i].contains(v))
            .collect();
        if in_den || hits.len() != 1 {
            log.push(Rewrite::Fallback {
                variable: v.clone(),
                atom: raw.clone(),
            });
            return Ok((RationalExpression::atom(raw), log));
        }
        let from = current.numerator[hits[0]].clone();
        let mut to = from.clone();
        to.cells.remove(col);
        log.push(Rewrite::Restricted {
            variable: v.clone(),
            from,
            to: to.clone(),
        });
        current.numerator[hits[0]] = to;
        current.canonicalize();
    }
    Ok((current, log))
}

/// Result of evaluating an expression under a binding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Some denominator atom was zero; `value` is then reported as 0.
    pub zero_denominator: bool,
}

/// Evaluates atoms against a fixed joint, caching marginals.
#[derive(Debug)]
pub struct Evaluator<'a> {
    joint: &'a WeightedRelation,
    marginals: HashMap<AttributeSet, WeightedRelation>,
}

impl<'a> Evaluator<'a> {
    pub fn new(joint: &'a WeightedRelation) -> Self {
        Evaluator {
            joint,
            marginals: HashMap::new(),
        }
    }

    pub fn joint(&self) -> &WeightedRelation {
        self.joint
    }

    pub fn atom(&mut self, atom: &MarginalAtom, binding: &Binding) -> Result<f64, SymbolicError> {
        let over = atom.over();
        let tuple = atom
            .variables()
            .map(|v| {
                binding
                    .get(v)
                    .copied()
                    .ok_or_else(|| SymbolicError::Unbound(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !self.marginals.contains_key(&over) {
            let m = self
                .joint
                .marginalize(&over)
                .map_err(|_| SymbolicError::OutsideScheme {
                    atom: over.clone(),
                    scheme: self.joint.scheme().clone(),
                })?;
            self.marginals.insert(over.clone(), m);
        }
        Ok(self.marginals[&over].weight(&tuple))
    }

    pub fn evaluate(
        &mut self,
        expr: &RationalExpression,
        binding: &Binding,
    ) -> Result<Evaluation, SymbolicError> {
        let mut num = 1.0;
        for a in &expr.numerator {
            num *= self.atom(a, binding)?;
        }
        let mut den = 1.0;
        for a in &expr.denominator {
            den *= self.atom(a, binding)?;
        }
        if den == 0.0 {
            return Ok(Evaluation {
                value: 0.0,
                zero_denominator: true,
            });
        }
        Ok(Evaluation {
            value: num / den,
            zero_denominator: false,
        })
    }
}

/// One-shot evaluation; see [`Evaluator`] for repeated use.
pub fn evaluate(
    expr: &RationalExpression,
    joint: &WeightedRelation,
    binding: &Binding,
) -> Result<Evaluation, SymbolicError> {
    Evaluator::new(joint).evaluate(expr, binding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prelation::DomainSpec;

    fn attr(n: usize) -> Attribute {
        Attribute::new(format!("A{n}")).unwrap()
    }

    fn a(i: u32) -> Variable {
        Variable::distinguished(i, attr(i as usize))
    }

    fn b(k: u32, col: usize) -> Variable {
        Variable::nondistinguished(k, attr(col))
    }

    fn phi(vars: &[Variable]) -> MarginalAtom {
        MarginalAtom::new(vars.iter().cloned())
    }

    fn set(cols: &[usize]) -> AttributeSet {
        cols.iter().map(|&c| attr(c)).collect()
    }

    #[test]
    fn printing() {
        assert_eq!(RationalExpression::one().to_string(), "1");
        assert_eq!(phi(&[]).to_string(), "phi()");
        let e = RationalExpression::new(
            vec![phi(&[a(2), a(3)]), phi(&[a(1), a(2)])],
            vec![phi(&[a(2)])],
        );
        assert_eq!(e.to_string(), "phi(a1,a2)*phi(a2,a3)/phi(a2)");
        let e = RationalExpression::new(vec![], vec![phi(&[a(3)]), phi(&[a(2)])]);
        assert_eq!(e.to_string(), "1/(phi(a2)*phi(a3))");
        let e = RationalExpression::atom(phi(&[a(1), a(2), b(1, 3), b(2, 4)]));
        assert_eq!(e.to_string(), "phi(a1,a2,b1,b2)");
    }

    #[test]
    fn atom_order_is_by_columns_then_variables() {
        assert!(phi(&[a(1), a(2)]) < phi(&[a(2)]));
        assert!(phi(&[a(2)]) < phi(&[a(2), a(3)]));
        assert!(phi(&[a(1)]) < phi(&[b(1, 1)]));
        assert!(phi(&[b(1, 1)]) < phi(&[b(2, 1)]));
        assert!(phi(&[b(9, 1), b(9, 2)]) < phi(&[a(1), a(3)]));
    }

    #[test]
    fn multiply_examples() {
        let x = RationalExpression::new(vec![phi(&[a(1), a(2)])], vec![phi(&[a(2)])]);
        assert_eq!(multiply(&x, &RationalExpression::one()), x);
        let y = RationalExpression::atom(phi(&[a(2), a(3)]));
        assert_eq!(
            multiply(&x, &y).to_string(),
            "phi(a1,a2)*phi(a2,a3)/phi(a2)"
        );
        let p = RationalExpression::atom(phi(&[a(2)]));
        assert!(multiply(&p, &p.inverse()).is_one());
    }

    #[test]
    fn cancellation_respects_multiplicity() {
        let x = phi(&[a(1)]);
        let e = RationalExpression::new(vec![x.clone(), x.clone()], vec![x.clone()]);
        assert_eq!(e.numerator(), std::slice::from_ref(&x));
        assert!(e.denominator().is_empty());
    }

    #[test]
    fn restrict() {
        let atom = phi(&[a(2), a(3), b(4, 4)]);
        assert_eq!(
            restrict_atom(&atom, &set(&[2, 3])).unwrap(),
            phi(&[a(2), a(3)])
        );
        assert_eq!(restrict_atom(&atom, &atom.over()).unwrap(), atom);
        assert!(matches!(
            restrict_atom(&atom, &set(&[1])),
            Err(SymbolicError::NotSubset { .. })
        ));
    }

    #[test]
    fn join_single_edge_has_no_denominator() {
        let row = phi(&[a(1), a(2)]);
        let e = join_expression(std::slice::from_ref(&row), &row, &[]).unwrap();
        assert_eq!(e, RationalExpression::atom(row));
    }

    #[test]
    fn join_two_rows() {
        let w = phi(&[a(1), a(2), a(3), b(4, 4)]);
        let e = join_expression(
            &[phi(&[a(1), a(2)]), phi(&[a(2), a(3), b(4, 4)])],
            &w,
            &[set(&[2])],
        )
        .unwrap();
        assert_eq!(e.to_string(), "phi(a1,a2)*phi(a2,a3,b4)/phi(a2)");
    }

    #[test]
    fn marginalize_sums_out_private_variables() {
        let row = phi(&[a(1), a(2), a(3), b(4, 4)]);
        let expr = RationalExpression::new(
            vec![phi(&[a(1), a(2)]), phi(&[a(2), a(3), b(4, 4)])],
            vec![phi(&[a(2)])],
        );
        let (m, log) = marginalize_expression(&expr, &row, &set(&[1, 2, 3])).unwrap();
        assert_eq!(m.to_string(), "phi(a1,a2)*phi(a2,a3)/phi(a2)");
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].to_string(), "sum b4: phi(a2,a3,b4) -> phi(a2,a3)");
    }

    #[test]
    fn marginalize_falls_back_when_shared() {
        // a2 is summed but appears in the denominator: no closed form.
        let row = phi(&[a(1), a(2), a(3)]);
        let expr = RationalExpression::new(
            vec![phi(&[a(1), a(2)]), phi(&[a(2), a(3)])],
            vec![phi(&[a(2)])],
        );
        let (m, log) = marginalize_expression(&expr, &row, &set(&[1, 3])).unwrap();
        assert_eq!(m, RationalExpression::atom(phi(&[a(1), a(3)])));
        assert!(matches!(log.last(), Some(Rewrite::Fallback { .. })));
    }

    #[test]
    fn marginalize_onto_everything_is_identity() {
        let row = phi(&[a(1), b(1, 2)]);
        let expr = RationalExpression::atom(row.clone());
        let (m, log) = marginalize_expression(&expr, &row, &row.over()).unwrap();
        assert_eq!(m, expr);
        assert!(log.is_empty());
    }

    fn uniform(cols: &[usize]) -> WeightedRelation {
        let s = set(cols);
        let n = 1usize << cols.len();
        WeightedRelation::dense(s.clone(), &DomainSpec::binary(&s), |_| 1.0 / n as f64).unwrap()
    }

    #[test]
    fn evaluate_basics() {
        let j = uniform(&[1]);
        let bind: Binding = [(a(1), 0)].into_iter().collect();
        let e = RationalExpression::atom(phi(&[a(1)]));
        assert_eq!(evaluate(&e, &j, &bind).unwrap().value, 0.5);
        assert_eq!(
            evaluate(&RationalExpression::one(), &j, &bind)
                .unwrap()
                .value,
            1.0
        );
        let total = RationalExpression::atom(phi(&[]));
        assert_eq!(evaluate(&total, &j, &bind).unwrap().value, 1.0);
    }

    #[test]
    fn evaluate_errors_and_zero_denominator() {
        let j = uniform(&[1]);
        let e = RationalExpression::atom(phi(&[a(1)]));
        assert!(matches!(
            evaluate(&e, &j, &Binding::new()),
            Err(SymbolicError::Unbound(_))
        ));
        let bind: Binding = [(a(2), 0)].into_iter().collect();
        let e2 = RationalExpression::atom(phi(&[a(2)]));
        assert!(matches!(
            evaluate(&e2, &j, &bind),
            Err(SymbolicError::OutsideScheme { .. })
        ));
        let sparse = WeightedRelation::from_rows(set(&[1]), [(vec![0], 1.0)]).unwrap();
        let bind: Binding = [(a(1), 1)].into_iter().collect();
        let q = RationalExpression::new(vec![], vec![phi(&[a(1)])]);
        let r = evaluate(&q, &sparse, &bind).unwrap();
        assert!(r.zero_denominator);
        assert_eq!(r.value, 0.0);
    }
}
