//! Tableaux: symbolic relations whose cells are variables.
//!
//! A tableau over scheme `R` has rows of variables, one per column, each row
//! carrying a weight expression. Its `output` expression is the weight of the
//! distinguished tuple when the tableau is used as a mapping on relations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::hypergraph::{Attribute, AttributeSet};
use crate::prelation::{Gajd, RelationError, Value, WeightedRelation};
use crate::symbolic::{
    Binding, Evaluator, MarginalAtom, RationalExpression, SymbolicError, VarKind, Variable,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableauError {
    #[error("row has {found} cells but the scheme has {expected} columns")]
    Arity { expected: usize, found: usize },
    #[error("variable {var} placed in column {column}")]
    WrongColumn { var: Variable, column: Attribute },
    #[error("distinguished variable {var} must be a{expected} in column {column}")]
    BadDistinguished {
        var: Variable,
        column: Attribute,
        expected: usize,
    },
    #[error("duplicate row pattern {0}")]
    DuplicateRow(String),
    #[error("distinguished variable a{0} appears in no row")]
    MissingDistinguished(usize),
    #[error("relation scheme {found} differs from tableau scheme {expected}")]
    SchemeMismatch {
        expected: AttributeSet,
        found: AttributeSet,
    },
    #[error("valuations disagree on the weight of {tuple:?}: {first} vs {second}")]
    Inconsistent {
        tuple: Vec<Value>,
        first: f64,
        second: f64,
    },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// A row: one variable per scheme column (in scheme order) plus its weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    cells: Vec<Variable>,
    expr: RationalExpression,
}

impl Row {
    pub fn new(cells: Vec<Variable>, expr: RationalExpression) -> Self {
        Row { cells, expr }
    }

    pub fn cells(&self) -> &[Variable] {
        &self.cells
    }

    pub fn expr(&self) -> &RationalExpression {
        &self.expr
    }

    pub fn cell(&self, column: usize) -> &Variable {
        &self.cells[column]
    }

    /// The row's full pattern as an atom over the whole scheme.
    pub fn atom(&self) -> MarginalAtom {
        MarginalAtom::new(self.cells.iter().cloned())
    }

    pub fn is_distinguished(&self) -> bool {
        self.cells.iter().all(Variable::is_distinguished)
    }

    pub fn pattern_string(&self) -> String {
        pattern_string(&self.cells)
    }
}

/// Renders cells as `(a1,a2,b1)`.
pub fn pattern_string(cells: &[Variable]) -> String {
    let inner: Vec<String> = cells.iter().map(Variable::to_string).collect();
    format!("({})", inner.join(","))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tableau {
    scheme: AttributeSet,
    rows: Vec<Row>,
    index: HashMap<Vec<Variable>, usize>,
    next_b: u32,
    output: RationalExpression,
}

impl Tableau {
    /// Builds a tableau, checking column placement and pattern uniqueness.
    pub fn new(
        scheme: AttributeSet,
        rows: Vec<Row>,
        output: RationalExpression,
    ) -> Result<Self, TableauError> {
        let mut t = Tableau {
            scheme,
            rows: Vec::new(),
            index: HashMap::new(),
            next_b: 1,
            output,
        };
        for r in rows {
            if t.push(r.clone())?.is_none() {
                return Err(TableauError::DuplicateRow(r.pattern_string()));
            }
        }
        for (i, _) in t.scheme.iter().enumerate() {
            if !t.rows.iter().any(|r| r.cells[i].is_distinguished()) {
                return Err(TableauError::MissingDistinguished(i + 1));
            }
        }
        Ok(t)
    }

    pub fn scheme(&self) -> &AttributeSet {
        &self.scheme
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn output(&self) -> &RationalExpression {
        &self.output
    }

    /// Index that the next fresh nondistinguished variable would get.
    pub fn next_fresh(&self) -> u32 {
        self.next_b
    }

    pub fn find(&self, cells: &[Variable]) -> Option<usize> {
        self.index.get(cells).copied()
    }

    /// `a_i` for every column.
    pub fn distinguished_pattern(&self) -> Vec<Variable> {
        distinguished_pattern(&self.scheme)
    }

    pub fn distinguished_row(&self) -> Option<usize> {
        self.find(&self.distinguished_pattern())
    }

    /// Validates and appends `row`. Returns `None`, leaving the tableau
    /// untouched, when the pattern is already present.
    pub fn push(&mut self, row: Row) -> Result<Option<usize>, TableauError> {
        self.check_row(&row)?;
        if self.index.contains_key(&row.cells) {
            return Ok(None);
        }
        for v in &row.cells {
            if v.kind == VarKind::Nondistinguished && v.index >= self.next_b {
                self.next_b = v.index + 1;
            }
        }
        let i = self.rows.len();
        self.index.insert(row.cells.clone(), i);
        self.rows.push(row);
        Ok(Some(i))
    }

    fn check_row(&self, row: &Row) -> Result<(), TableauError> {
        if row.cells.len() != self.scheme.len() {
            return Err(TableauError::Arity {
                expected: self.scheme.len(),
                found: row.cells.len(),
            });
        }
        for (pos, (col, v)) in self.scheme.iter().zip(&row.cells).enumerate() {
            if &v.column != col {
                return Err(TableauError::WrongColumn {
                    var: v.clone(),
                    column: col.clone(),
                });
            }
            if v.is_distinguished() && v.index as usize != pos + 1 {
                return Err(TableauError::BadDistinguished {
                    var: v.clone(),
                    column: col.clone(),
                    expected: pos + 1,
                });
            }
        }
        Ok(())
    }

    /// Applies the tableau as a mapping to `rel`.
    ///
    /// Enumerates assignments of the distinguished variables and of any other
    /// variable in the output expression, over the values seen in each column
    /// of the positive tuples. An assignment counts when it extends to a
    /// valuation mapping every row onto a positive tuple of `rel`; it then
    /// emits the distinguished tuple weighted by the output expression.
    /// Assignments with a zero denominator are skipped.
    pub fn run(&self, rel: &WeightedRelation) -> Result<WeightedRelation, TableauError> {
        if rel.scheme() != &self.scheme {
            return Err(TableauError::SchemeMismatch {
                expected: self.scheme.clone(),
                found: rel.scheme().clone(),
            });
        }
        let ncols = self.scheme.len();
        let positive: Vec<&[Value]> = rel
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(t, _)| t)
            .collect();
        let mut observed: Vec<Vec<Value>> = vec![Vec::new(); ncols];
        for t in &positive {
            for (c, &v) in t.iter().enumerate() {
                observed[c].push(v);
            }
        }
        for o in &mut observed {
            o.sort_unstable();
            o.dedup();
        }

        let column_of: HashMap<&Attribute, usize> = self
            .scheme
            .iter()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let mut keys = self.distinguished_pattern();
        for atom in self.output.atoms() {
            for v in atom.variables() {
                if !keys.contains(v) {
                    keys.push(v.clone());
                }
            }
        }
        let key_cols: Vec<usize> = keys.iter().map(|v| column_of[&v.column]).collect();

        // Variables per row, numbered densely for the extension search.
        let mut var_ids: HashMap<&Variable, usize> = HashMap::new();
        for v in keys
            .iter()
            .chain(self.rows.iter().flat_map(|r| r.cells.iter()))
        {
            let n = var_ids.len();
            var_ids.entry(v).or_insert(n);
        }
        let row_ids: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| r.cells.iter().map(|v| var_ids[v]).collect())
            .collect();

        let mut evaluator = Evaluator::new(rel);
        let mut out: BTreeMap<Vec<Value>, f64> = BTreeMap::new();
        let mut assignment: Vec<Option<Value>> = vec![None; var_ids.len()];
        let mut choice = vec![0usize; keys.len()];
        if keys
            .iter()
            .enumerate()
            .any(|(i, _)| observed[key_cols[i]].is_empty())
        {
            return Ok(WeightedRelation::empty(self.scheme.clone()));
        }
        loop {
            for (i, &c) in choice.iter().enumerate() {
                assignment[i] = Some(observed[key_cols[i]][c]);
            }
            if extends(&row_ids, &positive, &mut assignment, 0) {
                let binding: Binding = keys
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), assignment[i].expect("key assigned")))
                    .collect();
                let e = evaluator.evaluate(&self.output, &binding)?;
                if !e.zero_denominator {
                    let tuple: Vec<Value> =
                        (0..ncols).map(|c| assignment[c].expect("key")).collect();
                    match out.get(&tuple) {
                        Some(&prev) => {
                            let scale = prev.abs().max(e.value.abs()).max(1.0);
                            if (prev - e.value).abs() > 1e-12 * scale {
                                return Err(TableauError::Inconsistent {
                                    tuple,
                                    first: prev,
                                    second: e.value,
                                });
                            }
                        }
                        None => {
                            out.insert(tuple, e.value);
                        }
                    }
                }
            }
            // Advance the odometer.
            let mut k = keys.len();
            loop {
                if k == 0 {
                    return Ok(WeightedRelation::from_rows(self.scheme.clone(), out)?);
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < observed[key_cols[k]].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }
}

/// Backtracking search for tuples matching rows `r..`, given fixed keys.
fn extends(
    rows: &[Vec<usize>],
    tuples: &[&[Value]],
    assignment: &mut [Option<Value>],
    r: usize,
) -> bool {
    if r == rows.len() {
        return true;
    }
    let row = &rows[r];
    for t in tuples {
        if row
            .iter()
            .zip(t.iter())
            .all(|(&v, &x)| assignment[v].is_none_or(|y| y == x))
        {
            let newly: Vec<usize> = row
                .iter()
                .zip(t.iter())
                .filter_map(|(&v, &x)| {
                    if assignment[v].is_none() {
                        assignment[v] = Some(x);
                        Some(v)
                    } else {
                        None
                    }
                })
                .collect();
            let ok = extends(rows, tuples, assignment, r + 1);
            for v in newly {
                assignment[v] = None;
            }
            if ok {
                return true;
            }
        }
    }
    false
}

/// `(a1, ..., al)` over `scheme`.
pub fn distinguished_pattern(scheme: &AttributeSet) -> Vec<Variable> {
    scheme
        .iter()
        .enumerate()
        .map(|(i, a)| Variable::distinguished(i as u32 + 1, a.clone()))
        .collect()
}

/// The tableau of the mapping for `g`.
///
/// One row per edge in construction order. Row `i` holds `a_j` exactly in the
/// columns of `R_i`, and fresh `b`'s elsewhere, numbered row by row, left to
/// right. Each row's weight is `phi` over its whole pattern. The output is
/// `prod phi(w_d[R_i]) / prod phi(w_d[R_j(i) & R_i])`.
pub fn build_tr(g: &Gajd) -> Tableau {
    let scheme = g.scheme().clone();
    let wd = distinguished_pattern(&scheme);
    let mut next = 1u32;
    let mut rows = Vec::new();
    for edge in g.ordered_edges() {
        let cells: Vec<Variable> = scheme
            .iter()
            .zip(&wd)
            .map(|(a, d)| {
                if edge.contains(a) {
                    d.clone()
                } else {
                    next += 1;
                    Variable::nondistinguished(next - 1, a.clone())
                }
            })
            .collect();
        let expr = RationalExpression::atom(MarginalAtom::new(cells.iter().cloned()));
        rows.push(Row::new(cells, expr));
    }
    let wd_atom = MarginalAtom::new(wd.iter().cloned());
    let restrict = |s: &AttributeSet| crate::symbolic::restrict_atom(&wd_atom, s).expect("subset");
    let numerator = g.ordered_edges().into_iter().map(restrict).collect();
    let denominator = g.interaction_set().members().iter().map(restrict).collect();
    let output = RationalExpression::new(numerator, denominator);
    Tableau::new(scheme, rows, output).expect("construction respects the invariants")
}

/// The one-row tableau `T_I` mapping every relation to itself.
pub fn identity(scheme: &AttributeSet) -> Tableau {
    let wd = distinguished_pattern(scheme);
    let atom = RationalExpression::atom(MarginalAtom::new(wd.iter().cloned()));
    Tableau::new(scheme.clone(), vec![Row::new(wd, atom.clone())], atom).expect("valid")
}

/// Layout: a header of column names and `f`, then one line per row.
/// Columns are left-aligned and separated by two spaces.
impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lines: Vec<Vec<String>> = Vec::with_capacity(self.rows.len() + 1);
        let mut header: Vec<String> = self.scheme.iter().map(|a| a.to_string()).collect();
        header.push("f".into());
        lines.push(header);
        for r in &self.rows {
            let mut l: Vec<String> = r.cells.iter().map(|v| v.to_string()).collect();
            l.push(r.expr.to_string());
            lines.push(l);
        }
        let ncols = self.scheme.len();
        let widths: Vec<usize> = (0..ncols)
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        for l in &lines {
            let mut s = String::new();
            for (c, w) in widths.iter().enumerate() {
                s.push_str(&format!("{:<w$}  ", l[c], w = *w));
            }
            s.push_str(&l[ncols]);
            writeln!(f, "{}", s.trim_end())?;
        }
        Ok(())
    }
}
