//! The chase: exhaustive J-rule application and the implication test.
//!
//! A J-rule for `(x)Q` selects rows `w_k1..w_kq`, one per edge of `Q` in
//! construction order, that agree wherever their edges overlap. The new row
//! takes its `Q_i` cells from `w_ki`; its weight is the product of each
//! selected row's weight summed down to `Q_i`, over `phi` of the new row on
//! the rule's branch/twig intersections.
//!
//! `C` implies `(x)R` exactly when chasing the tableau of `(x)R` under the
//! rules of `C` produces the all-distinguished row.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hypergraph::AttributeSet;
use crate::prelation::Gajd;
use crate::symbolic::{
    marginalize_expression, multiply, restrict_atom, MarginalAtom, RationalExpression, Rewrite,
    Variable,
};
use crate::tableau::{build_tr, pattern_string, Row, Tableau, TableauError};

pub const DEFAULT_MAX_ROWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChaseError {
    #[error("rule {rule} is over {found}, but the tableau scheme is {expected}")]
    SchemeMismatch {
        rule: String,
        expected: AttributeSet,
        found: AttributeSet,
    },
    #[error("rule {rule} has {edges} edges but {selected} rows were selected")]
    Arity {
        rule: String,
        edges: usize,
        selected: usize,
    },
    #[error("row {0} does not exist")]
    NoSuchRow(usize),
    #[error("chase exceeded {limit} rows")]
    RowLimit {
        limit: usize,
        trace: Box<ChaseTrace>,
    },
    #[error("replay diverged at step {step}: {reason}")]
    Replay { step: usize, reason: String },
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

/// The rule induced by a GAJD whose edges cover the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct JRule {
    name: String,
    gajd: Gajd,
    edges: Vec<AttributeSet>,
    separators: Vec<AttributeSet>,
}

impl JRule {
    pub fn new(name: impl Into<String>, gajd: Gajd) -> Self {
        let edges = gajd.ordered_edges().into_iter().cloned().collect();
        let separators = gajd.interaction_set().members().to_vec();
        JRule {
            name: name.into(),
            gajd,
            edges,
            separators,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gajd(&self) -> &Gajd {
        &self.gajd
    }

    /// Edges in construction order; selections follow this order.
    pub fn edges(&self) -> &[AttributeSet] {
        &self.edges
    }

    fn check_scheme(&self, scheme: &AttributeSet) -> Result<(), ChaseError> {
        if self.gajd.scheme() != scheme {
            return Err(ChaseError::SchemeMismatch {
                rule: self.name.clone(),
                expected: scheme.clone(),
                found: self.gajd.scheme().clone(),
            });
        }
        Ok(())
    }
}

/// A new row proposed by a rule application.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub cells: Vec<Variable>,
    pub expr: RationalExpression,
    /// Per selected position, how that row's weight was summed down.
    pub rewrites: Vec<Vec<Rewrite>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Joinability {
    New(Candidate),
    AlreadyPresent(usize),
    NotJoinable,
}

/// Cells agreed on by the selection, or `None` on a conflict.
fn combine(t: &Tableau, rule: &JRule, selection: &[usize]) -> Option<Vec<Variable>> {
    let mut cells: Vec<Option<&Variable>> = vec![None; t.scheme().len()];
    let cols: Vec<_> = t.scheme().iter().collect();
    for (edge, &k) in rule.edges.iter().zip(selection) {
        let row = t.row(k);
        for (c, col) in cols.iter().enumerate() {
            if edge.contains(col) {
                let v = row.cell(c);
                match cells[c] {
                    None => cells[c] = Some(v),
                    Some(w) if w == v => {}
                    Some(_) => return None,
                }
            }
        }
    }
    cells.into_iter().map(|c| c.cloned()).collect()
}

fn candidate_expr(
    t: &Tableau,
    rule: &JRule,
    selection: &[usize],
    cells: &[Variable],
) -> Result<(RationalExpression, Vec<Vec<Rewrite>>), ChaseError> {
    let mut expr = RationalExpression::one();
    let mut rewrites = Vec::with_capacity(selection.len());
    for (edge, &k) in rule.edges.iter().zip(selection) {
        let row = t.row(k);
        let (factor, log) =
            marginalize_expression(row.expr(), &row.atom(), edge).map_err(TableauError::from)?;
        expr = multiply(&expr, &factor);
        rewrites.push(log);
    }
    let new_atom = MarginalAtom::new(cells.iter().cloned());
    let den: Vec<MarginalAtom> = rule
        .separators
        .iter()
        .map(|s| restrict_atom(&new_atom, s))
        .collect::<Result<_, _>>()
        .map_err(TableauError::from)?;
    Ok((
        multiply(&expr, &RationalExpression::new(vec![], den)),
        rewrites,
    ))
}

/// Tests whether `selection` (row indices, one per rule edge in construction
/// order) is joinable, and builds the candidate row if its pattern is new.
pub fn joinable(t: &Tableau, rule: &JRule, selection: &[usize]) -> Result<Joinability, ChaseError> {
    rule.check_scheme(t.scheme())?;
    if selection.len() != rule.edges.len() {
        return Err(ChaseError::Arity {
            rule: rule.name.clone(),
            edges: rule.edges.len(),
            selected: selection.len(),
        });
    }
    if let Some(&k) = selection.iter().find(|&&k| k >= t.len()) {
        return Err(ChaseError::NoSuchRow(k));
    }
    let Some(cells) = combine(t, rule, selection) else {
        return Ok(Joinability::NotJoinable);
    };
    if let Some(i) = t.find(&cells) {
        return Ok(Joinability::AlreadyPresent(i));
    }
    let (expr, rewrites) = candidate_expr(t, rule, selection, &cells)?;
    Ok(Joinability::New(Candidate {
        cells,
        expr,
        rewrites,
    }))
}

/// Order in which rule applications are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Passes over the rules in input order; within a rule, selections over
    /// the rows present at the start of its turn, in lexicographic order.
    /// Repeats until a pass adds nothing.
    #[default]
    Lexicographic,
    /// At each step, one applicable application chosen uniformly at random.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChaseOptions {
    pub max_rows: usize,
    pub strategy: Strategy,
}

impl Default for ChaseOptions {
    fn default() -> Self {
        ChaseOptions {
            max_rows: DEFAULT_MAX_ROWS,
            strategy: Strategy::Lexicographic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaseStep {
    /// Index into the rule list.
    pub rule: usize,
    pub rule_name: String,
    /// Selected row indices (0-based), one per rule edge.
    pub selected: Vec<usize>,
    /// Index of the produced row.
    pub produced: usize,
    pub row: Row,
    pub rewrites: Vec<Vec<Rewrite>>,
}

impl fmt::Display for ChaseStep {
    /// `rule <name> rows [i,j] -> row (pattern) expr <expr>`, rows 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.selected.iter().map(|k| (k + 1).to_string()).collect();
        write!(
            f,
            "rule {} rows [{}] -> row {} expr {}",
            self.rule_name,
            rows.join(","),
            self.row.pattern_string(),
            self.row.expr()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaseTrace {
    pub rules: Vec<JRule>,
    pub initial: Tableau,
    pub steps: Vec<ChaseStep>,
    pub final_tableau: Tableau,
    /// Joinable selections whose pattern was already present.
    pub already_present: usize,
}

impl ChaseTrace {
    /// Re-derives every step from `initial` and checks it reproduces the
    /// recorded row and the final tableau.
    pub fn replay(&self) -> Result<Tableau, ChaseError> {
        let mut t = self.initial.clone();
        for (i, s) in self.steps.iter().enumerate() {
            let diverged = |reason: String| ChaseError::Replay {
                step: i + 1,
                reason,
            };
            let rule = self
                .rules
                .get(s.rule)
                .ok_or_else(|| diverged(format!("unknown rule {}", s.rule)))?;
            match joinable(&t, rule, &s.selected)? {
                Joinability::New(c) => {
                    if c.cells != s.row.cells() || &c.expr != s.row.expr() {
                        return Err(diverged(format!(
                            "produced {} expr {}",
                            pattern_string(&c.cells),
                            c.expr
                        )));
                    }
                    let at = t.push(Row::new(c.cells, c.expr))?;
                    if at != Some(s.produced) {
                        return Err(diverged("row index differs".into()));
                    }
                }
                other => return Err(diverged(format!("{other:?}"))),
            }
        }
        let same = t.rows() == self.final_tableau.rows();
        if !same {
            return Err(ChaseError::Replay {
                step: self.steps.len(),
                reason: "final tableau differs".into(),
            });
        }
        Ok(t)
    }

    pub fn step_producing(&self, row: usize) -> Option<&ChaseStep> {
        self.steps.iter().find(|s| s.produced == row)
    }

    /// Indices of the steps needed to produce `row`, in trace order.
    pub fn derivation_of(&self, row: usize) -> Vec<usize> {
        let mut needed = BTreeSet::new();
        let mut stack = vec![row];
        while let Some(r) = stack.pop() {
            if let Some(i) = self.steps.iter().position(|s| s.produced == r) {
                if needed.insert(i) {
                    stack.extend(self.steps[i].selected.iter().copied());
                }
            }
        }
        needed.into_iter().collect()
    }

    /// The initial tableau plus exactly the rows derived on the way to `row`.
    pub fn proof_tableau(&self, row: usize) -> Tableau {
        let mut t = self.initial.clone();
        for i in self.derivation_of(row) {
            t.push(self.steps[i].row.clone())
                .expect("rows came from a valid chase");
        }
        t
    }

    /// Final row patterns as a set, for order-independence checks.
    pub fn pattern_set(&self) -> BTreeSet<Vec<Variable>> {
        self.final_tableau
            .rows()
            .iter()
            .map(|r| r.cells().to_vec())
            .collect()
    }

    /// One `step k: ...` line per step, followed by the summation steps.
    pub fn render(&self, with_rewrites: bool) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "step {}: {}", i + 1, s);
            if with_rewrites {
                for (pos, log) in s.rewrites.iter().enumerate() {
                    for r in log {
                        let _ =
                            writeln!(out, "  edge {} row {}: {}", pos + 1, s.selected[pos] + 1, r);
                    }
                }
            }
        }
        out
    }
}

/// Runs the chase of `t` under `rules`.
pub fn chase(t: &Tableau, rules: &[JRule], opts: ChaseOptions) -> Result<ChaseTrace, ChaseError> {
    for r in rules {
        r.check_scheme(t.scheme())?;
    }
    let mut state = State {
        rules,
        t: t.clone(),
        steps: Vec::new(),
        already_present: 0,
        max_rows: opts.max_rows,
        initial: t,
    };
    match opts.strategy {
        Strategy::Lexicographic => state.lexicographic()?,
        Strategy::Shuffled(seed) => state.shuffled(seed)?,
    }
    Ok(state.finish())
}

struct State<'a> {
    rules: &'a [JRule],
    initial: &'a Tableau,
    t: Tableau,
    steps: Vec<ChaseStep>,
    already_present: usize,
    max_rows: usize,
}

impl State<'_> {
    fn finish(self) -> ChaseTrace {
        ChaseTrace {
            rules: self.rules.to_vec(),
            initial: self.initial.clone(),
            steps: self.steps,
            final_tableau: self.t,
            already_present: self.already_present,
        }
    }

    fn snapshot(&self) -> ChaseTrace {
        ChaseTrace {
            rules: self.rules.to_vec(),
            initial: self.initial.clone(),
            steps: self.steps.clone(),
            final_tableau: self.t.clone(),
            already_present: self.already_present,
        }
    }

    fn apply(
        &mut self,
        rule: usize,
        selection: Vec<usize>,
        c: Candidate,
    ) -> Result<(), ChaseError> {
        if self.t.len() >= self.max_rows {
            return Err(ChaseError::RowLimit {
                limit: self.max_rows,
                trace: Box::new(self.snapshot()),
            });
        }
        let row = Row::new(c.cells, c.expr);
        let produced = self.t.push(row.clone())?.expect("pattern checked as new");
        self.steps.push(ChaseStep {
            rule,
            rule_name: self.rules[rule].name.clone(),
            selected: selection,
            produced,
            row,
            rewrites: c.rewrites,
        });
        Ok(())
    }

    fn lexicographic(&mut self) -> Result<(), ChaseError> {
        loop {
            let mut added = false;
            for ri in 0..self.rules.len() {
                let rule = &self.rules[ri];
                let n = self.t.len();
                let mut found = Vec::new();
                enumerate_selections(&self.t, rule, n, &mut |sel| found.push(sel.to_vec()));
                for sel in found {
                    match joinable(&self.t, rule, &sel)? {
                        Joinability::New(c) => {
                            self.apply(ri, sel, c)?;
                            added = true;
                        }
                        Joinability::AlreadyPresent(_) => self.already_present += 1,
                        Joinability::NotJoinable => {
                            unreachable!("enumeration yields joinable rows")
                        }
                    }
                }
            }
            if !added {
                return Ok(());
            }
        }
    }

    fn shuffled(&mut self, seed: u64) -> Result<(), ChaseError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut options: Vec<(usize, Vec<usize>)> = Vec::new();
            for (ri, rule) in self.rules.iter().enumerate() {
                let t = &self.t;
                enumerate_selections(t, rule, t.len(), &mut |sel| {
                    let cells = combine(t, rule, sel).expect("joinable");
                    if t.find(&cells).is_none() {
                        options.push((ri, sel.to_vec()));
                    }
                });
            }
            let Some((ri, sel)) = options.choose(&mut rng).cloned() else {
                return Ok(());
            };
            match joinable(&self.t, &self.rules[ri], &sel)? {
                Joinability::New(c) => self.apply(ri, sel, c)?,
                other => unreachable!("option was new: {other:?}"),
            }
        }
    }
}

/// Calls `f` with every joinable selection over rows `0..n`, in
/// lexicographic order, pruning on the first conflicting edge.
fn enumerate_selections(t: &Tableau, rule: &JRule, n: usize, f: &mut dyn FnMut(&[usize])) {
    let cols: Vec<_> = t.scheme().iter().cloned().collect();
    let edge_cols: Vec<Vec<usize>> = rule
        .edges
        .iter()
        .map(|e| (0..cols.len()).filter(|&c| e.contains(&cols[c])).collect())
        .collect();
    let mut cells: Vec<Option<&Variable>> = vec![None; cols.len()];
    let mut sel = Vec::with_capacity(edge_cols.len());
    fn go<'t>(
        t: &'t Tableau,
        n: usize,
        edge_cols: &[Vec<usize>],
        cells: &mut Vec<Option<&'t Variable>>,
        sel: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        let i = sel.len();
        if i == edge_cols.len() {
            f(sel);
            return;
        }
        for k in 0..n {
            let row = t.row(k);
            if edge_cols[i]
                .iter()
                .all(|&c| cells[c].is_none_or(|v| v == row.cell(c)))
            {
                let set: Vec<usize> = edge_cols[i]
                    .iter()
                    .copied()
                    .filter(|&c| cells[c].is_none())
                    .collect();
                for &c in &set {
                    cells[c] = Some(row.cell(c));
                }
                sel.push(k);
                go(t, n, edge_cols, cells, sel, f);
                sel.pop();
                for &c in &set {
                    cells[c] = None;
                }
            }
        }
    }
    go(t, n, &edge_cols, &mut cells, &mut sel, f);
}

/// Outcome of the implication test.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// Weight of the all-distinguished row, when it was derived.
    pub factorization: Option<RationalExpression>,
    /// Index of the all-distinguished row in the final tableau.
    pub distinguished_row: Option<usize>,
    pub trace: ChaseTrace,
}

impl Verdict {
    /// `IMPLIES: yes|no`, plus `FACTORIZATION: <expr>` when it holds.
    pub fn summary(&self, factorize: bool) -> String {
        let mut s = format!("IMPLIES: {}\n", if self.holds { "yes" } else { "no" });
        if factorize {
            if let Some(f) = &self.factorization {
                let _ = writeln!(s, "FACTORIZATION: {f}");
            }
        }
        s
    }
}

/// Decides whether `constraints` imply `target` by chasing the target's tableau.
pub fn implies(
    constraints: &[(String, Gajd)],
    target: &Gajd,
    opts: ChaseOptions,
) -> Result<Verdict, ChaseError> {
    let rules: Vec<JRule> = constraints
        .iter()
        .map(|(n, g)| JRule::new(n.clone(), g.clone()))
        .collect();
    let t = build_tr(target);
    let trace = chase(&t, &rules, opts)?;
    let distinguished_row = trace.final_tableau.distinguished_row();
    let factorization = distinguished_row.map(|i| trace.final_tableau.row(i).expr().clone());
    debug_assert!(factorization.as_ref().is_none_or(|f| f.is_distinguished()));
    Ok(Verdict {
        holds: distinguished_row.is_some(),
        factorization,
        distinguished_row,
        trace,
    })
}
