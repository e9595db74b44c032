//! Numeric cross-checks for symbolic verdicts.
//!
//! Random strictly positive distributions are pushed toward `SAT(C)` by
//! cycling `mpj_map` over the constraints. Distributions whose constraint
//! residuals fall below `sat_tol` are then tested against the target.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hypergraph::AttributeSet;
use crate::prelation::{mpj_map, satisfies, DomainSpec, Gajd, RelationError, WeightedRelation};
use crate::symbolic::{Binding, Evaluator, RationalExpression, SymbolicError};
use crate::tableau::build_tr;

/// Largest number of cells a random distribution may have.
pub const MAX_CELLS: usize = 4096;
/// Weight of the uniform distribution in the mixture.
pub const UNIFORM_MIX: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
    #[error("domain too large: {cells} cells over {scheme} (limit {MAX_CELLS})")]
    DomainTooLarge { scheme: AttributeSet, cells: String },
    #[error("projection produced a non-positive weight")]
    LostPositivity,
    #[error("constraints are over {found}, expected {expected}")]
    SchemeMismatch {
        expected: AttributeSet,
        found: AttributeSet,
    },
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub domains: DomainSpec,
    pub seed: u64,
    pub trials: usize,
    pub ipf_sweeps: usize,
    pub sat_tol: f64,
    pub check_tol: f64,
}

impl OracleConfig {
    pub const DEFAULT_TRIALS: usize = 50;
    pub const DEFAULT_SWEEPS: usize = 200;
    pub const DEFAULT_SAT_TOL: f64 = 1e-10;
    pub const DEFAULT_CHECK_TOL: f64 = 1e-8;

    pub fn new(domains: DomainSpec, seed: u64) -> Self {
        OracleConfig {
            domains,
            seed,
            trials: Self::DEFAULT_TRIALS,
            ipf_sweeps: Self::DEFAULT_SWEEPS,
            sat_tol: Self::DEFAULT_SAT_TOL,
            check_tol: Self::DEFAULT_CHECK_TOL,
        }
    }

    /// Binary domains over `scheme`.
    pub fn binary(scheme: &AttributeSet, seed: u64) -> Self {
        Self::new(DomainSpec::binary(scheme), seed)
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::InvalidConfig(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.sat_tol > 0.0 && self.check_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.sat_tol >= self.check_tol {
            return bad("sat_tol must be smaller than check_tol");
        }
        Ok(())
    }

    /// Seed of trial `i`, derived from the master seed.
    pub fn trial_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

/// A strictly positive normalized distribution over `scheme`: i.i.d. uniform
/// weights, normalized, then mixed with the uniform distribution.
pub fn random_positive(
    scheme: &AttributeSet,
    domains: &DomainSpec,
    seed: u64,
) -> Result<WeightedRelation, OracleError> {
    let cells = domains.cells(scheme)?;
    let n = match cells {
        Some(n) if n <= MAX_CELLS => n,
        other => {
            return Err(OracleError::DomainTooLarge {
                scheme: scheme.clone(),
                cells: other.map_or_else(|| "overflowing".into(), |n| n.to_string()),
            })
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = WeightedRelation::dense(scheme.clone(), domains, |_| rng.gen::<f64>())?;
    let z = raw.total();
    let u = 1.0 / n as f64;
    Ok(raw.map_weights(|w| {
        let p = if z > 0.0 { w / z } else { u };
        (1.0 - UNIFORM_MIX) * p + UNIFORM_MIX * u
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub relation: WeightedRelation,
    /// `satisfies` residual of each constraint after the last sweep.
    pub residuals: Vec<f64>,
}

impl Projection {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Applies `mpj_map` for each constraint in turn, `sweeps` times.
pub fn project_onto(
    rel: &WeightedRelation,
    constraints: &[Gajd],
    sweeps: usize,
) -> Result<Projection, OracleError> {
    for g in constraints {
        if g.scheme() != rel.scheme() {
            return Err(OracleError::SchemeMismatch {
                expected: rel.scheme().clone(),
                found: g.scheme().clone(),
            });
        }
    }
    let cells = rel.len();
    let mut cur = rel.clone();
    if !constraints.is_empty() {
        for _ in 0..sweeps {
            for g in constraints {
                cur = mpj_map(&cur, g)?;
            }
            if cur.len() != cells || !cur.is_strictly_positive() {
                return Err(OracleError::LostPositivity);
            }
        }
    }
    let residuals = constraints
        .iter()
        .map(|g| satisfies(&cur, g, 0.0).map(|(_, r)| r))
        .collect::<Result<_, _>>()?;
    Ok(Projection {
        relation: cur,
        residuals,
    })
}

/// Outcome of a single generate/project/test trial.
#[derive(Debug, Clone, PartialEq)]
struct Trial {
    projection: Projection,
    converged: bool,
    target_residual: f64,
}

fn run_trial(
    constraints: &[Gajd],
    target: &Gajd,
    cfg: &OracleConfig,
    i: usize,
) -> Result<Trial, OracleError> {
    let start = random_positive(target.scheme(), &cfg.domains, cfg.trial_seed(i))?;
    let projection = project_onto(&start, constraints, cfg.ipf_sweeps)?;
    let converged = projection.residuals.iter().all(|&r| r <= cfg.sat_tol);
    let target_residual = satisfies(&projection.relation, target, 0.0)?.1;
    Ok(Trial {
        projection,
        converged,
        target_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Fewer than half of the trials converged.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessReport {
    pub trials: usize,
    pub converged: usize,
    pub passed: usize,
    pub failed: usize,
    /// Worst target residual among converged trials.
    pub worst_target_residual: f64,
    /// Worst constraint residual among converged trials.
    pub worst_constraint_residual: f64,
    pub status: Status,
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "soundness: {}", self.status)?;
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "converged: {}", self.converged)?;
        writeln!(f, "passed: {}", self.passed)?;
        writeln!(f, "failed: {}", self.failed)?;
        writeln!(
            f,
            "worst constraint residual: {:.3e}",
            self.worst_constraint_residual
        )?;
        writeln!(
            f,
            "worst target residual: {:.3e}",
            self.worst_target_residual
        )
    }
}

/// Checks that distributions satisfying `constraints` also satisfy `target`.
pub fn check_soundness(
    constraints: &[Gajd],
    target: &Gajd,
    cfg: &OracleConfig,
) -> Result<SoundnessReport, OracleError> {
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(constraints, target, cfg, i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut r = SoundnessReport {
        trials: cfg.trials,
        converged: 0,
        passed: 0,
        failed: 0,
        worst_target_residual: 0.0,
        worst_constraint_residual: 0.0,
        status: Status::Pass,
    };
    for t in trials.iter().filter(|t| t.converged) {
        r.converged += 1;
        r.worst_constraint_residual = r.worst_constraint_residual.max(t.projection.max_residual());
        r.worst_target_residual = r.worst_target_residual.max(t.target_residual);
        if t.target_residual <= cfg.check_tol {
            r.passed += 1;
        } else {
            r.failed += 1;
        }
    }
    r.status = if r.failed > 0 {
        Status::Fail
    } else if 2 * r.converged < r.trials {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub trial: usize,
    pub seed: u64,
    pub distribution: WeightedRelation,
    pub constraint_residuals: Vec<f64>,
    pub target_residual: f64,
}

impl CounterexampleReport {
    /// Summary lines followed by the distribution in relation text format.
    pub fn render(&self, domains: &DomainSpec) -> String {
        let res: Vec<String> = self
            .constraint_residuals
            .iter()
            .map(|r| format!("{r:.3e}"))
            .collect();
        format!(
            "counterexample: found\ntrial: {}\nseed: {}\nconstraint residuals: [{}]\ntarget residual: {:.3e}\n{}",
            self.trial,
            self.seed,
            res.join(", "),
            self.target_residual,
            self.distribution.to_text(domains)
        )
    }
}

/// First trial (in trial order) satisfying the constraints within `sat_tol`
/// but violating `target` by more than `check_tol`. `None` is inconclusive.
pub fn search_counterexample(
    constraints: &[Gajd],
    target: &Gajd,
    cfg: &OracleConfig,
) -> Result<Option<CounterexampleReport>, OracleError> {
    cfg.validate()?;
    let found = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(constraints, target, cfg, i).map(|t| (i, t)))
        .find_map_first(|r| match r {
            Ok((_, t)) if !(t.converged && t.target_residual > cfg.check_tol) => None,
            other => Some(other),
        });
    match found {
        None => Ok(None),
        Some(Err(e)) => Err(e),
        Some(Ok((i, t))) => Ok(Some(CounterexampleReport {
            trial: i,
            seed: cfg.trial_seed(i),
            distribution: t.projection.relation,
            constraint_residuals: t.projection.residuals,
            target_residual: t.target_residual,
        })),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductFormulaReport {
    /// Clique marginals over interaction marginals, on `w_d`.
    pub formula: RationalExpression,
    pub trials: usize,
    /// Worst gap between the relation and the explicit formula.
    pub worst_formula_residual: f64,
    /// Worst `satisfies` residual of the relation.
    pub worst_satisfies_residual: f64,
    pub passed: bool,
}

pub const PRODUCT_FORMULA_TOL: f64 = 1e-10;
pub const PRODUCT_SATISFIES_TOL: f64 = 1e-12;

/// For random `rel = mpj_map(p, g)`: `rel` equals the product of its edge
/// marginals over its interaction marginals, and `rel` satisfies `g`.
pub fn check_product_formula(
    g: &Gajd,
    cfg: &OracleConfig,
) -> Result<ProductFormulaReport, OracleError> {
    cfg.validate()?;
    let formula = build_tr(g).output().clone();
    let wd = crate::tableau::distinguished_pattern(g.scheme());
    let per_trial = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64), OracleError> {
            let p = random_positive(g.scheme(), &cfg.domains, cfg.trial_seed(i))?;
            let rel = mpj_map(&p, g)?;
            let mut ev = Evaluator::new(&rel);
            let mut worst = 0.0f64;
            for (t, w) in rel.iter() {
                let binding: Binding = wd.iter().cloned().zip(t.iter().copied()).collect();
                let v = ev.evaluate(&formula, &binding)?.value;
                worst = worst.max((v - w).abs());
            }
            let sat = satisfies(&rel, g, 0.0)?.1;
            Ok((worst, sat))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst_formula_residual = per_trial.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_satisfies_residual = per_trial.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ProductFormulaReport {
        formula,
        trials: cfg.trials,
        worst_formula_residual,
        worst_satisfies_residual,
        passed: worst_formula_residual <= PRODUCT_FORMULA_TOL
            && worst_satisfies_residual <= PRODUCT_SATISFIES_TOL,
    })
}
