//! Implication testing for generalized acyclic join dependencies (GAJDs)
//! over weighted relations, by a symbolic chase with a numeric cross-check.

pub mod census;
pub mod chase;
pub mod hypergraph;
pub mod oracle;
pub mod prelation;
pub mod problem;
pub mod symbolic;
pub mod tableau;
