//! Correction for CNF requirement sets.
//!
//! A real output `p_k` is read as a truth value through its degree: `p_k` for
//! the positive literal, `1 − p_k` for the negative one, and a literal holds
//! when its degree is at least [`THRESHOLD`]. Two engines guarantee that every
//! clause has a holding literal after correction:
//!
//! * the hierarchy engine, for sets made only of implications `¬a ∨ b` with an
//!   acyclic implication graph, raises every parent to the max over its
//!   descendants;
//! * the general engine handles arbitrary clauses by confidence-ordered greedy
//!   commitment guarded by a complete satisfiability check, flipping the
//!   outputs it cannot keep to `1 − p_k`.

mod general;
mod hierarchy;
pub(crate) mod solver;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lang::{Clause, Dialect, Literal, RequirementSet};
use crate::vector::{check_input, CorrectedVector, InputError};

pub use general::replay_is_extendable;
use solver::{ClauseDb, Search};

pub const THRESHOLD: f64 = 0.5;

/// Truth degree of `lit` under prediction vector `p`.
pub fn degree(lit: Literal, p: &[f64]) -> f64 {
    if lit.positive {
        p[lit.variable]
    } else {
        1.0 - p[lit.variable]
    }
}

/// Whether some literal of `clause` has degree ≥ 0.5.
pub fn clause_holds(clause: &Clause, p: &[f64]) -> bool {
    clause.literals.iter().any(|&l| degree(l, p) >= THRESHOLD)
}

/// Whether thresholding `p` at 0.5 yields a model of `clauses`.
pub fn thresholds_to_model(clauses: &[Clause], p: &[f64]) -> bool {
    clauses.iter().all(|c| {
        c.literals
            .iter()
            .any(|l| (p[l.variable] >= THRESHOLD) == l.positive)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CnfEngine {
    Hierarchy,
    General,
}

impl fmt::Display for CnfEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CnfEngine::Hierarchy => "hierarchy",
            CnfEngine::General => "general",
        })
    }
}

/// Implication structure for the hierarchy engine. Edge `(a, b)` comes from
/// clause `¬y_a ∨ y_b`: child `a` implies parent `b`.
#[derive(Debug, Clone)]
pub struct HierarchyData {
    pub edges: Vec<(usize, usize)>,
    /// Children before parents; ties broken by lowest index.
    pub topo_order: Vec<usize>,
    /// Sorted strict descendants of every variable.
    pub descendants: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct GeneralData {
    /// A model of every clause, found at compile time.
    pub certificate: Vec<bool>,
    pub(crate) db: ClauseDb,
}

#[derive(Debug, Clone)]
pub enum CnfKind {
    Hierarchy(HierarchyData),
    General(GeneralData),
}

/// Compiled, immutable CNF shield.
#[derive(Debug, Clone)]
pub struct CnfPlan {
    pub num_variables: usize,
    pub clauses: Vec<Clause>,
    pub kind: CnfKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    #[default]
    Auto,
    Hierarchy,
    General,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CnfError {
    #[error("requirements are unsatisfiable: no output can comply")]
    Unsatisfiable,
    #[error("requirements are not a hierarchy (every clause must be `not y_a or y_b` with no cycles)")]
    NotHierarchy,
    #[error("expected CNF requirements, got {0}")]
    WrongDialect(Dialect),
}

impl CnfPlan {
    pub fn engine(&self) -> CnfEngine {
        match self.kind {
            CnfKind::Hierarchy(_) => CnfEngine::Hierarchy,
            CnfKind::General(_) => CnfEngine::General,
        }
    }

    pub fn apply(&self, p: &[f64]) -> Result<CorrectedVector, InputError> {
        check_input(p, self.num_variables)?;
        Ok(match &self.kind {
            CnfKind::Hierarchy(h) => hierarchy::apply(h, p),
            CnfKind::General(g) => general::apply(self, g, p),
        })
    }
}

/// Compiles a normalized CNF set. `Auto` picks the hierarchy engine whenever
/// the structural test passes.
pub fn compile_cnf(rs: &RequirementSet, choice: EngineChoice) -> Result<CnfPlan, CnfError> {
    if rs.dialect != Dialect::Cnf {
        return Err(CnfError::WrongDialect(rs.dialect));
    }
    let n = rs.num_variables;
    let hierarchy = match choice {
        EngineChoice::General => None,
        _ => hierarchy::build(n, &rs.clauses),
    };
    let kind = match (hierarchy, choice) {
        (Some(h), _) => CnfKind::Hierarchy(h),
        (None, EngineChoice::Hierarchy) => return Err(CnfError::NotHierarchy),
        (None, _) => {
            let db = ClauseDb::new(n, &rs.clauses);
            let certificate = Search::new(&db)
                .solve(&[], &vec![false; n])
                .ok_or(CnfError::Unsatisfiable)?;
            debug_assert!(rs.clauses.iter().all(|c| c
                .literals
                .iter()
                .any(|l| certificate[l.variable] == l.positive)));
            CnfKind::General(GeneralData { certificate, db })
        }
    };
    Ok(CnfPlan { num_variables: n, clauses: rs.clauses.clone(), kind })
}
