//! Requirement files: lexing, parsing, normalization and rendering.
//!
//! Two line-oriented dialects are accepted, one requirement per line:
//!
//! ```text
//! not y_0 or y_1 or y_2 or y_3      # a CNF clause
//! y_0 - y_1 >= 0                    # a linear inequality
//! ```
//!
//! A file must use a single dialect. Blank lines and lines whose first
//! non-blank character is `#` are ignored.

mod lexer;
mod normalize;
mod parser;
mod render;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use normalize::normalize;
pub use parser::parse_requirements;
pub use render::{render, render_clause, render_inequality};

/// A possibly negated reference to output variable `y_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub variable: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(variable: usize) -> Self {
        Literal { variable, positive: true }
    }

    pub fn neg(variable: usize) -> Self {
        Literal { variable, positive: false }
    }

    pub fn negated(self) -> Self {
        Literal { variable: self.variable, positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "y_{}", self.variable)
        } else {
            write!(f, "not y_{}", self.variable)
        }
    }
}

/// A disjunction of literals.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub literals: Vec<Literal>,
    /// 1-based line in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
        }
    }
}

/// `Σ coeffs[i]·y_i ≥ bound` (or `>` when `strict`).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalInequality {
    pub coeffs: BTreeMap<usize, f64>,
    pub bound: f64,
    pub strict: bool,
}

impl CanonicalInequality {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|(&i, &a)| a * values[i]).sum()
    }

    /// `lhs − bound`; nonnegative when the inequality holds.
    pub fn slack(&self, values: &[f64]) -> f64 {
        self.lhs(values) - self.bound
    }

    /// Holds with absolute tolerance `tol` (strict inequalities need positive slack).
    pub fn holds(&self, values: &[f64], tol: f64) -> bool {
        let slack = self.slack(values);
        if self.strict {
            slack > 0.0
        } else {
            slack >= -tol
        }
    }
}

/// One linear requirement as written: `Σ terms ⋈ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    /// Left-hand side coefficients. Zero coefficients survive parsing and are
    /// dropped by [`normalize`].
    pub terms: BTreeMap<usize, f64>,
    pub relation: Relation,
    pub rhs: f64,
    pub line: usize,
}

impl LinearInequality {
    /// Canonical `≥`/`>` forms; an equality yields two non-strict forms.
    pub fn canonical_forms(&self) -> Vec<CanonicalInequality> {
        let coeffs = |sign: f64| -> BTreeMap<usize, f64> {
            self.terms
                .iter()
                .filter(|(_, &a)| a != 0.0)
                .map(|(&i, &a)| (i, sign * a))
                .collect()
        };
        let form = |sign: f64, strict: bool| CanonicalInequality {
            coeffs: coeffs(sign),
            bound: sign * self.rhs,
            strict,
        };
        match self.relation {
            Relation::Ge => vec![form(1.0, false)],
            Relation::Gt => vec![form(1.0, true)],
            Relation::Le => vec![form(-1.0, false)],
            Relation::Lt => vec![form(-1.0, true)],
            Relation::Eq => vec![form(1.0, false), form(-1.0, false)],
        }
    }

    /// The single canonical form of a normalized (`≥` or `>`) inequality.
    pub fn canonical(&self) -> CanonicalInequality {
        let mut forms = self.canonical_forms();
        debug_assert!(!forms.is_empty());
        forms.swap_remove(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Cnf,
    Linear,
    Empty,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::Cnf => "CNF",
            Dialect::Linear => "Linear",
            Dialect::Empty => "Empty",
        })
    }
}

/// Non-fatal findings, collected rather than printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    DuplicateLine { line: usize, first: usize },
    TautologyDropped { line: usize },
    TrivialConstraintDropped { line: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DuplicateLine { line, first } => {
                write!(f, "line {line}: duplicate of line {first}, dropped")
            }
            Warning::TautologyDropped { line } => write!(f, "line {line}: tautology, dropped"),
            Warning::TrivialConstraintDropped { line } => {
                write!(f, "line {line}: constraint has no variables and always holds, dropped")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementSet {
    pub dialect: Dialect,
    pub clauses: Vec<Clause>,
    pub inequalities: Vec<LinearInequality>,
    pub num_variables: usize,
    pub source: String,
    pub warnings: Vec<Warning>,
}

impl RequirementSet {
    pub fn empty(num_variables: usize) -> Self {
        RequirementSet {
            dialect: Dialect::Empty,
            clauses: Vec::new(),
            inequalities: Vec::new(),
            num_variables,
            source: String::new(),
            warnings: Vec::new(),
        }
    }

    /// Number of requirements (clauses or inequalities).
    pub fn len(&self) -> usize {
        match self.dialect {
            Dialect::Cnf => self.clauses.len(),
            Dialect::Linear => self.inequalities.len(),
            Dialect::Empty => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Highest referenced variable index plus one.
    pub fn referenced_variables(&self) -> usize {
        let clause_max = self
            .clauses
            .iter()
            .flat_map(|c| c.literals.iter().map(|l| l.variable + 1));
        let ineq_max = self
            .inequalities
            .iter()
            .flat_map(|q| q.terms.keys().map(|&i| i + 1));
        clause_max.chain(ineq_max).max().unwrap_or(0)
    }

    /// Equality of requirement content, ignoring line numbers, source text and warnings.
    pub fn same_structure(&self, other: &RequirementSet) -> bool {
        self.dialect == other.dialect
            && self.num_variables == other.num_variables
            && self.clauses.len() == other.clauses.len()
            && self.inequalities.len() == other.inequalities.len()
            && self
                .clauses
                .iter()
                .zip(&other.clauses)
                .all(|(a, b)| a.literals == b.literals)
            && self.inequalities.iter().zip(&other.inequalities).all(|(a, b)| {
                a.terms == b.terms && a.relation == b.relation && a.rhs.to_bits() == b.rhs.to_bits()
            })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LangError {
    #[error("line {line}, column {column}: syntax error: expected {expected}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
    },
    #[error("line {line}: mixed dialects (CNF clauses and linear inequalities in one file)")]
    MixedDialect { line: usize },
    #[error("line {line}: variable y_{index} out of range for {num_variables} variables")]
    VariableOutOfRange {
        line: usize,
        index: usize,
        num_variables: usize,
    },
    #[error("line {line}: constraint has no variables and can never hold")]
    DegenerateConstraint { line: usize },
}

impl LangError {
    pub fn line(&self) -> usize {
        match self {
            LangError::Syntax { line, .. }
            | LangError::MixedDialect { line }
            | LangError::VariableOutOfRange { line, .. }
            | LangError::DegenerateConstraint { line } => *line,
        }
    }
}
