//! Compiled shields: parse, normalize and compile once, then correct any
//! number of prediction vectors.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cnf::{self, compile_cnf, CnfEngine, CnfError, CnfKind, CnfPlan, EngineChoice};
use crate::lang::{self, normalize, parse_requirements, Dialect, LangError, RequirementSet};
use crate::linear::{self, compile_linear, EliminationPlan, LinearConfig, LinearError};
use crate::vector::{check_input, CorrectedVector, InputError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Identity,
    Hierarchy,
    General,
    Linear,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Identity => "identity",
            Engine::Hierarchy => "hierarchy",
            Engine::General => "general",
            Engine::Linear => "linear",
        })
    }
}

/// Engine requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum EngineOverride {
    #[default]
    Auto,
    Hierarchy,
    General,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShieldConfig {
    pub engine: EngineOverride,
    pub linear: LinearConfig,
    /// Absolute tolerance when checking linear requirements.
    pub tolerance: f64,
}

impl Default for ShieldConfig {
    fn default() -> Self {
        ShieldConfig { engine: EngineOverride::Auto, linear: LinearConfig::default(), tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub enum ShieldPlan {
    Identity { num_variables: usize },
    Cnf(CnfPlan),
    Linear(EliminationPlan),
}

impl ShieldPlan {
    pub fn num_variables(&self) -> usize {
        match self {
            ShieldPlan::Identity { num_variables } => *num_variables,
            ShieldPlan::Cnf(p) => p.num_variables,
            ShieldPlan::Linear(p) => p.num_variables,
        }
    }

    pub fn engine(&self) -> Engine {
        match self {
            ShieldPlan::Identity { .. } => Engine::Identity,
            ShieldPlan::Cnf(p) => match p.engine() {
                CnfEngine::Hierarchy => Engine::Hierarchy,
                CnfEngine::General => Engine::General,
            },
            ShieldPlan::Linear(_) => Engine::Linear,
        }
    }

    pub fn apply(&self, p: &[f64]) -> Result<CorrectedVector, InputError> {
        match self {
            ShieldPlan::Identity { num_variables } => {
                check_input(p, *num_variables)?;
                Ok(CorrectedVector::identity(p))
            }
            ShieldPlan::Cnf(plan) => plan.apply(p),
            ShieldPlan::Linear(plan) => plan.apply(p),
        }
    }
}

#[derive(Debug, Error)]
pub enum ShieldError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error("engine `{engine:?}` cannot handle {dialect} requirements")]
    EngineMismatch { engine: EngineOverride, dialect: Dialect },
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: InputError,
    },
}

/// A compiled shield together with the normalized requirements it enforces.
#[derive(Debug, Clone)]
pub struct Shield {
    requirements: RequirementSet,
    plan: ShieldPlan,
    tolerance: f64,
}

/// Builds a shield from a requirements file with the default configuration.
pub fn build_shield_layer(num_variables: usize, requirements_path: impl AsRef<Path>) -> Result<Shield, ShieldError> {
    Shield::from_path(requirements_path, num_variables, &ShieldConfig::default())
}

impl Shield {
    pub fn from_path(path: impl AsRef<Path>, num_variables: usize, config: &ShieldConfig) -> Result<Self, ShieldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ShieldError::Io { path: path.display().to_string(), source })?;
        Self::from_text(&text, num_variables, config)
    }

    pub fn from_text(text: &str, num_variables: usize, config: &ShieldConfig) -> Result<Self, ShieldError> {
        let parsed = parse_requirements(text, num_variables)?;
        Self::compile(&normalize(&parsed)?, config)
    }

    /// Compiles an already-normalized set.
    pub fn compile(rs: &RequirementSet, config: &ShieldConfig) -> Result<Self, ShieldError> {
        let mismatch = || ShieldError::EngineMismatch { engine: config.engine, dialect: rs.dialect };
        let plan = match rs.dialect {
            Dialect::Empty => ShieldPlan::Identity { num_variables: rs.num_variables },
            Dialect::Cnf => {
                let choice = match config.engine {
                    EngineOverride::Auto => EngineChoice::Auto,
                    EngineOverride::Hierarchy => EngineChoice::Hierarchy,
                    EngineOverride::General => EngineChoice::General,
                    EngineOverride::Linear => return Err(mismatch()),
                };
                ShieldPlan::Cnf(compile_cnf(rs, choice)?)
            }
            Dialect::Linear => match config.engine {
                EngineOverride::Auto | EngineOverride::Linear => {
                    ShieldPlan::Linear(compile_linear(rs, &config.linear)?)
                }
                _ => return Err(mismatch()),
            },
        };
        Ok(Shield { requirements: rs.clone(), plan, tolerance: config.tolerance })
    }

    pub fn requirements(&self) -> &RequirementSet {
        &self.requirements
    }

    pub fn plan(&self) -> &ShieldPlan {
        &self.plan
    }

    pub fn num_variables(&self) -> usize {
        self.plan.num_variables()
    }

    pub fn engine(&self) -> Engine {
        self.plan.engine()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn apply(&self, p: &[f64]) -> Result<CorrectedVector, ShieldError> {
        Ok(self.plan.apply(p)?)
    }

    /// Corrects rows in parallel; output order matches input order.
    pub fn apply_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<CorrectedVector>, ShieldError> {
        rows.par_iter()
            .enumerate()
            .map(|(row, p)| self.plan.apply(p).map_err(|source| ShieldError::Row { row, source }))
            .collect()
    }

    /// Per-requirement satisfaction of `p` (CNF degree convention or linear tolerance).
    pub fn satisfaction(&self, p: &[f64]) -> Vec<bool> {
        requirement_satisfaction(&self.requirements, p, self.tolerance)
    }

    pub fn is_compliant(&self, p: &[f64]) -> bool {
        self.satisfaction(p).iter().all(|&s| s)
    }

    /// One line per requirement, as rendered in reports.
    pub fn requirement_texts(&self) -> Vec<(usize, String)> {
        match self.requirements.dialect {
            Dialect::Cnf => self
                .requirements
                .clauses
                .iter()
                .map(|c| (c.line, lang::render_clause(c)))
                .collect(),
            Dialect::Linear => self
                .requirements
                .inequalities
                .iter()
                .map(|q| (q.line, lang::render_inequality(q)))
                .collect(),
            Dialect::Empty => Vec::new(),
        }
    }

    pub fn summary(&self) -> PlanSummary {
        let rs = &self.requirements;
        let (derived_constraints, ordering, steps) = match &self.plan {
            ShieldPlan::Linear(p) => (p.derived_count, p.ordering.clone(), p.step_summaries()),
            ShieldPlan::Cnf(CnfPlan { kind: CnfKind::Hierarchy(h), .. }) => (0, h.topo_order.clone(), Vec::new()),
            _ => (0, Vec::new(), Vec::new()),
        };
        PlanSummary {
            dialect: rs.dialect,
            engine: self.engine(),
            num_variables: self.num_variables(),
            requirements: rs.len(),
            derived_constraints,
            ordering,
            steps,
        }
    }
}

pub(crate) fn requirement_satisfaction(rs: &RequirementSet, p: &[f64], tol: f64) -> Vec<bool> {
    match rs.dialect {
        Dialect::Cnf => rs.clauses.iter().map(|c| cnf::clause_holds(c, p)).collect(),
        Dialect::Linear => rs.inequalities.iter().map(|q| q.canonical().holds(p, tol)).collect(),
        Dialect::Empty => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanSummary {
    pub dialect: Dialect,
    pub engine: Engine,
    pub num_variables: usize,
    pub requirements: usize,
    pub derived_constraints: usize,
    /// Linear: processing order. Hierarchy: children-before-parents order.
    pub ordering: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<linear::StepSummary>,
}

impl fmt::Display for PlanSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let noun = match self.dialect {
            Dialect::Cnf => "clauses",
            Dialect::Linear => "inequalities",
            Dialect::Empty => "requirements",
        };
        writeln!(f, "dialect: {}", self.dialect)?;
        writeln!(f, "engine: {}", self.engine)?;
        writeln!(f, "variables: {}", self.num_variables)?;
        writeln!(f, "{noun}: {}", self.requirements)?;
        if self.dialect == Dialect::Linear {
            writeln!(f, "derived constraints: {}", self.derived_constraints)?;
        }
        if !self.ordering.is_empty() {
            let order: Vec<String> = self.ordering.iter().map(|v| format!("y_{v}")).collect();
            writeln!(f, "ordering: {}", order.join(", "))?;
        }
        for s in self.steps.iter().filter(|s| s.lower + s.upper > 0) {
            writeln!(f, "  step {s}")?;
        }
        Ok(())
    }
}
