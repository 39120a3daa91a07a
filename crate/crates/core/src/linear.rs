//! Correction for conjunctions of linear inequalities.
//!
//! Compilation runs Fourier–Motzkin elimination along a variable ordering,
//! from the last variable to the first. Every constraint (original or derived)
//! is attached to the step of its latest variable, so when the correction
//! reaches step `k` all earlier variables are fixed and the constraints of
//! step `k` reduce to an interval `[L_k, U_k]`. The derived constraints are
//! exactly what keeps that interval nonempty for every admissible prefix.
//!
//! After `k` eliminations, a derived constraint that combines more than
//! `k + 1` originals is redundant (Chernikov's rule) and is discarded before
//! it is formed.
//!
//! Correction clamps each variable into its interval in ordering order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lang::{CanonicalInequality, Dialect, RequirementSet};
use crate::vector::{check_input, Branch, CorrectedVector, InputError};

pub const DEFAULT_STRICT_EPSILON: f64 = 1e-6;
pub const DEFAULT_FM_CAP: usize = 10_000;
/// Residuals `0 ≥ b` with `b` above this are reported infeasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Relative size below which a summed coefficient counts as zero.
const CANCELLATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConfig {
    /// Processing order; `None` means ascending index.
    pub ordering: Option<Vec<usize>>,
    pub strict_epsilon: f64,
    pub fm_cap: usize,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig { ordering: None, strict_epsilon: DEFAULT_STRICT_EPSILON, fm_cap: DEFAULT_FM_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    /// Index into the normalized requirement set.
    Original { requirement: usize },
    /// Sum of a lower bound and an upper bound on an eliminated variable.
    Derived { lower: usize, upper: usize },
}

/// A plan constraint `Σ coeffs·y ≥ bound` (strict ones already tightened).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanConstraint {
    pub coeffs: BTreeMap<usize, f64>,
    pub bound: f64,
    pub origin: Origin,
    /// Original constraints this one is a positive combination of.
    history: BTreeSet<usize>,
}

impl PlanConstraint {
    pub fn slack(&self, y: &[f64]) -> f64 {
        self.coeffs.iter().map(|(&i, &a)| a * y[i]).sum::<f64>() - self.bound
    }

    pub fn as_canonical(&self) -> CanonicalInequality {
        CanonicalInequality { coeffs: self.coeffs.clone(), bound: self.bound, strict: false }
    }
}

/// `y_v ≥ constant + Σ terms` (lower) or `y_v ≤ constant + Σ terms` (upper)
/// over variables that come earlier in the ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub constraint: usize,
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Bound {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(i, c)| acc + c * y[i])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Step {
    pub variable: usize,
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
}

#[derive(Debug, Clone)]
pub struct EliminationPlan {
    pub num_variables: usize,
    pub ordering: Vec<usize>,
    /// All constraints: originals first (one per normalized inequality), then derived.
    pub constraints: Vec<PlanConstraint>,
    /// `steps[k]` handles `ordering[k]`.
    pub steps: Vec<Step>,
    pub derived_count: usize,
    pub strict_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("requirements are infeasible: elimination derived 0 >= {residual}")]
    Infeasible { residual: f64 },
    #[error("Fourier-Motzkin elimination exceeded the cap of {cap} derived constraints")]
    ComplexityExceeded { cap: usize },
    #[error("ordering must be a permutation of 0..{num_variables}")]
    BadOrdering { num_variables: usize },
    #[error("strict epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("expected linear requirements, got {0}")]
    WrongDialect(Dialect),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepSummary {
    pub variable: usize,
    pub lower: usize,
    pub upper: usize,
}

impl fmt::Display for StepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y_{} ({} lower, {} upper)", self.variable, self.lower, self.upper)
    }
}

/// Compiles a normalized linear set.
pub fn compile_linear(rs: &RequirementSet, config: &LinearConfig) -> Result<EliminationPlan, LinearError> {
    if rs.dialect != Dialect::Linear {
        return Err(LinearError::WrongDialect(rs.dialect));
    }
    if !(config.strict_epsilon.is_finite() && config.strict_epsilon > 0.0) {
        return Err(LinearError::BadEpsilon(config.strict_epsilon));
    }
    let n = rs.num_variables;
    let ordering = match &config.ordering {
        Some(o) => {
            let mut seen = vec![false; n];
            if o.len() != n || o.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
                return Err(LinearError::BadOrdering { num_variables: n });
            }
            o.clone()
        }
        None => (0..n).collect(),
    };
    let mut position = vec![0; n];
    for (k, &v) in ordering.iter().enumerate() {
        position[v] = k;
    }
    let latest = |coeffs: &BTreeMap<usize, f64>| coeffs.keys().map(|&v| position[v]).max();

    let mut constraints = Vec::new();
    let mut at_step: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (requirement, q) in rs.inequalities.iter().enumerate() {
        let form = q.canonical();
        let bound = if form.strict { form.bound + config.strict_epsilon } else { form.bound };
        let k = latest(&form.coeffs).expect("normalized inequalities reference a variable");
        at_step[k].push(constraints.len());
        let id = constraints.len();
        constraints.push(PlanConstraint {
            coeffs: form.coeffs,
            bound,
            origin: Origin::Original { requirement },
            history: BTreeSet::from([id]),
        });
    }

    let mut derived_count = 0;
    let mut steps = vec![Step::default(); n];
    for k in (0..n).rev() {
        let v = ordering[k];
        let mut step = Step { variable: v, lower: Vec::new(), upper: Vec::new() };
        for &id in &at_step[k] {
            let c = &constraints[id];
            let a = c.coeffs[&v];
            let bound = Bound {
                constraint: id,
                constant: c.bound / a,
                terms: c
                    .coeffs
                    .iter()
                    .filter(|(&i, _)| i != v)
                    .map(|(&i, &ai)| (i, -ai / a))
                    .collect(),
            };
            if a > 0.0 {
                step.lower.push(bound);
            } else {
                step.upper.push(bound);
            }
        }

        // lower: y_v ≥ l(y), upper: y_v ≤ u(y)  ⟹  u(y) − l(y) ≥ 0
        for lo in &step.lower {
            for up in &step.upper {
                let history: BTreeSet<usize> = constraints[lo.constraint]
                    .history
                    .union(&constraints[up.constraint].history)
                    .copied()
                    .collect();
                if history.len() > n - k + 1 {
                    continue;
                }
                derived_count += 1;
                if derived_count > config.fm_cap {
                    return Err(LinearError::ComplexityExceeded { cap: config.fm_cap });
                }
                // (sum, magnitude of the addends) per variable
                let mut sums: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
                for &(i, c) in &up.terms {
                    let e = sums.entry(i).or_insert((0.0, 0.0));
                    e.0 += c;
                    e.1 += c.abs();
                }
                for &(i, c) in &lo.terms {
                    let e = sums.entry(i).or_insert((0.0, 0.0));
                    e.0 -= c;
                    e.1 += c.abs();
                }
                // cancellation leaves rounding residue, not a real coefficient
                let mut coeffs: BTreeMap<usize, f64> = sums
                    .into_iter()
                    .filter(|&(_, (sum, mag))| sum.abs() > CANCELLATION * mag)
                    .map(|(i, (sum, _))| (i, sum))
                    .collect();
                let bound = lo.constant - up.constant;
                let Some(j) = latest(&coeffs) else {
                    if bound > FEASIBILITY_TOLERANCE {
                        return Err(LinearError::Infeasible { residual: bound });
                    }
                    continue;
                };
                // leading coefficient ±1 so equal directions compare exactly
                let scale = coeffs[&ordering[j]].abs();
                for c in coeffs.values_mut() {
                    *c /= scale;
                }
                let bound = bound / scale;
                // `a` may stand in for `b` only if its lineage is no larger,
                // otherwise the redundancy rule above could prune products
                // that `b` would have kept.
                let covers = |a: &PlanConstraint, h: &BTreeSet<usize>, bound: f64| {
                    a.bound >= bound && a.history.is_subset(h)
                };
                if at_step[j].iter().any(|&id| {
                    let c = &constraints[id];
                    c.coeffs == coeffs && covers(c, &history, bound)
                }) {
                    continue;
                }
                let candidate = PlanConstraint {
                    coeffs,
                    bound,
                    origin: Origin::Derived { lower: lo.constraint, upper: up.constraint },
                    history,
                };
                let replace = at_step[j].iter().copied().find(|&id| {
                    let c = &constraints[id];
                    matches!(c.origin, Origin::Derived { .. })
                        && c.coeffs == candidate.coeffs
                        && covers(&candidate, &c.history, c.bound)
                });
                match replace {
                    Some(id) => constraints[id] = candidate,
                    None => {
                        at_step[j].push(constraints.len());
                        constraints.push(candidate);
                    }
                }
            }
        }
        steps[k] = step;
    }

    Ok(EliminationPlan { num_variables: n, ordering, constraints, steps, derived_count, strict_epsilon: config.strict_epsilon })
}

/// `(L, U, argmax lower id, argmin upper id)`; ties go to the lowest id
/// because bounds are stored in increasing id order.
pub(crate) fn interval(step: &Step, y: &[f64]) -> (f64, f64, Option<usize>, Option<usize>) {
    let mut lo = f64::NEG_INFINITY;
    let mut lo_id = None;
    for b in &step.lower {
        let v = b.eval(y);
        if v > lo {
            lo = v;
            lo_id = Some(b.constraint);
        }
    }
    let mut hi = f64::INFINITY;
    let mut hi_id = None;
    for b in &step.upper {
        let v = b.eval(y);
        if v < hi {
            hi = v;
            hi_id = Some(b.constraint);
        }
    }
    (lo, hi, lo_id, hi_id)
}

impl EliminationPlan {
    pub fn original_count(&self) -> usize {
        self.constraints
            .iter()
            .take_while(|c| matches!(c.origin, Origin::Original { .. }))
            .count()
    }

    pub fn derived(&self) -> &[PlanConstraint] {
        &self.constraints[self.original_count()..]
    }

    pub fn step_summaries(&self) -> Vec<StepSummary> {
        self.steps
            .iter()
            .map(|s| StepSummary { variable: s.variable, lower: s.lower.len(), upper: s.upper.len() })
            .collect()
    }

    /// Sequential clamp `ŷ_v = min(max(y_v, L), U)` in ordering order.
    /// An input that already satisfies every original constraint is returned as is.
    pub fn apply(&self, y: &[f64]) -> Result<CorrectedVector, InputError> {
        check_input(y, self.num_variables)?;
        let mut out = y.to_vec();
        let mut trace = vec![Branch::Kept; y.len()];
        if self.constraints[..self.original_count()].iter().all(|c| c.slack(y) >= 0.0) {
            return Ok(CorrectedVector { values: out, trace });
        }
        for step in &self.steps {
            let v = step.variable;
            let (lo, hi, lo_id, hi_id) = interval(step, &out);
            let raised = out[v].max(lo);
            let clamped = raised.min(hi);
            if clamped != out[v] || raised != out[v] {
                trace[v] = if clamped < raised || lo > hi {
                    Branch::ClampedUpper { constraint: hi_id.expect("finite upper bound") }
                } else {
                    Branch::ClampedLower { constraint: lo_id.expect("finite lower bound") }
                };
            }
            out[v] = clamped;
        }
        Ok(CorrectedVector { values: out, trace })
    }

    /// Lowest `U − L` over the steps for this input, evaluated along the
    /// correction path. Negative only through rounding.
    pub fn min_interval_width(&self, y: &[f64]) -> f64 {
        let mut out = y.to_vec();
        let mut width = f64::INFINITY;
        for step in &self.steps {
            let (lo, hi, _, _) = interval(step, &out);
            width = width.min(hi - lo);
            out[step.variable] = out[step.variable].max(lo).min(hi);
        }
        width
    }
}
