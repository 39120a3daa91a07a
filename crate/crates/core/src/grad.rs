//! Vector-Jacobian products of the correction maps.
//!
//! Every engine is piecewise linear in its input. The forward pass records
//! which piece was active for each output ([`Branch`]); the backward pass
//! differentiates that piece. Discrete decisions (which variables flip, which
//! bound is active) are held fixed, so at a branch boundary the result is the
//! subgradient of the recorded branch.

use thiserror::Error;

use crate::cnf::CnfKind;
use crate::shield::{Engine, ShieldPlan};
use crate::vector::{Branch, CorrectedVector, InputError};

#[derive(Debug, Clone, PartialEq)]
pub struct VjpTrace {
    pub engine: Engine,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GradError {
    #[error("trace does not match plan: {0}")]
    TraceMismatch(String),
    #[error("cotangent has {found} entries, expected {expected}")]
    CotangentLength { expected: usize, found: usize },
    #[error("input {index} is within the stencil of a branch boundary")]
    BoundaryTooClose { index: usize },
    #[error(transparent)]
    Input(#[from] InputError),
}

pub fn apply_with_trace(plan: &ShieldPlan, p: &[f64]) -> Result<(CorrectedVector, VjpTrace), InputError> {
    let out = plan.apply(p)?;
    let trace = VjpTrace { engine: plan.engine(), branches: out.trace.clone() };
    Ok((out, trace))
}

fn validate(plan: &ShieldPlan, trace: &VjpTrace) -> Result<(), GradError> {
    let mismatch = |msg: String| Err(GradError::TraceMismatch(msg));
    if trace.engine != plan.engine() {
        return mismatch(format!("trace from {} engine, plan uses {}", trace.engine, plan.engine()));
    }
    let n = plan.num_variables();
    if trace.branches.len() != n {
        return mismatch(format!("{} branches for {n} variables", trace.branches.len()));
    }
    for (k, &b) in trace.branches.iter().enumerate() {
        let ok = match (plan, b) {
            (_, Branch::Kept) => true,
            (ShieldPlan::Cnf(c), Branch::Flipped) => matches!(c.kind, CnfKind::General(_)),
            (ShieldPlan::Cnf(c), Branch::Raised { source }) => match &c.kind {
                CnfKind::Hierarchy(h) => h.descendants[k].binary_search(&source).is_ok(),
                _ => false,
            },
            (ShieldPlan::Linear(l), Branch::ClampedLower { constraint }) => l
                .steps
                .iter()
                .any(|s| s.variable == k && s.lower.iter().any(|b| b.constraint == constraint)),
            (ShieldPlan::Linear(l), Branch::ClampedUpper { constraint }) => l
                .steps
                .iter()
                .any(|s| s.variable == k && s.upper.iter().any(|b| b.constraint == constraint)),
            _ => false,
        };
        if !ok {
            return mismatch(format!("branch {b:?} is impossible for y_{k}"));
        }
    }
    Ok(())
}

/// `cotangentᵀ · J` for the branch recorded in `trace`.
pub fn vjp(plan: &ShieldPlan, trace: &VjpTrace, cotangent: &[f64]) -> Result<Vec<f64>, GradError> {
    validate(plan, trace)?;
    let n = plan.num_variables();
    if cotangent.len() != n {
        return Err(GradError::CotangentLength { expected: n, found: cotangent.len() });
    }
    let mut grad = vec![0.0; n];
    match plan {
        ShieldPlan::Identity { .. } => grad.copy_from_slice(cotangent),
        ShieldPlan::Cnf(_) => {
            for (k, &b) in trace.branches.iter().enumerate() {
                match b {
                    Branch::Kept => grad[k] += cotangent[k],
                    Branch::Flipped => grad[k] -= cotangent[k],
                    Branch::Raised { source } => grad[source] += cotangent[k],
                    _ => unreachable!("validated"),
                }
            }
        }
        ShieldPlan::Linear(l) => {
            // Each clamped output is an affine function of earlier corrected
            // outputs; walk the steps backwards accumulating into them.
            let mut upstream = cotangent.to_vec();
            for step in l.steps.iter().rev() {
                let v = step.variable;
                let g = upstream[v];
                let bound = match trace.branches[v] {
                    Branch::Kept => {
                        grad[v] += g;
                        continue;
                    }
                    Branch::ClampedLower { constraint } => {
                        step.lower.iter().find(|b| b.constraint == constraint)
                    }
                    Branch::ClampedUpper { constraint } => {
                        step.upper.iter().find(|b| b.constraint == constraint)
                    }
                    _ => unreachable!("validated"),
                };
                for &(i, c) in &bound.expect("validated").terms {
                    upstream[i] += c * g;
                }
            }
        }
    }
    Ok(grad)
}

/// Outcome of comparing [`vjp`] with central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    /// Max over Jacobian entries of `|fd − vjp| / max(1, |vjp|)`.
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks the full Jacobian at `p` against central differences with step `h`.
///
/// Before differencing, the branch trace is probed at `p ± h·e_i` and
/// `p ± 10h·e_i`; any change means `p` sits too close to a kink and the check
/// is skipped with [`GradError::BoundaryTooClose`].
pub fn finite_difference_check(plan: &ShieldPlan, p: &[f64], h: f64, tolerance: f64) -> Result<FdReport, GradError> {
    let (_, trace) = apply_with_trace(plan, p)?;
    let n = p.len();
    let shifted = |i: usize, delta: f64| {
        let mut q = p.to_vec();
        q[i] += delta;
        q
    };
    for i in 0..n {
        for delta in [h, -h, 10.0 * h, -10.0 * h] {
            let (_, t) = apply_with_trace(plan, &shifted(i, delta))?;
            if t.branches != trace.branches {
                return Err(GradError::BoundaryTooClose { index: i });
            }
        }
    }

    let mut jacobian = vec![vec![0.0; n]; n];
    let mut unit = vec![0.0; n];
    for (j, row) in jacobian.iter_mut().enumerate() {
        unit[j] = 1.0;
        *row = vjp(plan, &trace, &unit)?;
        unit[j] = 0.0;
    }

    let mut worst: f64 = 0.0;
    for i in 0..n {
        let up = shifted(i, h);
        let down = shifted(i, -h);
        // the representable step, not 2h
        let span = up[i] - down[i];
        let plus = plan.apply(&up)?.values;
        let minus = plan.apply(&down)?.values;
        for j in 0..n {
            let fd = (plus[j] - minus[j]) / span;
            let analytic = jacobian[j][i];
            worst = worst.max((fd - analytic).abs() / analytic.abs().max(1.0));
        }
    }
    Ok(FdReport { max_relative_error: worst, tolerance, passed: worst <= tolerance })
}
