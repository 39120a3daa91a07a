//! Brute-force reference implementations for testing the engines at small
//! scale. Nothing here calls into the engines: evaluation, reachability and
//! sampling are all written out again, deliberately naive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lang::{CanonicalInequality, Clause};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_cnf_variables: usize,
    pub max_linear_variables: usize,
    /// Rejection-sampling attempts.
    pub max_samples: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_cnf_variables: 20, max_linear_variables: 8, max_samples: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{variables} variables exceed the oracle budget of {budget}")]
    BudgetExceeded { variables: usize, budget: usize },
    #[error("clause set has no model")]
    Unsatisfiable,
    #[error("edge list has a cycle")]
    CyclicGraph,
    #[error("no point satisfying the originals found in {attempts} attempts")]
    SamplerStarved { attempts: usize },
}

fn is_model(clauses: &[Clause], assignment: &[bool]) -> bool {
    for clause in clauses {
        let mut sat = false;
        for lit in &clause.literals {
            if assignment[lit.variable] == lit.positive {
                sat = true;
                break;
            }
        }
        if !sat {
            return false;
        }
    }
    true
}

/// Model of `clauses` closest to `target` in Hamming distance, by exhaustive
/// enumeration. Ties go to the lexicographically smallest model (`false <
/// true`, `y_0` most significant). Returns `(model, flips)`.
pub fn min_flip_model(
    clauses: &[Clause],
    target: &[bool],
    budget: &OracleBudget,
) -> Result<(Vec<bool>, usize), OracleError> {
    let n = target.len();
    if n > budget.max_cnf_variables {
        return Err(OracleError::BudgetExceeded { variables: n, budget: budget.max_cnf_variables });
    }
    let mut best: Option<(Vec<bool>, usize)> = None;
    let mut assignment = vec![false; n];
    for code in 0u64..(1u64 << n) {
        for (k, slot) in assignment.iter_mut().enumerate() {
            *slot = (code >> (n - 1 - k)) & 1 == 1;
        }
        if !is_model(clauses, &assignment) {
            continue;
        }
        let flips = assignment.iter().zip(target).filter(|(a, b)| a != b).count();
        if best.as_ref().is_none_or(|(_, f)| flips < *f) {
            best = Some((assignment.clone(), flips));
        }
    }
    best.ok_or(OracleError::Unsatisfiable)
}

/// Whether any model of `clauses` agrees with every fixed `(variable, value)`.
pub fn extends_to_model(
    clauses: &[Clause],
    n: usize,
    fixed: &[(usize, bool)],
    budget: &OracleBudget,
) -> Result<bool, OracleError> {
    if n > budget.max_cnf_variables {
        return Err(OracleError::BudgetExceeded { variables: n, budget: budget.max_cnf_variables });
    }
    let mut assignment = vec![false; n];
    for code in 0u64..(1u64 << n) {
        for (k, slot) in assignment.iter_mut().enumerate() {
            *slot = (code >> k) & 1 == 1;
        }
        if fixed.iter().all(|&(v, b)| assignment[v] == b) && is_model(clauses, &assignment) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// For every variable, the max of `p` over itself and everything that can
/// reach it along `edges` (child → parent). Naive DFS per variable.
pub fn hierarchy_closure_reference(edges: &[(usize, usize)], p: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = p.len();
    let reaches = |from: usize, to: usize| -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; n];
        while let Some(u) = stack.pop() {
            for &(a, b) in edges {
                if a == u && !seen[b] {
                    if b == to {
                        return true;
                    }
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        false
    };
    if (0..n).any(|k| reaches(k, k)) {
        return Err(OracleError::CyclicGraph);
    }
    Ok((0..n)
        .map(|k| {
            (0..n)
                .filter(|&d| d == k || reaches(d, k))
                .map(|d| p[d])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerReport {
    pub attempts: usize,
    pub accepted: usize,
    /// `(point, index into derived)` pairs that violate a derived constraint.
    pub counterexamples: Vec<(Vec<f64>, usize)>,
}

impl SamplerReport {
    pub fn sound(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn satisfies(q: &CanonicalInequality, y: &[f64], tol: f64) -> bool {
    let mut lhs = 0.0;
    for (&i, &a) in &q.coeffs {
        lhs += a * y[i];
    }
    if q.strict {
        lhs > q.bound
    } else {
        lhs >= q.bound - tol
    }
}

/// Rejection-samples points in `[-half_width, half_width]^n` that satisfy
/// every original, and checks each accepted point against every derived
/// constraint (tolerance 1e-9).
pub fn implied_constraint_sampler(
    originals: &[CanonicalInequality],
    derived: &[CanonicalInequality],
    n: usize,
    half_width: f64,
    seed: u64,
    budget: &OracleBudget,
) -> Result<SamplerReport, OracleError> {
    if n > budget.max_linear_variables {
        return Err(OracleError::BudgetExceeded { variables: n, budget: budget.max_linear_variables });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SamplerReport { attempts: 0, accepted: 0, counterexamples: Vec::new() };
    let mut y = vec![0.0; n];
    for _ in 0..budget.max_samples {
        report.attempts += 1;
        for v in y.iter_mut() {
            *v = rng.gen_range(-half_width..=half_width);
        }
        if !originals.iter().all(|q| satisfies(q, &y, 0.0)) {
            continue;
        }
        report.accepted += 1;
        for (d, q) in derived.iter().enumerate() {
            if !satisfies(q, &y, 1e-9) {
                report.counterexamples.push((y.clone(), d));
            }
        }
    }
    if report.accepted == 0 && !derived.is_empty() {
        return Err(OracleError::SamplerStarved { attempts: report.attempts });
    }
    Ok(report)
}
