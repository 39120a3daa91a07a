use serde::Serialize;
use thiserror::Error;

/// The piecewise-linear branch an engine took for one output variable.
///
/// Doubles as the forward trace consumed by [`crate::grad::vjp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Branch {
    /// Output equals input.
    Kept,
    /// CNF general engine: output is `1 − input`.
    Flipped,
    /// Hierarchy engine: output is the input of descendant `source`.
    Raised { source: usize },
    /// Linear engine: clamped up to the lower bound of plan constraint `constraint`.
    ClampedLower { constraint: usize },
    /// Linear engine: clamped down to the upper bound of plan constraint `constraint`.
    ClampedUpper { constraint: usize },
}

impl Branch {
    pub fn is_kept(self) -> bool {
        self == Branch::Kept
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedVector {
    pub values: Vec<f64>,
    pub trace: Vec<Branch>,
}

impl CorrectedVector {
    pub fn identity(p: &[f64]) -> Self {
        CorrectedVector { values: p.to_vec(), trace: vec![Branch::Kept; p.len()] }
    }

    pub fn changed(&self) -> usize {
        self.trace.iter().filter(|b| !b.is_kept()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("expected {expected} values, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },
}

pub(crate) fn check_input(p: &[f64], n: usize) -> Result<(), InputError> {
    if p.len() != n {
        return Err(InputError::WrongLength { expected: n, found: p.len() });
    }
    match p.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(InputError::NonFinite { index }),
        None => Ok(()),
    }
}
