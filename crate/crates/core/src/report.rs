//! Compliance reports: per-requirement violation counts before and after
//! correction plus per-row correction distances, serialized as JSON.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::batch::PredictionBatch;
use crate::shield::{PlanSummary, Shield, ShieldError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Apply,
    Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementCounts {
    pub index: usize,
    pub line: usize,
    pub requirement: String,
    pub violations_before: usize,
    pub violations_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowStats {
    pub row: usize,
    pub l1: f64,
    pub linf: f64,
    pub changed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub rows: usize,
    pub rows_compliant_before: usize,
    pub rows_corrected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionReport {
    pub schema_version: u32,
    pub mode: Mode,
    pub plan: PlanSummary,
    pub totals: Totals,
    pub requirements: Vec<RequirementCounts>,
    pub rows: Vec<RowStats>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("batch has {found} columns but the shield expects {expected}")]
    Width { expected: usize, found: usize },
    #[error(transparent)]
    Shield(#[from] ShieldError),
    #[error("internal guarantee violated: requirement {index} (line {line}) still fails on {count} corrected rows")]
    GuaranteeViolated { index: usize, line: usize, count: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorrectionReport {
    pub fn total_violations_after(&self) -> usize {
        self.requirements.iter().map(|r| r.violations_after).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_width(shield: &Shield, batch: &PredictionBatch) -> Result<(), ReportError> {
    if batch.width() != shield.num_variables() {
        return Err(ReportError::Width { expected: shield.num_variables(), found: batch.width() });
    }
    Ok(())
}

fn count(shield: &Shield, rows: &[Vec<f64>]) -> Vec<usize> {
    let per_row: Vec<Vec<bool>> = rows.par_iter().map(|r| shield.satisfaction(r)).collect();
    let mut counts = vec![0; shield.requirements().len()];
    for sat in &per_row {
        for (c, &ok) in counts.iter_mut().zip(sat) {
            if !ok {
                *c += 1;
            }
        }
    }
    counts
}

fn assemble(
    shield: &Shield,
    mode: Mode,
    before: &[Vec<f64>],
    after: &[Vec<f64>],
    changed: Vec<usize>,
) -> CorrectionReport {
    let violations_before = count(shield, before);
    let violations_after = if mode == Mode::Check { violations_before.clone() } else { count(shield, after) };
    let requirements = shield
        .requirement_texts()
        .into_iter()
        .enumerate()
        .map(|(index, (line, requirement))| RequirementCounts {
            index,
            line,
            requirement,
            violations_before: violations_before[index],
            violations_after: violations_after[index],
        })
        .collect();
    let rows: Vec<RowStats> = before
        .iter()
        .zip(after)
        .zip(changed)
        .enumerate()
        .map(|(row, ((p, q), changed))| {
            let (l1, linf) = p.iter().zip(q).fold((0.0f64, 0.0f64), |(l1, linf), (a, b)| {
                let d = (a - b).abs();
                (l1 + d, linf.max(d))
            });
            RowStats { row, l1, linf, changed }
        })
        .collect();
    let rows_compliant_before = before.par_iter().filter(|p| shield.is_compliant(p)).count();
    CorrectionReport {
        schema_version: SCHEMA_VERSION,
        mode,
        plan: shield.summary(),
        totals: Totals {
            rows: before.len(),
            rows_compliant_before,
            rows_corrected: rows.iter().filter(|r| r.changed > 0).count(),
        },
        requirements,
        rows,
    }
}

/// Counts violations without correcting anything.
pub fn check_batch(shield: &Shield, batch: &PredictionBatch) -> Result<CorrectionReport, ReportError> {
    check_width(shield, batch)?;
    let zeros = vec![0; batch.len()];
    Ok(assemble(shield, Mode::Check, &batch.rows, &batch.rows, zeros))
}

/// Corrects every row and re-checks the output; any remaining violation is
/// returned as [`ReportError::GuaranteeViolated`].
pub fn correct_batch(
    shield: &Shield,
    batch: &PredictionBatch,
) -> Result<(PredictionBatch, CorrectionReport), ReportError> {
    check_width(shield, batch)?;
    let corrected = shield.apply_rows(&batch.rows)?;
    let changed: Vec<usize> = corrected
        .iter()
        .zip(&batch.rows)
        .map(|(c, p)| c.values.iter().zip(p).filter(|(a, b)| a.to_bits() != b.to_bits()).count())
        .collect();
    let out = PredictionBatch {
        names: batch.names.clone(),
        rows: corrected.into_iter().map(|c| c.values).collect(),
    };
    let report = assemble(shield, Mode::Apply, &batch.rows, &out.rows, changed);
    if let Some(r) = report.requirements.iter().find(|r| r.violations_after > 0) {
        return Err(ReportError::GuaranteeViolated { index: r.index, line: r.line, count: r.violations_after });
    }
    Ok((out, report))
}

pub fn write_report(report: &CorrectionReport, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    std::fs::write(path, report.to_json() + "\n")
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}
