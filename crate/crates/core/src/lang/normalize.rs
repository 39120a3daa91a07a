use std::collections::BTreeMap;

use super::{
    CanonicalInequality, Clause, Dialect, LangError, LinearInequality, Relation, RequirementSet,
    Warning,
};

/// Canonicalizes a parsed set.
///
/// CNF: literals sorted by variable with duplicates removed, tautologies and
/// duplicate clauses dropped. Linear: every inequality rewritten as
/// `Σ a·y ≥ b` (or `>`), equalities split in two, zero coefficients and
/// duplicates dropped. A set with no surviving requirement becomes
/// [`Dialect::Empty`]. Idempotent.
pub fn normalize(rs: &RequirementSet) -> Result<RequirementSet, LangError> {
    let mut out = RequirementSet {
        dialect: rs.dialect,
        clauses: Vec::new(),
        inequalities: Vec::new(),
        num_variables: rs.num_variables,
        source: rs.source.clone(),
        warnings: rs.warnings.clone(),
    };
    match rs.dialect {
        Dialect::Cnf => normalize_cnf(rs, &mut out),
        Dialect::Linear => normalize_linear(rs, &mut out)?,
        Dialect::Empty => {}
    }
    if out.clauses.is_empty() && out.inequalities.is_empty() {
        out.dialect = Dialect::Empty;
    }
    Ok(out)
}

fn normalize_cnf(rs: &RequirementSet, out: &mut RequirementSet) {
    let mut seen: BTreeMap<Vec<super::Literal>, usize> = BTreeMap::new();
    for clause in &rs.clauses {
        let mut literals = clause.literals.clone();
        literals.sort();
        literals.dedup();
        let tautology = literals
            .windows(2)
            .any(|w| w[0].variable == w[1].variable);
        if tautology {
            out.warnings.push(Warning::TautologyDropped { line: clause.line });
            continue;
        }
        if let Some(&first) = seen.get(&literals) {
            out.warnings.push(Warning::DuplicateLine { line: clause.line, first });
            continue;
        }
        seen.insert(literals.clone(), clause.line);
        out.clauses.push(Clause { literals, line: clause.line });
    }
}

fn normalize_linear(rs: &RequirementSet, out: &mut RequirementSet) -> Result<(), LangError> {
    let mut seen: Vec<(CanonicalInequality, usize)> = Vec::new();
    for q in &rs.inequalities {
        for mut form in q.canonical_forms() {
            // -0.0 → 0.0 so rendering never prints "-0"
            form.bound += 0.0;
            for a in form.coeffs.values_mut() {
                *a += 0.0;
            }
            if form.coeffs.is_empty() {
                let holds = if form.strict { form.bound < 0.0 } else { form.bound <= 0.0 };
                if holds {
                    out.warnings.push(Warning::TrivialConstraintDropped { line: q.line });
                    continue;
                }
                return Err(LangError::DegenerateConstraint { line: q.line });
            }
            if let Some((_, first)) = seen.iter().find(|(f, _)| same_form(f, &form)) {
                out.warnings.push(Warning::DuplicateLine { line: q.line, first: *first });
                continue;
            }
            seen.push((form.clone(), q.line));
            out.inequalities.push(LinearInequality {
                terms: form.coeffs,
                relation: if form.strict { Relation::Gt } else { Relation::Ge },
                rhs: form.bound,
                line: q.line,
            });
        }
    }
    Ok(())
}

fn same_form(a: &CanonicalInequality, b: &CanonicalInequality) -> bool {
    a.strict == b.strict
        && a.bound.to_bits() == b.bound.to_bits()
        && a.coeffs.len() == b.coeffs.len()
        && a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .all(|((i, x), (j, y))| i == j && x.to_bits() == y.to_bits())
}
