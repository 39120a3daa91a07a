use std::fmt::Write;

use super::{Clause, Dialect, LinearInequality, RequirementSet};

/// Renders a set back into the file format, one requirement per line.
pub fn render(rs: &RequirementSet) -> String {
    let mut out = String::new();
    match rs.dialect {
        Dialect::Cnf => {
            for c in &rs.clauses {
                out.push_str(&render_clause(c));
                out.push('\n');
            }
        }
        Dialect::Linear => {
            for q in &rs.inequalities {
                out.push_str(&render_inequality(q));
                out.push('\n');
            }
        }
        Dialect::Empty => {}
    }
    out
}

pub fn render_clause(clause: &Clause) -> String {
    clause
        .literals
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" or ")
}

/// f64 `Display` is shortest-round-trip and never uses exponent notation,
/// so the output stays inside the grammar.
pub fn render_inequality(q: &LinearInequality) -> String {
    let mut out = String::new();
    for (n, (&var, &a)) in q.terms.iter().enumerate() {
        let negative = a.is_sign_negative();
        let mag = a.abs();
        match (n, negative) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        if mag != 1.0 {
            let _ = write!(out, "{mag} ");
        }
        let _ = write!(out, "y_{var}");
    }
    if q.terms.is_empty() {
        out.push('0');
    }
    let _ = write!(out, " {} {}", q.relation.symbol(), q.rhs);
    out
}
