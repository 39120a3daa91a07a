use std::collections::BTreeMap;

use super::lexer::{tokenize, Spanned, Token};
use super::{Clause, Dialect, LangError, LinearInequality, Literal, Relation, RequirementSet};

enum Parsed {
    Clause(Clause),
    Inequality(LinearInequality),
}

/// Parses a requirement file for a model with `num_variables` outputs.
///
/// Every line is parsed before any error is reported so the error class does
/// not depend on line order: syntax errors win over mixed dialects, which win
/// over out-of-range variables. Within a class the lowest line is reported.
pub fn parse_requirements(text: &str, num_variables: usize) -> Result<RequirementSet, LangError> {
    let mut parsed = Vec::new();
    let mut first_syntax: Option<LangError> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start_matches([' ', '\t']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_line(raw, line_no) {
            Ok(p) => parsed.push(p),
            Err(e) => {
                if first_syntax.is_none() {
                    first_syntax = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_syntax {
        return Err(e);
    }

    let first_clause = parsed.iter().find_map(|p| match p {
        Parsed::Clause(c) => Some(c.line),
        _ => None,
    });
    let first_ineq = parsed.iter().find_map(|p| match p {
        Parsed::Inequality(q) => Some(q.line),
        _ => None,
    });
    if let (Some(c), Some(q)) = (first_clause, first_ineq) {
        return Err(LangError::MixedDialect { line: c.max(q) });
    }

    let mut clauses = Vec::new();
    let mut inequalities = Vec::new();
    for p in parsed {
        match p {
            Parsed::Clause(c) => clauses.push(c),
            Parsed::Inequality(q) => inequalities.push(q),
        }
    }

    let out_of_range = clauses
        .iter()
        .flat_map(|c| c.literals.iter().map(move |l| (c.line, l.variable)))
        .chain(
            inequalities
                .iter()
                .flat_map(|q| q.terms.keys().map(move |&i| (q.line, i))),
        )
        .filter(|&(_, index)| index >= num_variables)
        .min();
    if let Some((line, index)) = out_of_range {
        return Err(LangError::VariableOutOfRange { line, index, num_variables });
    }

    let dialect = if !clauses.is_empty() {
        Dialect::Cnf
    } else if !inequalities.is_empty() {
        Dialect::Linear
    } else {
        Dialect::Empty
    };
    Ok(RequirementSet {
        dialect,
        clauses,
        inequalities,
        num_variables,
        source: text.to_string(),
        warnings: Vec::new(),
    })
}

fn parse_line(line: &str, line_no: usize) -> Result<Parsed, LangError> {
    let tokens = tokenize(line, line_no)?;
    let end_column = line.chars().count() + 1;
    let mut cursor = Cursor { tokens: &tokens, pos: 0, line: line_no, end_column };
    if tokens.iter().any(|t| t.token.is_relation()) {
        parse_inequality(&mut cursor).map(Parsed::Inequality)
    } else {
        parse_clause(&mut cursor).map(Parsed::Clause)
    }
}

struct Cursor<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    line: usize,
    end_column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_column, |s| s.column)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|s| &s.token);
        self.pos += 1;
        t
    }

    fn error(&self, expected: &str) -> LangError {
        LangError::Syntax {
            line: self.line,
            column: self.column(),
            expected: expected.to_string(),
        }
    }
}

// clause := literal ("or" literal)*
// literal := ["not"] var
fn parse_clause(c: &mut Cursor<'_>) -> Result<Clause, LangError> {
    let mut literals = Vec::new();
    loop {
        let positive = if c.peek() == Some(&Token::Not) {
            c.bump();
            false
        } else {
            true
        };
        match c.peek() {
            Some(&Token::Var(k)) => {
                c.bump();
                literals.push(Literal { variable: k, positive });
            }
            _ if positive => return Err(c.error("`not` or a variable `y_<k>`")),
            _ => return Err(c.error("variable `y_<k>`")),
        }
        match c.peek() {
            None => break,
            Some(Token::Or) => {
                c.bump();
            }
            Some(_) => return Err(c.error("`or` or end of line")),
        }
    }
    Ok(Clause { literals, line: c.line })
}

// inequality := lhs relation ["+"|"-"] number
// lhs := ["+"|"-"] term (("+"|"-") term)*
// term := number ["*"] var | var | number   (a bare number only as the whole lhs)
fn parse_inequality(c: &mut Cursor<'_>) -> Result<LinearInequality, LangError> {
    let mut terms: BTreeMap<usize, f64> = BTreeMap::new();
    let mut constant: Option<(f64, usize)> = None;
    let mut term_count = 0;

    loop {
        let sign = match c.peek() {
            Some(Token::Plus) => {
                c.bump();
                1.0
            }
            Some(Token::Minus) => {
                c.bump();
                -1.0
            }
            _ if term_count == 0 => 1.0,
            _ => return Err(c.error("`+`, `-` or a relation")),
        };
        let term_column = c.column();
        match c.peek().cloned() {
            Some(Token::Var(k)) => {
                c.bump();
                *terms.entry(k).or_insert(0.0) += sign;
            }
            Some(Token::Number(v)) => {
                c.bump();
                if c.peek() == Some(&Token::Star) {
                    c.bump();
                    match c.peek() {
                        Some(&Token::Var(k)) => {
                            c.bump();
                            *terms.entry(k).or_insert(0.0) += sign * v;
                        }
                        _ => return Err(c.error("variable `y_<k>` after `*`")),
                    }
                } else if let Some(&Token::Var(k)) = c.peek() {
                    c.bump();
                    *terms.entry(k).or_insert(0.0) += sign * v;
                } else {
                    constant = Some((sign * v, term_column));
                }
            }
            _ => return Err(c.error("coefficient or variable `y_<k>`")),
        }
        term_count += 1;
        if c.peek().is_some_and(Token::is_relation) {
            break;
        }
    }

    if let Some((_, column)) = constant {
        if term_count > 1 {
            return Err(LangError::Syntax {
                line: c.line,
                column,
                expected: "variable after coefficient (constants belong on the right-hand side)"
                    .to_string(),
            });
        }
    }

    let relation = match c.bump() {
        Some(Token::Ge) => Relation::Ge,
        Some(Token::Gt) => Relation::Gt,
        Some(Token::Le) => Relation::Le,
        Some(Token::Lt) => Relation::Lt,
        Some(Token::Eq) => Relation::Eq,
        _ => unreachable!("loop exits only before a relation"),
    };

    let rhs_sign = match c.peek() {
        Some(Token::Plus) => {
            c.bump();
            1.0
        }
        Some(Token::Minus) => {
            c.bump();
            -1.0
        }
        _ => 1.0,
    };
    let rhs = match c.peek() {
        Some(&Token::Number(v)) => {
            c.bump();
            rhs_sign * v
        }
        Some(Token::Var(_)) => {
            return Err(c.error("constant right-hand side (variables belong on the left)"))
        }
        _ => return Err(c.error("number")),
    };
    if c.peek().is_some() {
        return Err(c.error("end of line"));
    }

    let rhs = match constant {
        Some((k, _)) => rhs - k,
        None => rhs,
    };
    Ok(LinearInequality { terms, relation, rhs, line: c.line })
}
