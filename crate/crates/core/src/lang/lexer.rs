use super::LangError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    Not,
    Or,
    Var(usize),
    Number(f64),
    Ge,
    Le,
    Gt,
    Lt,
    Eq,
    Plus,
    Minus,
    Star,
}

impl Token {
    pub(crate) fn is_relation(&self) -> bool {
        matches!(self, Token::Ge | Token::Le | Token::Gt | Token::Lt | Token::Eq)
    }
}

/// A token with its 1-based column.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub token: Token,
    pub column: usize,
}

/// Splits one line into tokens. Columns count characters, not bytes.
pub(crate) fn tokenize(line: &str, line_no: usize) -> Result<Vec<Spanned>, LangError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |column: usize, expected: &str| LangError::Syntax {
        line: line_no,
        column,
        expected: expected.to_string(),
    };

    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == ' ' || c == '\t' || c == '\r' {
            i += 1;
            continue;
        }
        let (token, len) = match c {
            '>' if chars.get(i + 1) == Some(&'=') => (Token::Ge, 2),
            '<' if chars.get(i + 1) == Some(&'=') => (Token::Le, 2),
            '>' => (Token::Gt, 1),
            '<' => (Token::Lt, 1),
            '=' => (Token::Eq, 1),
            '+' => (Token::Plus, 1),
            '-' => (Token::Minus, 1),
            '*' => (Token::Star, 1),
            '0'..='9' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    let frac_start = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == frac_start {
                        return Err(err(j + 1, "digit after decimal point"));
                    }
                }
                if j < chars.len() && is_word_char(chars[j]) {
                    return Err(err(j + 1, "operator or whitespace after number"));
                }
                let text: String = chars[start..j].iter().collect();
                let value: f64 = text.parse().map_err(|_| err(column, "number"))?;
                (Token::Number(value), j - start)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && is_word_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                let token = match word.as_str() {
                    "not" => Token::Not,
                    "or" => Token::Or,
                    w => match w.strip_prefix("y_") {
                        Some(digits)
                            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) =>
                        {
                            let index = digits
                                .parse::<usize>()
                                .map_err(|_| err(column, "variable index that fits in memory"))?;
                            Token::Var(index)
                        }
                        _ => return Err(err(column, "`not`, `or` or a variable `y_<k>`")),
                    },
                };
                (token, j - start)
            }
            _ => return Err(err(column, "token")),
        };
        out.push(Spanned { token, column });
        i += len;
    }
    Ok(out)
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}
