use std::fmt;

use super::{BinOp, Expr, Func};

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", ExpectedList(.expected))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("unknown variable `{name}` at offset {offset}; only `t` is allowed")]
    UnknownVariable { offset: usize, name: String },
    #[error("numeric literal `{literal}` at offset {offset} is out of range")]
    NumberOutOfRange { offset: usize, literal: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::UnknownVariable { offset, .. }
            | ParseError::NumberOutOfRange { offset, .. } => *offset,
        }
    }
}

struct ExpectedList<'a>(&'a [&'static str]);

impl fmt::Display for ExpectedList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            [] => f.write_str("nothing"),
            [one] => f.write_str(one),
            many => write!(f, "one of {}", many.join(", ")),
        }
    }
}

const ATOM_START: &[&str] = &["number", "`t`", "function call", "`(`", "`-`"];

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Invalid(char),
    End,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) => write!(f, "number `{s}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Invalid(c) => write!(f, "character {c:?}"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Returns the next token and its start offset without consuming it.
    fn peek(&mut self) -> (Tok<'a>, usize) {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return (Tok::End, start);
        };
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => match number_len(rest.as_bytes()) {
                Some(n) => Tok::Num(&rest[..n]),
                None => Tok::Invalid(c),
            },
            c if c.is_ascii_alphabetic() || c == '_' => {
                let n = rest
                    .bytes()
                    .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                    .count();
                Tok::Ident(&rest[..n])
            }
            c => Tok::Invalid(c),
        };
        (tok, start)
    }

    fn bump(&mut self, tok: &Tok<'a>) {
        self.pos += match tok {
            Tok::Num(s) | Tok::Ident(s) => s.len(),
            Tok::Invalid(c) => c.len_utf8(),
            Tok::End => 0,
            _ => 1,
        };
    }
}

/// Length of a decimal literal with optional exponent, or `None` if malformed.
fn number_len(b: &[u8]) -> Option<usize> {
    let digits = |from: usize| b[from..].iter().take_while(|c| c.is_ascii_digit()).count();
    let mut n = digits(0);
    let int_digits = n;
    let mut frac_digits = 0;
    if b.get(n) == Some(&b'.') {
        frac_digits = digits(n + 1);
        n += 1 + frac_digits;
    }
    if int_digits + frac_digits == 0 {
        return None;
    }
    if matches!(b.get(n), Some(b'e' | b'E')) {
        let mut m = n + 1;
        if matches!(b.get(m), Some(b'+' | b'-')) {
            m += 1;
        }
        let exp = digits(m);
        if exp == 0 {
            return None;
        }
        n = m + exp;
    }
    Some(n)
}

struct Parser<'a> {
    lex: Lexer<'a>,
    depth: usize,
}

const MAX_DEPTH: usize = 256;

impl<'a> Parser<'a> {
    fn error(&mut self, expected: &[&'static str]) -> ParseError {
        let (tok, offset) = self.lex.peek();
        ParseError::Syntax {
            offset,
            expected: expected.to_vec(),
            found: tok.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let (tok, _) = self.lex.peek();
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.lex.bump(&tok);
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let (tok, _) = self.lex.peek();
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.lex.bump(&tok);
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error(&["shallower nesting"]));
        }
        let (tok, _) = self.lex.peek();
        let out = if tok == Tok::Minus {
            self.lex.bump(&tok);
            self.factor().map(|e| Expr::Neg(Box::new(e)))
        } else {
            self.power()
        };
        self.depth -= 1;
        out
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        let (tok, _) = self.lex.peek();
        if tok == Tok::Caret {
            self.lex.bump(&tok);
            let exp = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.lex.peek();
        match tok {
            Tok::Num(s) => {
                let value: f64 = s.parse().map_err(|_| self.error(ATOM_START))?;
                if !value.is_finite() {
                    return Err(ParseError::NumberOutOfRange {
                        offset,
                        literal: s.to_string(),
                    });
                }
                self.lex.bump(&tok);
                Ok(Expr::Num(value))
            }
            Tok::Ident("t") => {
                self.lex.bump(&tok);
                Ok(Expr::Var)
            }
            Tok::Ident(name) => {
                self.lex.bump(&tok);
                let (next, _) = self.lex.peek();
                if next != Tok::LParen {
                    return Err(ParseError::UnknownVariable {
                        offset,
                        name: name.to_string(),
                    });
                }
                let func = Func::from_name(name).ok_or_else(|| ParseError::UnknownFunction {
                    offset,
                    name: name.to_string(),
                })?;
                self.lex.bump(&next);
                let arg = self.nested()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::LParen => {
                self.lex.bump(&tok);
                self.nested()
            }
            _ => Err(self.error(ATOM_START)),
        }
    }

    /// Parses `expr ")"` after an opening parenthesis has been consumed.
    fn nested(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error(&["shallower nesting"]));
        }
        let inner = self.expr()?;
        let (tok, _) = self.lex.peek();
        if tok != Tok::RParen {
            return Err(self.error(&["operator", "`)`"]));
        }
        self.lex.bump(&tok);
        self.depth -= 1;
        Ok(inner)
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lex: Lexer {
            src: source,
            pos: 0,
        },
        depth: 0,
    };
    let e = p.expr()?;
    let (tok, _) = p.lex.peek();
    if tok != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Replaces free identifiers named in `params` by parenthesised literals.
///
/// Function names (identifiers followed by `(`) and `t` are left alone.
pub fn substitute_params(source: &str, params: &[(&str, f64)]) -> String {
    let mut out = String::with_capacity(source.len());
    let mut lex = Lexer {
        src: source,
        pos: 0,
    };
    let mut copied = 0;
    loop {
        let (tok, start) = lex.peek();
        if tok == Tok::End {
            break;
        }
        lex.bump(&tok);
        if let Tok::Ident(name) = tok {
            let (next, _) = lex.peek();
            if next == Tok::LParen {
                continue;
            }
            if let Some((_, v)) = params.iter().find(|(n, _)| *n == name) {
                out.push_str(&source[copied..start]);
                out.push_str(&format!("({v:?})"));
                copied = start + name.len();
            }
        }
    }
    out.push_str(&source[copied..]);
    out
}
