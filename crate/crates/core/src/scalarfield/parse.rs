//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?          exponent must fold to an integer
//! atom    := number | variable | func '(' expr ')' | '(' expr ')'
//! ```

use thiserror::Error;

use super::{Func, ScalarField, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                if !v.is_finite() {
                    return Err(syntax(start, format!("number `{text}` is out of range")));
                }
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<ScalarField, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs.sub(&self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarField, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = lhs.mul(&self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs.div(&self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarField, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ScalarField, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        // right-associative: the exponent is itself a unary/power expression
        let exponent = self.unary()?;
        let n = exponent
            .as_constant()
            .filter(|v| v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX))
            .ok_or_else(|| {
                syntax(
                    at,
                    "exponent must be an integer constant (use sqrt for fractional powers)",
                )
            })?;
        Ok(base.powi(n as i32))
    }

    fn atom(&mut self) -> Result<ScalarField, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(ScalarField::constant(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(v) = Var::from_name(&name) {
                    return Ok(ScalarField::var(v));
                }
                let Some(f) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdentifier { name, offset: at });
                };
                if *self.peek() != Tok::LParen {
                    return Err(syntax(self.offset(), format!("expected `(` after function `{name}`")));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(ScalarField::call(f, &arg))
            }
            other => Err(syntax(at, format!("expected an operand, found {}", other.describe()))),
        }
    }
}

/// Parse an expression in x, y, z (aliases x1, x2, x3).
pub fn parse(text: &str) -> Result<ScalarField, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    if *p.peek() == Tok::End {
        return Err(syntax(0, "empty expression"));
    }
    let f = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}
