//! Infix text form of expressions.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' number | '-' unary | primary
//! primary := number | ident | func '(' expr (',' expr)? ')' | '(' expr ')'
//! ident   := [a-z][a-z0-9_]*
//! number  := [0-9]+ ('.' [0-9]+)?
//! ```
//!
//! A minus sign directly followed by a literal is folded into a negative
//! constant. The printer relies on this so that `print -> parse -> print`
//! is a fixed point and `parse(print(e))` is structurally equal to `e`.

use std::fmt;

use thiserror::Error;

use super::expr::{Node, SymExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at column {column}: {message}")]
pub struct ParseError {
    /// 1-based column of the offending character.
    pub column: usize,
    pub message: String,
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 4;

fn precedence(e: &SymExpr) -> u8 {
    match e.node() {
        Node::Const(c) if c.is_sign_negative() => PREC_UNARY,
        Node::Const(_) | Node::Param(_) | Node::Sin(_) | Node::Cos(_) | Node::Atan2(..) => PREC_ATOM,
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Neg(_) => PREC_UNARY,
    }
}

/// Shortest round-tripping decimal representation of a finite float.
pub fn format_number(v: f64) -> String {
    debug_assert!(v.is_finite(), "non-finite constant in expression");
    format!("{v}")
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &SymExpr, min_prec: u8) -> fmt::Result {
    let wrap = precedence(e) < min_prec;
    if wrap {
        f.write_str("(")?;
    }
    match e.node() {
        Node::Const(c) => f.write_str(&format_number(*c))?,
        Node::Param(name) => f.write_str(name)?,
        Node::Add(a, b) => {
            write_expr(f, a, PREC_SUM)?;
            f.write_str(" + ")?;
            write_expr(f, b, PREC_PRODUCT)?;
        }
        Node::Sub(a, b) => {
            write_expr(f, a, PREC_SUM)?;
            f.write_str(" - ")?;
            write_expr(f, b, PREC_PRODUCT)?;
        }
        Node::Mul(a, b) => {
            write_expr(f, a, PREC_PRODUCT)?;
            f.write_str(" * ")?;
            write_expr(f, b, PREC_UNARY)?;
        }
        Node::Div(a, b) => {
            write_expr(f, a, PREC_PRODUCT)?;
            f.write_str(" / ")?;
            write_expr(f, b, PREC_UNARY)?;
        }
        Node::Neg(a) => {
            f.write_str("-")?;
            if a.as_const().is_some() {
                // `-0.5` would reparse as a negative literal
                f.write_str("(")?;
                write_expr(f, a, 0)?;
                f.write_str(")")?;
            } else {
                write_expr(f, a, PREC_ATOM)?;
            }
        }
        Node::Sin(a) => {
            f.write_str("sin(")?;
            write_expr(f, a, 0)?;
            f.write_str(")")?;
        }
        Node::Cos(a) => {
            f.write_str("cos(")?;
            write_expr(f, a, 0)?;
            f.write_str(")")?;
        }
        Node::Atan2(y, x) => {
            f.write_str("atan2(")?;
            write_expr(f, y, 0)?;
            f.write_str(", ")?;
            write_expr(f, x, 0)?;
            f.write_str(")")?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
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
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, col) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, col));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let col = start + 1;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, col));
        };
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' => {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.src.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    let frac = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if frac == self.pos {
                        return Err(ParseError {
                            column: self.pos + 1,
                            message: "expected digits after decimal point".into(),
                        });
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let v: f64 = text.parse().map_err(|_| ParseError {
                    column: col,
                    message: format!("invalid number `{text}`"),
                })?;
                return Ok((Tok::Num(v), col));
            }
            b'a'..=b'z' => {
                while self.pos < self.src.len()
                    && matches!(self.src[self.pos], b'a'..=b'z' | b'0'..=b'9' | b'_')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                return Ok((Tok::Ident(text.to_string()), col));
            }
            _ => {
                return Err(ParseError {
                    column: col,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, col))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.col(), message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<SymExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<SymExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<SymExpr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Num(v) = *self.peek() {
                self.bump();
                return Ok(SymExpr::constant(-v));
            }
            return Ok(-self.unary()?);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<SymExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(SymExpr::constant(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Ok(SymExpr::param(&name));
                }
                let fcol = self.col();
                self.bump();
                let first = self.expr()?;
                let out = match name.as_str() {
                    "sin" => first.sin(),
                    "cos" => first.cos(),
                    "atan2" => {
                        self.expect(Tok::Comma, "`,` in atan2")?;
                        let second = self.expr()?;
                        SymExpr::atan2(first, second)
                    }
                    other => {
                        return Err(ParseError { column: fcol, message: format!("unknown function `{other}`") })
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(out)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::End => self.err("unexpected end of expression"),
            other => self.err(format!("unexpected token {other:?}")),
        }
    }
}

/// Parse an expression from its infix text form.
pub fn parse_expr(src: &str) -> Result<SymExpr, ParseError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

impl std::str::FromStr for SymExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(src: &str) {
        let e = parse_expr(src).unwrap();
        let printed = e.to_string();
        assert_eq!(printed, src);
        assert_eq!(parse_expr(&printed).unwrap(), e);
    }

    #[test]
    fn prints_canonical_forms() {
        rt("x");
        rt("0.8 * x");
        rt("-0.8 * x + 0.1");
        rt("x - (y - z)");
        rt("x / (y * z)");
        rt("-(x + y)");
        rt("-(0.5)");
        rt("-(-0.5)");
        rt("x * -0.5");
        rt("atan2(sin(x), cos(x))");
        rt("x - -2");
    }

    #[test]
    fn negative_literal_folds() {
        assert_eq!(parse_expr("-0.5").unwrap(), SymExpr::constant(-0.5));
        assert_eq!(parse_expr("-x").unwrap(), -SymExpr::param("x"));
    }

    #[test]
    fn dangling_operator_reports_column() {
        let err = parse_expr("x +").unwrap_err();
        assert_eq!(err.column, 4);
        let err = parse_expr("x $ 1").unwrap_err();
        assert_eq!(err.column, 3);
        assert!(parse_expr("foo(1)").is_err());
        assert!(parse_expr("1.").is_err());
    }
}
