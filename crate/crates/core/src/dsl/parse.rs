use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Expr, Func, ParseError, Shape, SymbolExpr, Var};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

fn error_at(src: &str, offset: usize, expected: impl Into<String>) -> ParseError {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map(|p| offset - p).unwrap_or(offset + 1);
    ParseError { offset, line, column, expected: expected.into() }
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let ch = bytes[i];
            let single = match ch {
                b'(' => Some(Tok::LParen),
                b')' => Some(Tok::RParen),
                b'[' => Some(Tok::LBracket),
                b']' => Some(Tok::RBracket),
                b',' => Some(Tok::Comma),
                b'+' => Some(Tok::Plus),
                b'-' => Some(Tok::Minus),
                b'*' => Some(Tok::Star),
                b'/' => Some(Tok::Slash),
                b'^' => Some(Tok::Caret),
                _ => None,
            };
            if let Some(t) = single {
                lx.toks.push((t, i));
                i += 1;
            } else if ch.is_ascii_whitespace() {
                i += 1;
            } else if ch.is_ascii_digit() || ch == b'.' {
                let start = i;
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
                    .map_err(|_| error_at(src, start, format!("malformed number `{text}`")))?;
                lx.toks.push((Tok::Num(v), start));
            } else if ch.is_ascii_alphabetic() || ch == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks.push((Tok::Ident(src[start..i].to_string()), start));
            } else {
                let c = src[i..].chars().next().unwrap_or('?');
                return Err(error_at(src, i, format!("unexpected character `{c}`")));
            }
        }
        lx.toks.push((Tok::End, lx.src.len()));
        Ok(lx.toks)
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    q: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: impl Into<String>) -> ParseError {
        error_at(self.src, self.offset(), expected)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let n = self.exponent()?;
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        let at = self.offset();
        let n = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            _ => return Err(error_at(self.src, at, "expected integer exponent")),
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if neg { -n } else { n })
    }

    fn signed_number(&mut self) -> Option<f64> {
        let save = self.pos;
        let neg = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        if let Tok::Num(v) = self.peek().clone() {
            self.bump();
            return Some(if neg { -v } else { v });
        }
        self.pos = save;
        None
    }

    fn complex_literal(&mut self) -> Option<C64> {
        let save = self.pos;
        if let Some(re) = self.signed_number() {
            if *self.peek() == Tok::Comma {
                self.bump();
                if let Some(im) = self.signed_number() {
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        return Some(C64::new(re, im));
                    }
                }
            }
        }
        self.pos = save;
        None
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::num(v)),
            Tok::Ident(name) => {
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let arg_at = self.offset();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    if f.scalar_only() && arg.shape() == Shape::Square {
                        return Err(error_at(
                            self.src,
                            arg_at,
                            format!("shape mismatch: `{name}` takes a scalar argument"),
                        ));
                    }
                    return Ok(Expr::call(f, arg));
                }
                Err(error_at(self.src, at, format!("unknown identifier `{name}`")))
            }
            Tok::LParen => {
                if let Some(z) = self.complex_literal() {
                    return Ok(Expr::Num(z));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => self.matrix(at),
            Tok::End => Err(error_at(self.src, at, "expected expression, found end of input")),
            t => Err(error_at(self.src, at, format!("expected expression, found {}", describe(&t)))),
        }
    }

    fn matrix(&mut self, at: usize) -> Result<Expr, ParseError> {
        let mut rows = Vec::new();
        loop {
            self.expect(Tok::LBracket, "`[` opening a matrix row")?;
            let mut row = Vec::new();
            loop {
                let e_at = self.offset();
                let e = self.expr()?;
                if e.shape() != Shape::Scalar {
                    return Err(error_at(self.src, e_at, "shape mismatch: matrix entries must be scalar"));
                }
                row.push(e);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket, "`]` closing a matrix row")?;
            rows.push(row);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket, "`]` closing the matrix")?;
        let q = self.q;
        if rows.len() != q || rows.iter().any(|r| r.len() != q) {
            return Err(error_at(self.src, at, format!("shape mismatch: matrix literal must be {q}x{q}")));
        }
        Ok(Expr::Matrix(rows))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parse `src` as a `q x q` symbol expression.
pub fn parse(src: &str, q: usize) -> Result<SymbolExpr, ParseError> {
    if q == 0 {
        return Err(error_at(src, 0, "fiber dimension must be at least 1"));
    }
    let toks = Lexer::run(src)?;
    let mut p = Parser { src, toks, pos: 0, q };
    let expr = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err(format!("expected operator or end of input, found {}", describe(p.peek()))));
    }
    Ok(SymbolExpr { expr, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("-x^2 + 2*xi", 1).unwrap().expr;
        let want = Expr::add(
            Expr::neg(Expr::pow(Expr::var(Var::X), 2)),
            Expr::mul(Expr::num(2.0), Expr::var(Var::Xi)),
        );
        assert_eq!(e, want);
        let e = parse("a", 1);
        assert!(e.is_err());
    }

    #[test]
    fn complex_literal_vs_group() {
        assert_eq!(parse("(0,1)", 1).unwrap().expr, Expr::Num(C64::new(0.0, 1.0)));
        assert_eq!(parse("(-2.5,-1e-3)", 1).unwrap().expr, Expr::Num(C64::new(-2.5, -1e-3)));
        assert_eq!(parse("(x)", 1).unwrap().expr, Expr::Var(Var::X));
        assert_eq!(parse("x^-2", 1).unwrap().expr, Expr::pow(Expr::var(Var::X), -2));
        assert_eq!(parse("x^(-2)", 1).unwrap().expr, Expr::pow(Expr::var(Var::X), -2));
    }

    #[test]
    fn error_positions() {
        let e = parse("x +\n  foo", 1).unwrap_err();
        assert_eq!((e.offset, e.line, e.column), (6, 2, 3));
        assert!(e.expected.contains("foo"));
        let e = parse("(x", 1).unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("x $", 1).unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("x^1.5", 1).unwrap_err();
        assert!(e.expected.contains("integer"));
    }

    #[test]
    fn shape_errors() {
        assert!(parse("[[1,0],[0,1]]", 2).is_ok());
        assert!(parse("[[1,0],[0,1]]", 3).is_err());
        assert!(parse("exp([[1,0],[0,1]])", 2).is_err());
        assert!(parse("conj([[1,0],[0,x]])", 2).is_ok());
        assert!(parse("[[[[1]]]]", 1).is_err());
    }
}
