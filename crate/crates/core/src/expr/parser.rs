//! Recursive-descent parser for the metric-component language.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term   (('+' | '-') term)*
//! term    := unary  (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          -- right-associative
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. There is no
//! implicit multiplication. The identifier `pi` denotes the constant unless it
//! is declared as a variable.

use super::ast::{BinOp, Expr, Func};
use crate::error::{GeomError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((start, Tok::End));
                return Ok(out);
            };
            let tok = match c {
                b'0'..=b'9' | b'.' => lx.number()?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => lx.ident(),
                b'+' | b'-' | b'*' | b'/' | b'^' => {
                    lx.pos += 1;
                    Tok::Op(c as char)
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(syntax(start, format!("unexpected character `{ch}`")));
                }
            };
            out.push((start, tok));
        }
    }

    fn skip_ws(&mut self) {
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let mut n = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += self.digits();
        }
        if n == 0 {
            return Err(syntax(start, "malformed number"));
        }
        // Exponent only when followed by a digit (optionally signed).
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| syntax(start, format!("malformed number `{text}`")))
    }

    fn ident(&mut self) -> Tok {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }
}

fn syntax(position: usize, message: impl Into<String>) -> GeomError {
    GeomError::Syntax {
        position,
        message: message.into(),
    }
}

struct Parser<'v> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vars: &'v [&'v str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::neg(self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == &Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn expect_rparen(&mut self, open: usize) -> Result<()> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            _ => Err(syntax(
                self.pos(),
                format!("expected `)` to close `(` at position {open}"),
            )),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen(pos)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek() == &Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| GeomError::UnknownIdentifier(name.clone()))?;
                    let open = self.pos();
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen(open)?;
                    return Ok(Expr::func(func, arg));
                }
                if let Some(slot) = self.vars.iter().position(|v| *v == name) {
                    Ok(Expr::var(name, slot))
                } else if Func::from_name(&name).is_some() {
                    Err(syntax(self.pos(), format!("`{name}` must be followed by `(`")))
                } else if name == "pi" {
                    Ok(Expr::Const(std::f64::consts::PI))
                } else {
                    Err(GeomError::UnknownIdentifier(name))
                }
            }
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            Tok::Op(c) => Err(syntax(pos, format!("unexpected operator `{c}`"))),
            Tok::RParen => Err(syntax(pos, "unexpected `)`")),
        }
    }
}

/// Parses `text`, resolving identifiers against `allowed_vars`. A variable's
/// slot is its index in `allowed_vars`.
pub fn parse(text: &str, allowed_vars: &[&str]) -> Result<Expr> {
    let toks = Lexer::tokenize(text)?;
    if toks.len() == 1 {
        return Err(syntax(0, "empty expression"));
    }
    let mut p = Parser {
        toks,
        at: 0,
        vars: allowed_vars,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        tok => {
            let what = match tok {
                Tok::Num(v) => format!("number {v}"),
                Tok::Ident(s) => format!("identifier `{s}`"),
                Tok::Op(c) => format!("operator `{c}`"),
                Tok::LParen => "`(`".into(),
                Tok::RParen => "unmatched `)`".into(),
                Tok::End => unreachable!(),
            };
            Err(syntax(p.pos(), format!("unexpected {what}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_level_product() {
        let e = parse("r^2*sin(theta)^2", &["r", "theta"]).unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn schwarzschild_component_parses() {
        let e = parse("1/(1-2*M/r)", &["M", "r", "theta", "phi", "t"]).unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Div, _, _)));
        assert_eq!(e.variables(), vec!["M".to_string(), "r".to_string()]);
    }

    #[test]
    fn unknown_function() {
        assert_eq!(
            parse("sni(x)", &["x"]),
            Err(GeomError::UnknownIdentifier("sni".into()))
        );
    }

    #[test]
    fn unknown_variable() {
        assert_eq!(
            parse("x + z", &["x"]),
            Err(GeomError::UnknownIdentifier("z".into()))
        );
    }

    #[test]
    fn implicit_multiplication_is_rejected() {
        assert!(matches!(
            parse("2x", &["x"]),
            Err(GeomError::Syntax { position: 1, .. })
        ));
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "   ", "(x", "x +", "x )", "*x", "sin x", "1..2", "x $ y"] {
            assert!(
                matches!(parse(bad, &["x"]), Err(GeomError::Syntax { .. })),
                "{bad:?} should be a syntax error"
            );
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("-x^2", &["x"]).unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        let e = parse("2^3^2", &[]).unwrap();
        match e {
            Expr::Binary(BinOp::Pow, b, rhs) => {
                assert_eq!(*b, Expr::Const(2.0));
                assert!(matches!(*rhs, Expr::Binary(BinOp::Pow, _, _)));
            }
            other => panic!("unexpected tree {other:?}"),
        }
        let e = parse("a - b - c", &["a", "b", "c"]).unwrap();
        assert_eq!(e.to_string(), "((a - b) - c)");
        let e = parse("a + b * c / d", &["a", "b", "c", "d"]).unwrap();
        assert_eq!(e.to_string(), "(a + ((b * c) / d))");
    }

    #[test]
    fn numbers_and_pi() {
        assert_eq!(parse("1.5e-3", &[]).unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse(".25", &[]).unwrap(), Expr::Const(0.25));
        assert_eq!(parse("pi", &[]).unwrap(), Expr::Const(std::f64::consts::PI));
        // A declared variable shadows the constant.
        assert_eq!(parse("pi", &["pi"]).unwrap(), Expr::var("pi", 0));
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("x*y+sin( x )", &["x", "y"]).unwrap();
        let b = parse("  x * y\t+ sin(x)\n", &["x", "y"]).unwrap();
        assert_eq!(a, b);
    }
}
