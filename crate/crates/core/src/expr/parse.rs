//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := ('+' | '-')? INT | '(' ('+' | '-')? INT ')'
//! primary  := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `a - b` becomes `Add[a, Neg b]`, `a / b` becomes `Mul[a, Pow(b, -1)]`,
//! and a unary minus directly in front of a numeric literal is folded into
//! a negative constant. Parentheses are kept as nesting, which is what makes
//! `render` followed by `parse` reproduce the tree.

use super::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(i64),
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

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((Tok::End, start));
        };
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut pos = self.pos;
        let int_digits = digits(&mut pos);
        let mut integral = true;
        if pos < bytes.len() && bytes[pos] == b'.' {
            integral = false;
            pos += 1;
            let frac = digits(&mut pos);
            if int_digits + frac == 0 {
                return Err(Error::Syntax {
                    offset: start,
                    message: "malformed number".into(),
                });
            }
        }
        if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
            let mut p = pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if digits(&mut p) > 0 {
                integral = false;
                pos = p;
            }
        }
        let text = &self.src[start..pos];
        self.pos = pos;
        if integral {
            if let Ok(i) = text.parse::<i64>() {
                return Ok((Tok::Int(i), start));
            }
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Tok::Num(v), start)),
            _ => Err(Error::Syntax {
                offset: start,
                message: format!("number `{text}` is not a finite double"),
            }),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
}

pub(super) fn parse(source: &str) -> Result<Expr> {
    let toks = Lexer::tokens(source)?;
    let mut p = Parser { toks, idx: 0 };
    if p.peek() == &Tok::End {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        tok => Err(Error::Syntax {
            offset: p.offset(),
            message: format!("unexpected {}", describe(tok)),
        }),
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Int(v) => format!("number {v}"),
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

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.idx + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                message: format!("expected {}, found {}", describe(&want), describe(self.peek())),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    factors.push(Expr::pow(self.unary()?, -1));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() != Tok::Minus {
            return self.power();
        }
        self.bump();
        let literal = match self.peek() {
            Tok::Num(v) => Some(*v),
            Tok::Int(i) => Some(*i as f64),
            _ => None,
        };
        if let Some(v) = literal {
            if *self.peek_at(1) != Tok::Caret {
                self.bump();
                return Ok(Expr::Const(-v));
            }
        }
        Ok(Expr::neg(self.unary()?))
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        Ok(Expr::pow(base, exponent))
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let start = self.offset();
        let sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -1
            }
            Tok::Plus => {
                self.bump();
                1
            }
            _ => 1,
        };
        let value = match self.bump() {
            Tok::Int(i) => i32::try_from(sign * i).map_err(|_| Error::Syntax {
                offset: start,
                message: "exponent out of range".into(),
            })?,
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: "exponent must be an integer literal".into(),
                })
            }
        };
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(value)
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Int(i) => Ok(Expr::Const(i as f64)),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(Error::UnknownFunction {
                        name: name.clone(),
                        offset: at,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::call(func, arg))
                } else if Func::from_name(&name).is_some() {
                    Err(Error::Syntax {
                        offset: self.offset(),
                        message: format!("expected `(` after function `{name}`"),
                    })
                } else {
                    Ok(Expr::Sym(name))
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            tok => Err(Error::Syntax {
                offset: at,
                message: format!("expected a value, found {}", describe(&tok)),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Expr {
        Expr::sym(s)
    }

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    #[test]
    fn product_with_power() {
        assert_eq!(
            parse("k*t^2").unwrap(),
            Expr::Mul(vec![sym("k"), Expr::pow(sym("t"), 2)])
        );
    }

    #[test]
    fn oscillator_potential() {
        assert_eq!(
            parse("0.5*m*w^2*x^2").unwrap(),
            Expr::Mul(vec![
                c(0.5),
                sym("m"),
                Expr::pow(sym("w"), 2),
                Expr::pow(sym("x"), 2)
            ])
        );
    }

    #[test]
    fn incomplete_expression_reports_offset() {
        match parse("x + ") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function() {
        match parse("2*tan(x)") {
            Err(Error::UnknownFunction { name, offset }) => {
                assert_eq!(name, "tan");
                assert_eq!(offset, 2);
            }
            other => panic!("expected UnknownFunction, got {other:?}"),
        }
    }

    #[test]
    fn subtraction_and_division() {
        assert_eq!(
            parse("a - b / c").unwrap(),
            Expr::Add(vec![
                sym("a"),
                Expr::neg(Expr::Mul(vec![sym("b"), Expr::pow(sym("c"), -1)]))
            ])
        );
    }

    #[test]
    fn unary_minus_folds_literals_only() {
        assert_eq!(parse("-2").unwrap(), c(-2.0));
        assert_eq!(parse("-(2)").unwrap(), Expr::neg(c(2.0)));
        assert_eq!(parse("-2^2").unwrap(), Expr::neg(Expr::pow(c(2.0), 2)));
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::pow(sym("x"), 2)));
    }

    #[test]
    fn precedence_and_grouping() {
        assert_eq!(
            parse("(a + b) + c").unwrap(),
            Expr::Add(vec![Expr::Add(vec![sym("a"), sym("b")]), sym("c")])
        );
        assert_eq!(
            parse("a + b * c").unwrap(),
            Expr::Add(vec![sym("a"), Expr::Mul(vec![sym("b"), sym("c")])])
        );
        assert_eq!(parse("x^-1").unwrap(), Expr::pow(sym("x"), -1));
        assert_eq!(parse("x^(-3)").unwrap(), Expr::pow(sym("x"), -3));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "   ", "x^1.5", "x^y", "(x", "x)", "3 $ 4", "sin x", "1e999", "*x", "."] {
            assert!(parse(bad).is_err(), "`{bad}` should not parse");
        }
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), c(1.5e-3));
        assert_eq!(parse(".25").unwrap(), c(0.25));
    }
}
