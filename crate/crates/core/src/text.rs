//! Text grammar for polynomials.
//!
//! ```text
//! Expr   := ['+'|'-'] Term (('+'|'-') Term)*
//! Term   := Factor ('*' Factor)*
//! Factor := Rational | Var ['^' Nat] | '(' Expr ')' ['^' Nat] | 'T(' Expr ')' ['^' Nat]
//! Var    := ('a'|'x'|'h') Nat
//! ```
//!
//! `Rational` is `Nat ['/' Nat]`; there are no floating point literals.
//! Printing (`Display` on `NCPolynomial`) emits a string this parser reads back
//! to the same polynomial.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::freealg::{Letter, LetterClass, NCPolynomial, Rational, VarCounts, Word};

pub fn parse(text: &str, vars: VarCounts) -> Result<NCPolynomial> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a single word such as `h1*x1*a1` (coefficient must be 1).
pub fn parse_word(text: &str, vars: VarCounts) -> Result<Word> {
    let p = parse(text, vars)?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((w, c)), None) if *c == Rational::from_integer(1.into()) => Ok(w.clone()),
        _ => Err(Error::Parse {
            pos: 0,
            msg: format!("`{text}` is not a single monomial"),
        }),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: VarCounts,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn nat(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a natural number"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse"))
    }

    fn small_nat(&mut self) -> Result<usize> {
        let start = self.pos;
        let n = self.nat()?;
        n.to_string().parse::<usize>().map_err(|_| Error::Parse {
            pos: start,
            msg: "number too large".into(),
        })
    }

    fn expr(&mut self) -> Result<NCPolynomial> {
        let mut acc = NCPolynomial::zero(self.vars);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<NCPolynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn power(&mut self, base: NCPolynomial) -> Result<NCPolynomial> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.small_nat()?;
            let e = u32::try_from(e).map_err(|_| self.error("exponent too large"))?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn factor(&mut self) -> Result<NCPolynomial> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.nat()?;
                let den = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let d = self.nat()?;
                    if d.is_zero() {
                        return Err(self.error("zero denominator"));
                    }
                    d
                } else {
                    BigInt::from(1)
                };
                Ok(NCPolynomial::constant(self.vars, Rational::new(num, den)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                self.power(e)
            }
            Some(b'T') => {
                self.pos += 1;
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                self.power(e.transpose())
            }
            Some(c @ (b'a' | b'x' | b'h')) => {
                let start = self.pos;
                self.pos += 1;
                let class = match c {
                    b'a' => LetterClass::A,
                    b'x' => LetterClass::X,
                    _ => LetterClass::H,
                };
                if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    return Err(self.error("variable needs an index"));
                }
                let idx = self.small_nat()?;
                let letter = Letter::new(class, u16::try_from(idx).unwrap_or(u16::MAX));
                let v = NCPolynomial::var(self.vars, letter).map_err(|e| Error::Parse {
                    pos: start,
                    msg: e.to_string(),
                })?;
                self.power(v)
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}
