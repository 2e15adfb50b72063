//! Partial Hessians and bidegree bookkeeping.
//!
//! The Hessian is formed combinatorially: every unordered pair of target
//! letters in a word is replaced by the matching direction letters and the
//! result is doubled. A Hessian in the `a` variables reuses the `H` class with
//! `gh = ga`; its `HessianPoly` carries `Direction::A` so the letters print
//! and evaluate as `k`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::freealg::{rat_int, Letter, LetterClass, NCPolynomial, Rational, VarCounts, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    /// `h` replaces `x` letters.
    X,
    /// `k` replaces `a` letters.
    A,
}

impl Direction {
    pub(crate) fn target(self) -> LetterClass {
        match self {
            Direction::X => LetterClass::X,
            Direction::A => LetterClass::A,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::X => 'h',
            Direction::A => 'k',
        }
    }
}

/// A polynomial homogeneous of degree two in the direction letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HessianPoly {
    poly: NCPolynomial,
    direction: Direction,
    source_a: usize,
    source_x: usize,
}

impl HessianPoly {
    /// Wraps an arbitrary degree-two-in-`h` polynomial.
    pub fn from_poly(poly: NCPolynomial, direction: Direction) -> Result<Self> {
        if poly.terms().any(|(w, _)| w.degree(LetterClass::H) != 2) {
            return Err(Error::NotDegreeTwoInDirection);
        }
        let bd = poly.bidegree();
        let (source_a, source_x) = match direction {
            Direction::X => (bd.a, if poly.is_zero() { 0 } else { bd.x + 2 }),
            Direction::A => (if poly.is_zero() { 0 } else { bd.a + 2 }, bd.x),
        };
        Ok(HessianPoly {
            poly,
            direction,
            source_a,
            source_x,
        })
    }

    pub fn poly(&self) -> &NCPolynomial {
        &self.poly
    }

    pub fn into_poly(self) -> NCPolynomial {
        self.poly
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// `(d_a, d_x)` of the differentiated polynomial.
    pub fn source_bidegree(&self) -> (usize, usize) {
        (self.source_a, self.source_x)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
}

impl fmt::Display for HessianPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.poly.to_string();
        match self.direction {
            Direction::X => write!(f, "{s}"),
            Direction::A => write!(f, "{}", s.replace('h', "k")),
        }
    }
}

fn hessian_in(p: &NCPolynomial, direction: Direction) -> Result<HessianPoly> {
    if p.has_class(LetterClass::H) {
        return Err(Error::HasDirectionLetters);
    }
    let target = direction.target();
    let vars = p.vars();
    let out_vars = match direction {
        Direction::X => VarCounts::with_directions(vars.ga, vars.gx, vars.gx),
        Direction::A => VarCounts::with_directions(vars.ga, vars.gx, vars.ga),
    };
    let mut out = NCPolynomial::zero(out_vars);
    let two = rat_int(2);
    for (w, c) in p.terms() {
        let pos = w.positions(target);
        if pos.len() < 2 {
            continue;
        }
        let coeff: Rational = c * &two;
        for (ii, &i) in pos.iter().enumerate() {
            for &j in &pos[ii + 1..] {
                let mut letters = w.letters().to_vec();
                letters[i] = Letter::h(letters[i].index);
                letters[j] = Letter::h(letters[j].index);
                out.add_term(Word::new(letters), coeff.clone());
            }
        }
    }
    let bd = p.bidegree();
    Ok(HessianPoly {
        poly: out,
        direction,
        source_a: bd.a,
        source_x: bd.x,
    })
}

/// Second directional derivative in `x` along `h`.
pub fn partial_hessian_x(p: &NCPolynomial) -> Result<HessianPoly> {
    hessian_in(p, Direction::X)
}

/// Second directional derivative in `a` along `k` (stored as `h` letters).
pub fn partial_hessian_a(p: &NCPolynomial) -> Result<HessianPoly> {
    hessian_in(p, Direction::A)
}

/// Terms with exactly `deg_a` letters `a` and `deg_x` letters `x`.
pub fn homogeneous_part(p: &NCPolynomial, deg_a: usize, deg_x: usize) -> NCPolynomial {
    p.filter_terms(|w| w.degree(LetterClass::A) == deg_a && w.degree(LetterClass::X) == deg_x)
}

/// Terms of x-degree exactly `deg_x`.
pub fn x_homogeneous_part(p: &NCPolynomial, deg_x: usize) -> NCPolynomial {
    p.filter_terms(|w| w.degree(LetterClass::X) == deg_x)
}

/// Splits `p = ½·∂²p/∂x²[x] + L` with `L` of degree at most one in `x`.
pub fn degree_two_split(p: &NCPolynomial) -> Result<(NCPolynomial, NCPolynomial)> {
    let dx = p.degree(LetterClass::X);
    if dx > 2 {
        return Err(Error::DegreeTooHigh {
            what: "x",
            found: dx,
            allowed: 2,
        });
    }
    let hess = partial_hessian_x(p)?;
    let vars = p.vars();
    let xs: Vec<NCPolynomial> = (1..=vars.gx)
        .map(|j| NCPolynomial::var(hess.poly.vars(), Letter::x(j as u16)))
        .collect::<Result<_>>()?;
    let hess_part = hess
        .poly
        .substitute(LetterClass::H, &xs)?
        .scale(&Rational::new(1.into(), 2.into()))
        .with_vars(vars)?;
    let rest = p - &hess_part;
    debug_assert!(rest.degree(LetterClass::X) <= 1);
    Ok((hess_part, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse;

    fn p(s: &str) -> NCPolynomial {
        parse(s, VarCounts::new(1, 1)).unwrap()
    }

    fn hx(s: &str) -> NCPolynomial {
        partial_hessian_x(&p(s)).unwrap().into_poly()
    }

    #[test]
    fn hessian_of_ax3a() {
        let q = hx("a1*x1^3*a1");
        assert_eq!(q, p("2*(a1*h1*x1*h1*a1 + a1*h1^2*x1*a1 + a1*x1*h1^2*a1)"));
    }

    #[test]
    fn hessian_vanishes_for_degree_one() {
        assert!(hx("a1*x1 + x1*a1").is_zero());
    }

    #[test]
    fn hessian_of_x2ax_plus_xax2() {
        let q = hx("x1^2*a1*x1 + x1*a1*x1^2");
        let expected =
            p("2*(h1*x1*a1*h1 + h1^2*a1*x1 + x1*h1*a1*h1 + h1*a1*x1*h1 + x1*a1*h1^2 + h1*a1*h1*x1)");
        assert_eq!(q, expected);
    }

    #[test]
    fn a_hessians() {
        let k = |s: &str| partial_hessian_a(&p(s)).unwrap().into_poly();
        assert_eq!(k("a1^2"), p("2*h1^2"));
        assert_eq!(k("a1*x1*a1"), p("2*h1*x1*h1"));
        assert!(k("x1*a1*x1").is_zero());
        let h = partial_hessian_a(&p("a1^2")).unwrap();
        assert_eq!(h.to_string(), "2*k1^2");
    }

    #[test]
    fn direction_letters_rejected() {
        assert_eq!(partial_hessian_x(&p("h1*x1")), Err(Error::HasDirectionLetters));
    }

    #[test]
    fn homogeneous_parts() {
        let q = p("a1*x1 + a1^2*x1 + x1^2");
        assert_eq!(homogeneous_part(&q, 1, 1), p("a1*x1"));
        let r = p("a1*x1^3*a1");
        assert_eq!(homogeneous_part(&r, 2, 3), r);
        assert!(homogeneous_part(&p("x1^2*a1*x1 + x1*a1*x1^2"), 1, 2).is_zero());
    }

    #[test]
    fn degree_two_splits() {
        assert_eq!(degree_two_split(&p("x1^2 + a1*x1 + a1")).unwrap(), (p("x1^2"), p("a1*x1 + a1")));
        assert_eq!(
            degree_two_split(&p("a1*x1^2*a1")).unwrap(),
            (p("a1*x1^2*a1"), NCPolynomial::zero(VarCounts::new(1, 1)))
        );
        let (h, l) = degree_two_split(&p("x1*a1*x1 + x1 + 1")).unwrap();
        let q = p("x1*a1*x1 + x1 + 1");
        assert_eq!(h, x_homogeneous_part(&q, 2));
        assert_eq!(l, p("x1 + 1"));
        assert!(matches!(degree_two_split(&p("x1^3")), Err(Error::DegreeTooHigh { .. })));
    }

    #[test]
    fn every_hessian_word_has_two_directions() {
        let q = hx("a1*x1^3*a1 + x1^4 + x1*a1*x1");
        for (w, _) in q.terms() {
            assert_eq!(w.degree(LetterClass::H), 2);
        }
    }
}
