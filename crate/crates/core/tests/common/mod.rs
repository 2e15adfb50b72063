#![allow(dead_code)]

use nalgebra::DMatrix;
use ncconvex::freealg::rat_int;
use ncconvex::numeval::{random_symmetric, EvalPoint, MatrixTuple};
use ncconvex::{Letter, LetterClass, NCPolynomial, VarCounts, Word};
use proptest::prelude::*;
use rand::Rng;

/// Word with at most `max_a` a-letters and `max_x` x-letters in random order.
pub fn random_word<R: Rng>(rng: &mut R, vars: VarCounts, max_a: usize, max_x: usize) -> Word {
    let na = if vars.ga == 0 { 0 } else { rng.random_range(0..=max_a) };
    let nx = if vars.gx == 0 { 0 } else { rng.random_range(0..=max_x) };
    let mut letters: Vec<Letter> = (0..na).map(|_| Letter::a(rng.random_range(1..=vars.ga as u16))).collect();
    letters.extend((0..nx).map(|_| Letter::x(rng.random_range(1..=vars.gx as u16))));
    for i in (1..letters.len()).rev() {
        letters.swap(i, rng.random_range(0..=i));
    }
    Word::new(letters)
}

/// Random polynomial with small integer coefficients and bidegree at most `(max_a, max_x)`.
pub fn random_poly<R: Rng>(rng: &mut R, vars: VarCounts, terms: usize, max_a: usize, max_x: usize) -> NCPolynomial {
    let t = (0..terms).map(|_| {
        let w = random_word(rng, vars, max_a, max_x);
        let c = rng.random_range(-4i64..=4);
        (w, rat_int(c))
    });
    NCPolynomial::from_terms(vars, t.collect::<Vec<_>>()).unwrap()
}

pub fn symmetrize(p: &NCPolynomial) -> NCPolynomial {
    p + &p.transpose()
}

pub fn random_point<R: Rng>(rng: &mut R, vars: VarCounts, n: usize, with_h: bool) -> EvalPoint {
    let tuple = |g: usize, rng: &mut R| {
        MatrixTuple::new(n, (0..g).map(|_| random_symmetric(n, rng)).collect()).unwrap()
    };
    let a = tuple(vars.ga, rng);
    let x = tuple(vars.gx, rng);
    let pt = EvalPoint::new(a, x).unwrap();
    if with_h {
        let h = tuple(vars.gh, rng);
        pt.with_h(h).unwrap()
    } else {
        pt
    }
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

prop_compose! {
    pub fn arb_word(vars: VarCounts, max_len: usize)
        (letters in prop::collection::vec((0usize..2, 1u16..=3), 0..=max_len)) -> Word {
        Word::new(
            letters
                .into_iter()
                .filter_map(|(c, i)| match c {
                    0 if vars.ga > 0 => Some(Letter::a(1 + (i - 1) % vars.ga as u16)),
                    1 if vars.gx > 0 => Some(Letter::x(1 + (i - 1) % vars.gx as u16)),
                    _ => None,
                })
                .collect(),
        )
    }
}

prop_compose! {
    pub fn arb_poly(vars: VarCounts, max_terms: usize, max_len: usize)
        (terms in prop::collection::vec((arb_word(vars, max_len), -5i64..=5, 1i64..=3), 0..=max_terms))
        -> NCPolynomial {
        NCPolynomial::from_terms(
            vars,
            terms.into_iter().map(|(w, n, d)| (w, ncconvex::freealg::rat(n, d))).collect::<Vec<_>>(),
        )
        .unwrap()
    }
}

/// Symmetric polynomial with x-degree at most `max_x` and a-degree at most `max_a`.
pub fn arb_bounded_symmetric(vars: VarCounts, max_terms: usize, max_a: usize, max_x: usize) -> impl Strategy<Value = NCPolynomial> {
    arb_poly(vars, max_terms, max_a + max_x).prop_map(move |p| {
        let q = p.filter_terms(|w| w.degree(LetterClass::A) <= max_a && w.degree(LetterClass::X) <= max_x);
        symmetrize(&q)
    })
}
