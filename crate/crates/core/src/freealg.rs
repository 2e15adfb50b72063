//! Exact arithmetic in the free algebra generated by the symmetric letters
//! `a_1..a_ga`, `x_1..x_gx` and the direction letters `h_1..h_gh`.
//!
//! Coefficients are arbitrary-precision rationals, so every identity checked
//! on these objects is an exact equality. Words are ordered graded
//! lexicographically (length first, then letters with `A < X < H` and
//! ascending index); that order drives map iteration and printing.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Rational coefficient type used throughout the symbolic layer.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(num.into(), den.into())
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(n.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LetterClass {
    A,
    X,
    H,
}

impl LetterClass {
    pub fn symbol(self) -> char {
        match self {
            LetterClass::A => 'a',
            LetterClass::X => 'x',
            LetterClass::H => 'h',
        }
    }
}

/// A single symmetric generator; `index` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub class: LetterClass,
    pub index: u16,
}

impl Letter {
    pub const fn new(class: LetterClass, index: u16) -> Self {
        Letter { class, index }
    }
    pub const fn a(index: u16) -> Self {
        Letter::new(LetterClass::A, index)
    }
    pub const fn x(index: u16) -> Self {
        Letter::new(LetterClass::X, index)
    }
    pub const fn h(index: u16) -> Self {
        Letter::new(LetterClass::H, index)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.class.symbol(), self.index)
    }
}

/// Number of declared letters per class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VarCounts {
    pub ga: usize,
    pub gx: usize,
    pub gh: usize,
}

impl VarCounts {
    /// Direction letters replace `x` letters, so `gh = gx`.
    pub fn new(ga: usize, gx: usize) -> Self {
        VarCounts { ga, gx, gh: gx }
    }

    pub fn with_directions(ga: usize, gx: usize, gh: usize) -> Self {
        VarCounts { ga, gx, gh }
    }

    pub fn count(&self, class: LetterClass) -> usize {
        match class {
            LetterClass::A => self.ga,
            LetterClass::X => self.gx,
            LetterClass::H => self.gh,
        }
    }

    pub fn check_letter(&self, letter: Letter) -> Result<()> {
        let declared = self.count(letter.class);
        if letter.index == 0 || letter.index as usize > declared {
            return Err(Error::LetterOutOfRange {
                class: letter.class,
                index: letter.index as usize,
                declared,
            });
        }
        Ok(())
    }
}

/// A finite sequence of letters; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn transpose(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn degree(&self, class: LetterClass) -> usize {
        self.0.iter().filter(|l| l.class == class).count()
    }

    pub fn is_symmetric(&self) -> bool {
        self.0.iter().eq(self.0.iter().rev())
    }

    /// Positions of letters of the given class.
    pub fn positions(&self, class: LetterClass) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, l)| l.class == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    /// Grammar form, with runs of a repeated letter folded into powers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if run > 1 {
                write!(f, "{l}^{run}")?;
            } else {
                write!(f, "{l}")?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Per-class maximal letter counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Bidegree {
    pub a: usize,
    pub x: usize,
    pub h: usize,
}

impl Bidegree {
    pub fn new(a: usize, x: usize, h: usize) -> Self {
        Bidegree { a, x, h }
    }
}

/// Exact rational linear combination of words, stored canonically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCPolynomial {
    vars: VarCounts,
    terms: BTreeMap<Word, Rational>,
}

impl NCPolynomial {
    pub fn zero(vars: VarCounts) -> Self {
        NCPolynomial {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: VarCounts) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn constant(vars: VarCounts, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Word::empty(), c);
        p
    }

    pub fn var(vars: VarCounts, letter: Letter) -> Result<Self> {
        Self::monomial(vars, Word::letter(letter), Rational::one())
    }

    pub fn monomial(vars: VarCounts, word: Word, coeff: Rational) -> Result<Self> {
        for l in word.letters() {
            vars.check_letter(*l)?;
        }
        let mut p = Self::zero(vars);
        p.add_term(word, coeff);
        Ok(p)
    }

    pub fn from_terms<I>(vars: VarCounts, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (w, c) in terms {
            for l in w.letters() {
                vars.check_letter(*l)?;
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    /// Adds `c * w` in place; letters are not validated.
    pub(crate) fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> VarCounts {
        self.vars
    }

    /// Same terms under different declared counts (letters are revalidated).
    pub fn with_vars(&self, vars: VarCounts) -> Result<Self> {
        Self::from_terms(vars, self.terms.iter().map(|(w, c)| (w.clone(), c.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    /// The constant if the polynomial has no letters at all.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Word::empty()).cloned(),
            _ => None,
        }
    }

    pub fn has_class(&self, class: LetterClass) -> bool {
        self.terms.keys().any(|w| w.degree(class) > 0)
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VarCountMismatch {
                left: self.vars,
                right: other.vars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.vars);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars);
        }
        NCPolynomial {
            vars: self.vars,
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.vars);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// The involution: reverses every word.
    pub fn transpose(&self) -> Self {
        NCPolynomial {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.transpose(), c.clone()))
                .collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(w, c)| w.is_symmetric() || self.terms.get(&w.transpose()) == Some(c))
    }

    pub fn degree(&self, class: LetterClass) -> usize {
        self.terms.keys().map(|w| w.degree(class)).max().unwrap_or(0)
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree {
            a: self.degree(LetterClass::A),
            x: self.degree(LetterClass::X),
            h: self.degree(LetterClass::H),
        }
    }

    pub fn total_degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Keeps the terms whose word satisfies `pred`.
    pub fn filter_terms(&self, mut pred: impl FnMut(&Word) -> bool) -> Self {
        NCPolynomial {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| pred(w))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homomorphic replacement of every letter of `class` by the matching image.
    pub fn substitute(&self, class: LetterClass, images: &[NCPolynomial]) -> Result<Self> {
        let expected = self.vars.count(class);
        if images.len() != expected {
            return Err(Error::ImageCountMismatch {
                class,
                expected,
                got: images.len(),
            });
        }
        for img in images {
            self.check_vars(img)?;
        }
        let mut out = Self::zero(self.vars);
        for (w, c) in &self.terms {
            if w.letters().iter().any(|l| {
                l.class == class && images[l.index as usize - 1].is_zero()
            }) {
                continue;
            }
            let mut acc = Self::constant(self.vars, c.clone());
            let mut pending = Word::empty();
            for l in w.letters() {
                if l.class == class {
                    if !pending.is_empty() {
                        acc = acc.right_mul_word(&pending);
                        pending = Word::empty();
                    }
                    acc = &acc * &images[l.index as usize - 1];
                } else {
                    pending.push(*l);
                }
            }
            if !pending.is_empty() {
                acc = acc.right_mul_word(&pending);
            }
            for (w2, c2) in acc.terms {
                out.add_term(w2, c2);
            }
        }
        Ok(out)
    }

    pub fn right_mul_word(&self, w: &Word) -> Self {
        NCPolynomial {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(u, c)| (u.concat(w), c.clone()))
                .collect(),
        }
    }

    pub fn left_mul_word(&self, w: &Word) -> Self {
        NCPolynomial {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(u, c)| (w.concat(u), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if w.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{abs}*{w}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for NCPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a, 'b> $trait<&'b NCPolynomial> for &'a NCPolynomial {
            type Output = NCPolynomial;
            fn $method(self, rhs: &'b NCPolynomial) -> NCPolynomial {
                self.$checked(rhs).expect("polynomial variable counts differ")
            }
        }
        impl $trait<NCPolynomial> for NCPolynomial {
            type Output = NCPolynomial;
            fn $method(self, rhs: NCPolynomial) -> NCPolynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &NCPolynomial {
    type Output = NCPolynomial;
    fn neg(self) -> NCPolynomial {
        NCPolynomial {
            vars: self.vars,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Neg for NCPolynomial {
    type Output = NCPolynomial;
    fn neg(self) -> NCPolynomial {
        -&self
    }
}

/// Rectangular matrix whose entries are polynomials over a shared alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixPoly {
    rows: usize,
    cols: usize,
    vars: VarCounts,
    entries: Vec<NCPolynomial>,
}

impl MatrixPoly {
    pub fn zeros(rows: usize, cols: usize, vars: VarCounts) -> Self {
        MatrixPoly {
            rows,
            cols,
            vars,
            entries: vec![NCPolynomial::zero(vars); rows * cols],
        }
    }

    pub fn identity(n: usize, vars: VarCounts) -> Self {
        let mut m = Self::zeros(n, n, vars);
        for i in 0..n {
            m.set(i, i, NCPolynomial::one(vars));
        }
        m
    }

    pub fn from_rows(vars: VarCounts, rows: Vec<Vec<NCPolynomial>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::Shape("ragged rows".into()));
            }
            for p in row {
                if p.vars() != vars {
                    return Err(Error::VarCountMismatch {
                        left: vars,
                        right: p.vars(),
                    });
                }
                entries.push(p);
            }
        }
        Ok(MatrixPoly {
            rows: nrows,
            cols: ncols,
            vars,
            entries,
        })
    }

    /// Constant matrix from rational entries.
    pub fn from_constants(vars: VarCounts, rows: &[Vec<Rational>]) -> Result<Self> {
        Self::from_rows(
            vars,
            rows.iter()
                .map(|r| r.iter().map(|c| NCPolynomial::constant(vars, c.clone())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> VarCounts {
        self.vars
    }

    pub fn get(&self, i: usize, j: usize) -> &NCPolynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut NCPolynomial {
        &mut self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: NCPolynomial) {
        assert_eq!(p.vars(), self.vars, "entry variable counts differ");
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[NCPolynomial] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[NCPolynomial] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(NCPolynomial::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Matrix transpose combined with the entrywise involution.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, self.vars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let p = self.get(i, j);
                if !p.is_zero() {
                    out.set(j, i, p.transpose());
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn map_entries(&self, mut f: impl FnMut(&NCPolynomial) -> NCPolynomial) -> Self {
        MatrixPoly {
            rows: self.rows,
            cols: self.cols,
            vars: self.vars,
            entries: self.entries.iter().map(&mut f).collect(),
        }
    }

    pub fn try_map_entries(
        &self,
        mut f: impl FnMut(&NCPolynomial) -> Result<NCPolynomial>,
    ) -> Result<Self> {
        let entries = self.entries.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(MatrixPoly {
            rows: self.rows,
            cols: self.cols,
            vars: self.vars,
            entries,
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map_entries(|p| p.scale(c))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VarCountMismatch {
                left: self.vars,
                right: other.vars,
            });
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(p, q)| p + q)
            .collect();
        Ok(MatrixPoly {
            entries,
            ..self.clone_shape()
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(p, q)| p - q)
            .collect();
        Ok(MatrixPoly {
            entries,
            ..self.clone_shape()
        })
    }

    fn clone_shape(&self) -> Self {
        MatrixPoly {
            rows: self.rows,
            cols: self.cols,
            vars: self.vars,
            entries: Vec::new(),
        }
    }

    /// Product that skips structurally zero entries on both sides.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.vars != other.vars {
            return Err(Error::VarCountMismatch {
                left: self.vars,
                right: other.vars,
            });
        }
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let rhs_nonzero: Vec<Vec<usize>> = (0..other.rows)
            .map(|k| (0..other.cols).filter(|&j| !other.get(k, j).is_zero()).collect())
            .collect();
        let mut out = Self::zeros(self.rows, other.cols, self.vars);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lhs = self.get(i, k);
                if lhs.is_zero() {
                    continue;
                }
                for &j in &rhs_nonzero[k] {
                    let prod = lhs * other.get(k, j);
                    let slot = out.get_mut(i, j);
                    for (w, c) in prod.terms {
                        slot.add_term(w, c);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len(), self.vars);
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out.set(oi, oj, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &MatrixPoly) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    pub fn substitute(&self, class: LetterClass, images: &[NCPolynomial]) -> Result<Self> {
        self.try_map_entries(|p| p.substitute(class, images))
    }

    /// Row-major grid of entry strings.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(ToString::to_string).collect())
            .collect()
    }
}

impl Serialize for MatrixPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'b> Mul<&'b MatrixPoly> for &MatrixPoly {
    type Output = MatrixPoly;
    fn mul(self, rhs: &'b MatrixPoly) -> MatrixPoly {
        self.checked_mul(rhs).expect("incompatible matrix product")
    }
}

impl<'b> Add<&'b MatrixPoly> for &MatrixPoly {
    type Output = MatrixPoly;
    fn add(self, rhs: &'b MatrixPoly) -> MatrixPoly {
        self.checked_add(rhs).expect("incompatible matrix sum")
    }
}

impl<'b> Sub<&'b MatrixPoly> for &MatrixPoly {
    type Output = MatrixPoly;
    fn sub(self, rhs: &'b MatrixPoly) -> MatrixPoly {
        self.checked_sub(rhs).expect("incompatible matrix difference")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v11() -> VarCounts {
        VarCounts::new(1, 1)
    }

    fn a1() -> NCPolynomial {
        NCPolynomial::var(v11(), Letter::a(1)).unwrap()
    }

    fn x1() -> NCPolynomial {
        NCPolynomial::var(v11(), Letter::x(1)).unwrap()
    }

    fn h1() -> NCPolynomial {
        NCPolynomial::var(v11(), Letter::h(1)).unwrap()
    }

    #[test]
    fn additive_inverse_cancels() {
        let p = x1() + (-x1());
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn doubling_and_identity() {
        let ax = &a1() * &x1();
        let two = &ax + &ax;
        assert_eq!(two.coeff(&Word::new(vec![Letter::a(1), Letter::x(1)])), rat_int(2));
        let p = &a1() * &x1().pow(3) + &x1().pow(3) * &a1();
        assert_eq!(&p + &NCPolynomial::zero(v11()), p);
    }

    #[test]
    fn product_is_noncommutative() {
        let ax = &a1() * &x1();
        let xa = &x1() * &a1();
        assert_ne!(ax, xa);
        let lhs = (&a1() + &x1()) * (&a1() - &x1());
        let expected = a1().pow(2) - &a1() * &x1() + &x1() * &a1() - x1().pow(2);
        assert_eq!(lhs, expected);
        let p = &a1() * &x1();
        assert_eq!(&NCPolynomial::one(v11()) * &p, p);
    }

    #[test]
    fn transpose_examples() {
        let v = VarCounts::new(1, 2);
        let a = NCPolynomial::var(v, Letter::a(1)).unwrap();
        let xx1 = NCPolynomial::var(v, Letter::x(1)).unwrap();
        let xx2 = NCPolynomial::var(v, Letter::x(2)).unwrap();
        let w = &(&a * &xx1) * &xx2;
        assert_eq!(w.transpose(), &(&xx2 * &xx1) * &a);

        let p = &(&a1() * &x1().pow(3)) * &a1();
        assert!(p.is_symmetric());
        let q = &(&x1().pow(2) * &a1()) * &x1() + &(&x1() * &a1()) * &x1().pow(2);
        assert_eq!(q.transpose(), q);
    }

    #[test]
    fn bidegree_examples() {
        let p = &(&a1() * &x1().pow(3)) * &a1();
        assert_eq!(p.bidegree(), Bidegree::new(2, 3, 0));
        assert_eq!(NCPolynomial::constant(v11(), rat_int(5)).bidegree(), Bidegree::default());
        let q = (&(&(&(&a1() * &h1()) * &x1()) * &h1()) * &a1()).scale(&rat_int(2));
        assert_eq!(q.bidegree(), Bidegree::new(2, 1, 2));
        assert_eq!(NCPolynomial::zero(v11()).bidegree(), Bidegree::default());
    }

    #[test]
    fn substitution_examples() {
        let two_h2 = h1().pow(2).scale(&rat_int(2));
        assert_eq!(
            two_h2.substitute(LetterClass::H, &[x1()]).unwrap(),
            x1().pow(2).scale(&rat_int(2))
        );
        let zero = NCPolynomial::zero(v11());
        let xax = &(&x1() * &a1()) * &x1();
        assert!(xax.substitute(LetterClass::X, std::slice::from_ref(&zero)).unwrap().is_zero());
        let ahxha = &(&(&(&a1() * &h1()) * &x1()) * &h1()) * &a1();
        assert!(ahxha.substitute(LetterClass::X, std::slice::from_ref(&zero)).unwrap().is_zero());
        let ahha = &(&(&a1() * &h1()) * &h1()) * &a1();
        assert_eq!(ahha.substitute(LetterClass::X, &[zero]).unwrap(), ahha);
    }

    #[test]
    fn substitution_length_mismatch() {
        let err = x1().substitute(LetterClass::X, &[]).unwrap_err();
        assert!(matches!(err, Error::ImageCountMismatch { expected: 1, got: 0, .. }));
    }

    #[test]
    fn varcount_mismatch_is_an_error() {
        let p = NCPolynomial::one(VarCounts::new(1, 1));
        let q = NCPolynomial::one(VarCounts::new(2, 1));
        assert!(matches!(p.checked_add(&q), Err(Error::VarCountMismatch { .. })));
        assert!(matches!(p.checked_mul(&q), Err(Error::VarCountMismatch { .. })));
    }

    #[test]
    fn letter_range_checked() {
        assert!(NCPolynomial::var(v11(), Letter::x(2)).is_err());
        assert!(NCPolynomial::var(v11(), Letter::a(0)).is_err());
    }

    #[test]
    fn word_order_is_graded_lex() {
        let mut words = [Word::new(vec![Letter::x(1), Letter::a(1)]),
            Word::new(vec![Letter::h(1)]),
            Word::new(vec![Letter::a(1), Letter::x(1)]),
            Word::empty(),
            Word::new(vec![Letter::a(2)]),
            Word::new(vec![Letter::a(1)])];
        words.sort();
        let shown: Vec<String> = words.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["1", "a1", "a2", "h1", "a1*x1", "x1*a1"]);
    }

    #[test]
    fn matrix_transpose_and_product() {
        let v = v11();
        let m = MatrixPoly::from_rows(
            v,
            vec![vec![a1(), &a1() * &x1()], vec![NCPolynomial::zero(v), x1()]],
        )
        .unwrap();
        let t = m.transpose();
        assert_eq!(*t.get(1, 0), &x1() * &a1());
        let i = MatrixPoly::identity(2, v);
        assert_eq!(&m * &i, m);
        assert_eq!((&m * &m).transpose(), &t * &t);
    }
}
