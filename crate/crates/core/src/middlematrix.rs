//! Border vectors, middle matrices and the congruence that removes `x` from
//! the middle matrix.
//!
//! A Hessian `q(a,x)[h]` is written as `V^T Z V` where each border entry is a
//! right-form label `h_j * m(a,x)`. Entries are grouped into blocks by the
//! `x`-degree of `m`; within a block they are sorted by the canonical order of
//! the row label `m^T * h_j`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use num_traits::One;
use serde::{Serialize, Serializer};

use crate::calculus::{Direction, HessianPoly};
use crate::error::{Error, Result};
use crate::freealg::{Letter, LetterClass, MatrixPoly, NCPolynomial, Rational, VarCounts, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderMode {
    /// Every admissible label up to the degree bounds of the source polynomial.
    Full,
    /// Labels bounded by the degrees of the labels that actually occur.
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorderVector {
    entries: Vec<Word>,
    blocks: Vec<Range<usize>>,
    mode: BorderMode,
    index: HashMap<Word, usize>,
}

impl BorderVector {
    /// Builds a border from labels `h_j * m`, grouping and sorting them.
    pub fn from_labels(labels: impl IntoIterator<Item = Word>, mode: BorderMode) -> Result<Self> {
        let mut grouped: Vec<Vec<Word>> = Vec::new();
        for w in labels {
            match w.letters().first() {
                Some(l) if l.class == LetterClass::H && w.degree(LetterClass::H) == 1 => {}
                _ => return Err(Error::Shape(format!("`{w}` is not a border label h*m"))),
            }
            let k = w.degree(LetterClass::X);
            if grouped.len() <= k {
                grouped.resize(k + 1, Vec::new());
            }
            grouped[k].push(w);
        }
        let mut entries = Vec::new();
        let mut blocks = Vec::new();
        for mut group in grouped {
            group.sort_by_cached_key(Word::transpose);
            group.dedup();
            let start = entries.len();
            entries.extend(group);
            blocks.push(start..entries.len());
        }
        let index = entries.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Ok(BorderVector {
            entries,
            blocks,
            mode,
            index,
        })
    }

    pub fn entries(&self) -> &[Word] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index ranges of the blocks `V_0, V_1, ...`.
    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn mode(&self) -> BorderMode {
        self.mode
    }

    pub fn position(&self, label: &Word) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Right-form labels such as `h1*x1*a1`.
    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(ToString::to_string).collect()
    }

    /// Row labels `m^T * h_j`.
    pub fn row_labels(&self) -> Vec<String> {
        self.entries.iter().map(|w| w.transpose().to_string()).collect()
    }

    /// The border evaluated as a column of polynomials, with `h` still present.
    pub fn as_column(&self, vars: VarCounts) -> Result<MatrixPoly> {
        let rows = self
            .entries
            .iter()
            .map(|w| NCPolynomial::monomial(vars, w.clone(), Rational::one()).map(|p| vec![p]))
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(MatrixPoly::zeros(0, 1, vars));
        }
        MatrixPoly::from_rows(vars, rows)
    }
}

/// Splits a word with exactly two `H` letters into `(row label, middle, column label)`.
fn split_at_directions(w: &Word) -> Option<(Word, Word, Word)> {
    let pos = w.positions(LetterClass::H);
    let [i, j] = pos[..] else { return None };
    let letters = w.letters();
    let mut row = Word::letter(letters[i]);
    for l in letters[..i].iter().rev() {
        row.push(*l);
    }
    let middle = w.slice(i + 1, j);
    let col = w.slice(j, w.len());
    Some((row, middle, col))
}

/// All words in `a`, `x` with at most `max_x` x-letters and `max_a` a-letters.
fn enumerate_tails(vars: VarCounts, max_a: usize, max_x: usize) -> Vec<Word> {
    let alphabet: Vec<Letter> = (1..=vars.ga as u16)
        .map(Letter::a)
        .chain((1..=vars.gx as u16).map(Letter::x))
        .collect();
    let mut out = vec![Word::empty()];
    let mut frontier = vec![(Word::empty(), 0usize, 0usize)];
    while let Some((w, na, nx)) = frontier.pop() {
        for &l in &alphabet {
            let (na2, nx2) = match l.class {
                LetterClass::A => (na + 1, nx),
                _ => (na, nx + 1),
            };
            if na2 > max_a || nx2 > max_x {
                continue;
            }
            let mut next = w.clone();
            next.push(l);
            out.push(next.clone());
            frontier.push((next, na2, nx2));
        }
    }
    out
}

/// Border vector of a Hessian in `x`.
pub fn border_vector(q: &HessianPoly, mode: BorderMode) -> Result<BorderVector> {
    let vars = q.poly().vars();
    if q.is_zero() {
        return BorderVector::from_labels(std::iter::empty(), mode);
    }
    let (max_a, max_x) = match mode {
        BorderMode::Full => {
            let (da, dx) = q.source_bidegree();
            (da, dx.saturating_sub(2))
        }
        BorderMode::Reduced => {
            let mut caps = (0, 0);
            for (w, _) in q.poly().terms() {
                let (row, _, col) = split_at_directions(w).ok_or(Error::NotDegreeTwoInDirection)?;
                for label in [row, col] {
                    caps.0 = caps.0.max(label.degree(LetterClass::A));
                    caps.1 = caps.1.max(label.degree(LetterClass::X));
                }
            }
            caps
        }
    };
    let tails = enumerate_tails(vars, max_a, max_x);
    let labels = (1..=vars.gh as u16).flat_map(|j| {
        tails
            .iter()
            .map(move |t| Word::letter(Letter::h(j)).concat(t))
    });
    BorderVector::from_labels(labels, mode)
}

/// Closed-form block heights `N_0, ..., N_{d_x-2}` of the full border.
pub fn full_block_heights(vars: VarCounts, d_a: usize, d_x: usize) -> Vec<u128> {
    if d_x < 2 {
        return Vec::new();
    }
    let ga = vars.ga as u128;
    let gx = vars.gx as u128;
    (0..=d_x - 2)
        .map(|j| {
            // ways[s] = number of (n_0..n_j) with sum s, weighted by ga^s
            let mut ways = vec![0u128; d_a + 1];
            ways[0] = 1;
            for _ in 0..=j {
                let mut next = vec![0u128; d_a + 1];
                for (s, &w) in ways.iter().enumerate() {
                    for add in 0..=d_a - s {
                        next[s + add] += w * ga.pow(add as u32);
                    }
                }
                ways = next;
            }
            vars.gh as u128 * gx.pow(j as u32) * ways.iter().sum::<u128>()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiddleMatrix {
    border: BorderVector,
    z: MatrixPoly,
    direction: Direction,
}

/// Middle matrix of `q` over `border`; every split label of `q` must occur in it.
pub fn middle_matrix(q: &HessianPoly, border: &BorderVector) -> Result<MiddleMatrix> {
    let vars = q.poly().vars();
    let n = border.len();
    let mut z = MatrixPoly::zeros(n, n, vars);
    for (w, c) in q.poly().terms() {
        let (row, middle, col) = split_at_directions(w).ok_or(Error::NotDegreeTwoInDirection)?;
        let r = border
            .position(&row)
            .ok_or_else(|| Error::BorderTooSmall(row.to_string()))?;
        let k = border
            .position(&col)
            .ok_or_else(|| Error::BorderTooSmall(col.to_string()))?;
        let entry = z.get_mut(r, k);
        *entry = &*entry + &NCPolynomial::monomial(vars, middle, c.clone())?;
    }
    Ok(MiddleMatrix {
        border: border.clone(),
        z,
        direction: q.direction(),
    })
}

/// Reduced border and middle matrix in one step.
pub fn middle_matrix_of(q: &HessianPoly, mode: BorderMode) -> Result<MiddleMatrix> {
    let border = border_vector(q, mode)?;
    middle_matrix(q, &border)
}

impl MiddleMatrix {
    pub fn border(&self) -> &BorderVector {
        &self.border
    }

    pub fn z(&self) -> &MatrixPoly {
        &self.z
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.border.len()
    }

    pub fn is_empty(&self) -> bool {
        self.border.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.border.blocks.len()
    }

    /// The block `Z_{ij}`.
    pub fn block(&self, i: usize, j: usize) -> MatrixPoly {
        let b = &self.border.blocks;
        self.z.submatrix(b[i].clone(), b[j].clone())
    }

    /// `V^T Z V`, which equals the source Hessian.
    pub fn reconstruct(&self) -> NCPolynomial {
        let vars = self.z.vars();
        let mut out = NCPolynomial::zero(vars);
        for (r, row_label) in self.border.entries.iter().enumerate() {
            let left = row_label.transpose();
            for (c, col_label) in self.border.entries.iter().enumerate() {
                let e = self.z.get(r, c);
                if e.is_zero() {
                    continue;
                }
                for (w, coeff) in e.terms() {
                    out.add_term(left.concat(w).concat(col_label), coeff.clone());
                }
            }
        }
        out
    }

    /// `Z(a, 0)`: every term containing an `x` letter is dropped.
    pub fn derived(&self) -> MiddleMatrix {
        MiddleMatrix {
            border: self.border.clone(),
            z: self
                .z
                .map_entries(|p| p.filter_terms(|w| w.degree(LetterClass::X) == 0)),
            direction: self.direction,
        }
    }

    /// Rows (equivalently columns, for symmetric `Z`) that are not identically zero.
    pub fn active(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| {
                self.z.row(i).iter().any(|p| !p.is_zero())
                    || (0..self.len()).any(|r| !self.z.get(r, i).is_zero())
            })
            .collect()
    }

    /// Drops zero rows and columns.
    pub fn pruned(&self) -> MiddleMatrix {
        let active = self.active();
        let keep: Vec<usize> = (0..self.len()).filter(|&i| active[i]).collect();
        let border = BorderVector::from_labels(
            keep.iter().map(|&i| self.border.entries[i].clone()),
            self.border.mode,
        )
        .expect("labels come from a valid border");
        let mut z = MatrixPoly::zeros(keep.len(), keep.len(), self.z.vars());
        for &r in &keep {
            for &c in &keep {
                let (nr, nc) = (
                    border.position(&self.border.entries[r]).expect("kept"),
                    border.position(&self.border.entries[c]).expect("kept"),
                );
                z.set(nr, nc, self.z.get(r, c).clone());
            }
        }
        MiddleMatrix {
            border,
            z,
            direction: self.direction,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.z.is_symmetric()
    }
}

impl fmt::Display for MiddleMatrix {
    /// Column-aligned grid with row labels `m^T*h` and column labels `h*m`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let grid = self.z.to_strings();
        let rows = self.border.row_labels();
        let cols = self.border.labels();
        let label_w = rows.iter().map(String::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols.len())
            .map(|c| {
                grid.iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(cols[c].len()))
                    .max()
                    .unwrap_or(1)
            })
            .collect();
        write!(f, "{:label_w$} |", "")?;
        for (c, l) in cols.iter().enumerate() {
            write!(f, " {:>w$}", l, w = widths[c])?;
        }
        writeln!(f)?;
        for (r, row) in grid.iter().enumerate() {
            write!(f, "{:>label_w$} |", rows[r])?;
            for (c, e) in row.iter().enumerate() {
                write!(f, " {:>w$}", e, w = widths[c])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Serialize for MiddleMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            mode: BorderMode,
            border: Vec<String>,
            blocks: Vec<[usize; 2]>,
            z: &'a MatrixPoly,
        }
        Repr {
            mode: self.border.mode,
            border: self.border.labels(),
            blocks: self.border.blocks.iter().map(|r| [r.start, r.end]).collect(),
            z: &self.z,
        }
        .serialize(s)
    }
}

/// `K_j` for consecutive blocks: rows from `V_{j+1}`, columns from `V_j`.
///
/// A row `h_s m' x_k w` (with `m'` free of `x`) maps to column `h_k w` with
/// entry `x_s m'`; rows of `Z` that vanish identically get a zero row.
pub fn k_matrices(m: &MiddleMatrix) -> Result<Vec<MatrixPoly>> {
    if m.direction != Direction::X {
        return Err(Error::InvalidArgument(
            "congruence is defined for Hessians in x".into(),
        ));
    }
    let vars = m.z.vars();
    let active = m.active();
    let blocks = &m.border.blocks;
    let mut out = Vec::new();
    for j in 0..blocks.len().saturating_sub(1) {
        let (rows, cols) = (blocks[j + 1].clone(), blocks[j].clone());
        let mut k = MatrixPoly::zeros(rows.len(), cols.len(), vars);
        for r in rows.clone() {
            if !active[r] {
                continue;
            }
            let label = &m.border.entries[r];
            let letters = label.letters();
            let s = letters[0].index;
            let p = letters
                .iter()
                .position(|l| l.class == LetterClass::X)
                .expect("block j+1 labels have an x letter");
            let mut col_label = Word::letter(Letter::h(letters[p].index));
            for l in &letters[p + 1..] {
                col_label.push(*l);
            }
            let c = m
                .border
                .position(&col_label)
                .ok_or_else(|| Error::BorderTooSmall(col_label.to_string()))?;
            if !cols.contains(&c) {
                return Err(Error::Internal(format!("label {col_label} not in block {j}")));
            }
            let mut entry = Word::letter(Letter::x(s));
            for l in &letters[1..p] {
                entry.push(*l);
            }
            k.set(
                r - rows.start,
                c - cols.start,
                NCPolynomial::monomial(vars, entry, Rational::one())?,
            );
        }
        out.push(k);
    }
    Ok(out)
}

/// `binom(alpha, j)` as an exact rational.
fn binomial(alpha: &Rational, j: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 0..j {
        acc = acc * (alpha - Rational::from_integer(i.into())) / Rational::from_integer((i + 1).into());
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceData {
    pub ks: Vec<MatrixPoly>,
    pub a: MatrixPoly,
    pub b: MatrixPoly,
    pub b_inv: MatrixPoly,
}

/// Outcome of each exact identity of the congruence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceCheck {
    pub za_is_derived: bool,
    pub b_squared_is_a: bool,
    pub b_times_inverse_is_identity: bool,
    pub btzb_is_derived: bool,
}

impl CongruenceCheck {
    pub fn all(&self) -> bool {
        self.za_is_derived
            && self.b_squared_is_a
            && self.b_times_inverse_is_identity
            && self.btzb_is_derived
    }
}

/// Builds `K_j`, `A = I - (subdiagonal K)`, `B = sqrt(A)` and `B^{-1}`.
///
/// Fails with `Error::Internal` when `Z A != Z(a,0)`.
pub fn congruence(m: &MiddleMatrix) -> Result<CongruenceData> {
    let ks = k_matrices(m)?;
    let vars = m.z.vars();
    let n = m.len();
    let blocks = &m.border.blocks;
    let mut nil = MatrixPoly::zeros(n, n, vars);
    let minus_one = -Rational::one();
    for (j, k) in ks.iter().enumerate() {
        nil.set_block(blocks[j + 1].start, blocks[j].start, &k.scale(&minus_one));
    }
    let id = MatrixPoly::identity(n, vars);
    let a = &id + &nil;

    let za = m.z.checked_mul(&a)?;
    if za != *m.derived().z() {
        return Err(Error::Internal("Z A differs from Z(a,0)".into()));
    }

    let half = Rational::new(1.into(), 2.into());
    let minus_half = -half.clone();
    let mut b = id.clone();
    let mut b_inv = id.clone();
    let mut power = id;
    for j in 1..blocks.len().max(1) {
        power = power.checked_mul(&nil)?;
        if power.is_zero() {
            break;
        }
        b = &b + &power.scale(&binomial(&half, j));
        b_inv = &b_inv + &power.scale(&binomial(&minus_half, j));
    }
    Ok(CongruenceData { ks, a, b, b_inv })
}

impl CongruenceData {
    /// Checks every identity exactly.
    pub fn verify(&self, m: &MiddleMatrix) -> Result<CongruenceCheck> {
        let derived = m.derived();
        let n = m.len();
        let id = MatrixPoly::identity(n, m.z.vars());
        let zb = m.z.checked_mul(&self.b)?;
        Ok(CongruenceCheck {
            za_is_derived: m.z.checked_mul(&self.a)? == *derived.z(),
            b_squared_is_a: self.b.checked_mul(&self.b)? == self.a,
            b_times_inverse_is_identity: self.b.checked_mul(&self.b_inv)? == id,
            btzb_is_derived: self.b.transpose().checked_mul(&zb)? == *derived.z(),
        })
    }

    /// `(A - I)^p` for the first `p` at which it vanishes.
    pub fn nilpotency_index(&self) -> usize {
        let n = self.a.rows();
        let vars = self.a.vars();
        let nil = &self.a - &MatrixPoly::identity(n, vars);
        let mut power = nil.clone();
        let mut p = 1;
        while !power.is_zero() {
            power = &power * &nil;
            p += 1;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::partial_hessian_x;
    use crate::text::parse;

    fn v() -> VarCounts {
        VarCounts::new(1, 1)
    }

    fn p(s: &str) -> NCPolynomial {
        parse(s, v()).unwrap()
    }

    fn mm(s: &str) -> MiddleMatrix {
        middle_matrix_of(&partial_hessian_x(&p(s)).unwrap(), BorderMode::Reduced).unwrap()
    }

    fn grid(rows: &[&[&str]]) -> MatrixPoly {
        MatrixPoly::from_rows(v(), rows.iter().map(|r| r.iter().map(|e| p(e)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn example_border() {
        let m = mm("a1*x1^3*a1");
        assert_eq!(m.border().labels(), ["h1", "h1*a1", "h1*x1", "h1*x1*a1", "h1*a1*x1"]);
        assert_eq!(m.border().row_labels(), ["h1", "a1*h1", "x1*h1", "a1*x1*h1", "x1*a1*h1"]);
        assert_eq!(m.border().blocks(), &[0..2, 2..5]);
    }

    #[test]
    fn example_matrix_and_reconstruction() {
        let m = mm("a1*x1^3*a1");
        let expected = grid(&[
            &["0", "0", "0", "0", "0"],
            &["0", "2*x1", "0", "2", "0"],
            &["0", "0", "0", "0", "0"],
            &["0", "2", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
        ]);
        assert_eq!(*m.z(), expected);
        assert_eq!(m.reconstruct(), partial_hessian_x(&p("a1*x1^3*a1")).unwrap().into_poly());
        assert!(m.is_symmetric());
    }

    #[test]
    fn trivial_border() {
        let q = HessianPoly::from_poly(p("2*h1^2"), Direction::X).unwrap();
        let m = middle_matrix_of(&q, BorderMode::Reduced).unwrap();
        assert_eq!(m.border().labels(), ["h1"]);
        assert_eq!(*m.z(), grid(&[&["2"]]));
        assert!(k_matrices(&m).unwrap().is_empty());
    }

    #[test]
    fn too_small_border() {
        let q = partial_hessian_x(&p("a1*x1^3*a1")).unwrap();
        let small = border_vector(&HessianPoly::from_poly(p("h1^2"), Direction::X).unwrap(), BorderMode::Reduced)
            .unwrap();
        assert!(matches!(middle_matrix(&q, &small), Err(Error::BorderTooSmall(_))));
    }

    #[test]
    fn binomials() {
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(binomial(&half, 0), Rational::one());
        assert_eq!(binomial(&half, 1), half);
        assert_eq!(binomial(&half, 2), Rational::new((-1).into(), 8.into()));
        assert_eq!(binomial(&-half, 2), Rational::new(3.into(), 8.into()));
    }

    #[test]
    fn full_heights_match_enumeration() {
        for (ga, gx, da, dx) in [(1, 1, 2, 3), (2, 2, 2, 4), (1, 2, 1, 4), (2, 1, 3, 3)] {
            let vars = VarCounts::new(ga, gx);
            let heights = full_block_heights(vars, da, dx);
            let tails = enumerate_tails(vars, da, dx - 2);
            for (j, h) in heights.iter().enumerate() {
                let count = tails.iter().filter(|t| t.degree(LetterClass::X) == j).count() * gx;
                assert_eq!(*h, count as u128, "ga={ga} gx={gx} da={da} dx={dx} j={j}");
            }
        }
        assert_eq!(full_block_heights(VarCounts::new(1, 1), 2, 3), vec![3, 6]);
    }

    #[test]
    fn second_example_matrix() {
        let m = mm("a1*x1^3 + x1^3*a1");
        let expected = grid(&[
            &["0", "2*x1", "0", "2", "0"],
            &["2*x1", "0", "2", "0", "0"],
            &["0", "2", "0", "0", "0"],
            &["2", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
        ]);
        assert_eq!(*m.z(), expected);
    }

    #[test]
    fn third_example_blocks_and_k() {
        let m = mm("x1^2*a1*x1 + x1*a1*x1^2");
        assert_eq!(m.border().labels(), ["h1", "h1*a1", "h1*x1", "h1*x1*a1", "h1*a1*x1"]);
        assert_eq!(m.block(0, 0), grid(&[&["2*x1*a1 + 2*a1*x1", "0"], &["0", "0"]]));
        assert_eq!(m.block(0, 1), grid(&[&["2*a1", "0", "2"], &["0", "0", "0"]]));
        let derived = grid(&[
            &["0", "0", "2*a1", "0", "2"],
            &["0", "0", "0", "0", "0"],
            &["2*a1", "0", "0", "0", "0"],
            &["0", "0", "0", "0", "0"],
            &["2", "0", "0", "0", "0"],
        ]);
        assert_eq!(*m.derived().z(), derived);
        let ks = k_matrices(&m).unwrap();
        assert_eq!(ks, vec![grid(&[&["x1", "0"], &["0", "0"], &["x1*a1", "0"]])]);
        let lhs = &(&m.block(0, 1) * &ks[0]) + &m.derived().block(0, 0);
        assert_eq!(lhs, m.block(0, 0));
        let data = congruence(&m).unwrap();
        assert!(data.verify(&m).unwrap().all());
        assert_eq!(data.nilpotency_index(), 2);
    }

    #[test]
    fn congruence_for_degree_two_is_trivial() {
        let m = mm("a1*x1^2*a1 + x1^2");
        let data = congruence(&m).unwrap();
        assert!(data.ks.is_empty());
        let id = MatrixPoly::identity(m.len(), v());
        assert_eq!(data.a, id);
        assert_eq!(data.b, id);
        assert_eq!(*m.z(), *m.derived().z());
    }
}
