//! Structure decompositions `p = L + scale * V^T Z V`.
//!
//! Every decomposition is recomposed exactly before it is returned; numeric
//! factors are attached as certificates and never enter the exact identity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::exact::{psd_rank_one_terms, rationalize, to_f64_grid};
use super::gram::{min_eigenvalue, solve_gram, GramSolution};
use super::ser_rational;
use crate::calculus::{degree_two_split, homogeneous_part, partial_hessian_x};
use crate::error::{Error, Result};
use crate::freealg::{Letter, LetterClass, MatrixPoly, NCPolynomial, Rational, VarCounts, Word};
use crate::middlematrix::{middle_matrix_of, BorderMode};
use crate::numeval::{eval_matrixpoly, sample_tuple, trial_seed, DomainKind, DomainSpec, EvalPoint, MatrixTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecompositionForm {
    /// `p = L + ½ V(a)[x]^T Z(a) V(a)[x]`.
    #[serde(rename = "VZV_L")]
    VzvL,
    /// As `VZV_L` with a constant PSD `Z`, written as a sum of squares.
    #[serde(rename = "SOS_L")]
    SosL,
    /// `p = L + R(x)^T R(x) - S(a)^T S(a)`.
    ConvexConcave,
    /// `p = L + Λ(a,x)^T Λ(a,x)`.
    SeparateConvex,
    /// `p = W(x)^T (R(a) - Q(a)) W(x)`.
    #[serde(rename = "LocalRQ")]
    LocalRq,
}

/// `weight * poly^T poly`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Square {
    #[serde(serialize_with = "ser_rational")]
    pub weight: Rational,
    pub poly: NCPolynomial,
}

fn ser_rational_grid<S: Serializer>(
    g: &Option<Vec<Vec<Rational>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    g.as_ref()
        .map(|g| {
            g.iter()
                .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        })
        .serialize(s)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Factors {
    /// Positive squares.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub squares: Vec<Square>,
    /// Squares entering with a minus sign.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub negative_squares: Vec<Square>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<MatrixPoly>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<MatrixPoly>,
    /// Gram matrix of `Q` over the words `a_l * w_i`.
    #[serde(
        rename = "Q_gram",
        serialize_with = "ser_rational_grid",
        skip_serializing_if = "Option::is_none"
    )]
    pub q_gram: Option<Vec<Vec<Rational>>>,
}

/// Floating-point evidence attached to an exact decomposition.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NumericCertificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_psd: Option<bool>,
    /// Rows of a real factor `F` with `F^T F ≈ Z`, over the basis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_residual: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub form: DecompositionForm,
    #[serde(rename = "L")]
    pub l: NCPolynomial,
    /// The column `V`.
    pub basis: Vec<NCPolynomial>,
    #[serde(serialize_with = "ser_rational")]
    pub scale: Rational,
    #[serde(rename = "Z")]
    pub z: MatrixPoly,
    pub factors: Factors,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<NumericCertificate>,
    pub residual_zero: bool,
}

/// `sum_{r,c} basis_r^T Z_rc basis_c`.
pub(crate) fn quadratic_form(basis: &[NCPolynomial], z: &MatrixPoly) -> NCPolynomial {
    let mut out = NCPolynomial::zero(z.vars());
    for (r, br) in basis.iter().enumerate() {
        let left = br.transpose();
        for (c, bc) in basis.iter().enumerate() {
            let e = z.get(r, c);
            if !e.is_zero() {
                out = &out + &(&(&left * e) * bc);
            }
        }
    }
    out
}

impl Decomposition {
    /// `L + scale * V^T Z V`.
    pub fn recompose(&self) -> NCPolynomial {
        &self.l + &quadratic_form(&self.basis, &self.z).scale(&self.scale)
    }

    fn finish(mut self, p: &NCPolynomial) -> Result<Self> {
        let residual = p - &self.recompose();
        if !residual.is_zero() {
            return Err(Error::Internal(format!("recomposition residual {residual}")));
        }
        self.residual_zero = true;
        Ok(self)
    }
}

fn check_input(p: &NCPolynomial, max_a: Option<usize>) -> Result<()> {
    if p.has_class(LetterClass::H) {
        return Err(Error::HasDirectionLetters);
    }
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let dx = p.degree(LetterClass::X);
    if dx > 2 {
        return Err(Error::DegreeTooHigh {
            what: "x",
            found: dx,
            allowed: 2,
        });
    }
    if let Some(max_a) = max_a {
        let da = p.degree(LetterClass::A);
        if da > max_a {
            return Err(Error::DegreeTooHigh {
                what: "a",
                found: da,
                allowed: max_a,
            });
        }
    }
    Ok(())
}

fn word_poly(vars: VarCounts, w: &Word) -> Result<NCPolynomial> {
    NCPolynomial::monomial(vars, w.clone(), Rational::one())
}

fn constant_grid(vars: VarCounts, g: &[Vec<Rational>]) -> Result<MatrixPoly> {
    if g.is_empty() {
        return Ok(MatrixPoly::zeros(0, 0, vars));
    }
    MatrixPoly::from_constants(vars, g)
}

fn grid_of_constants(z: &MatrixPoly) -> Option<Vec<Vec<Rational>>> {
    (0..z.rows())
        .map(|i| z.row(i).iter().map(NCPolynomial::as_constant).collect())
        .collect()
}

/// Exact squares `weight * (v . basis)^T (v . basis)` of a PSD rational matrix.
fn exact_squares(basis: &[NCPolynomial], m: &[Vec<Rational>], scale: &Rational) -> Option<Vec<Square>> {
    let vars = basis.first()?.vars();
    let terms = psd_rank_one_terms(m)?;
    Some(
        terms
            .into_iter()
            .map(|t| {
                let poly = basis
                    .iter()
                    .zip(&t.vector)
                    .fold(NCPolynomial::zero(vars), |acc, (b, c)| &acc + &b.scale(c));
                Square {
                    weight: &t.weight * scale,
                    poly,
                }
            })
            .collect(),
    )
}

/// Factor `R` (rows) with `R^T R = Z` for a real constant PSD matrix.
///
/// Eigenvalues in `[-tol, tol * |Z|]` are dropped; anything below `-tol` is an error.
pub fn sos_factor_constant(z: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if !z.is_square() {
        return Err(Error::Shape("factor input must be square".into()));
    }
    let n = z.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let scale = z.amax().max(1.0);
    let asym = (z - z.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::AsymmetricMatrix(asym));
    }
    let eig = SymmetricEigen::new((z + z.transpose()) * 0.5);
    let min = eig.eigenvalues.min();
    if min < -tol {
        return Err(Error::NotPsd { min_eig: min });
    }
    let mut kept: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tol * scale)
        .map(|(i, &l)| (l, i))
        .collect();
    kept.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut r = DMatrix::zeros(kept.len(), n);
    for (row, (l, i)) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(*i);
        for j in 0..n {
            r[(row, j)] = l.sqrt() * v[j];
        }
    }
    Ok(r)
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `p = L + ½ V(a)[x]^T Z(a) V(a)[x]` for `p` of degree at most two in `x`.
///
/// `Z(a)` is the pruned middle matrix of the Hessian; `V` is the border with
/// every `h_j` replaced by `x_j`. `Z(A) ⪰ 0` is sampled over the `a` part of
/// `domain` unless `Z` is constant, where it is decided exactly.
pub fn decompose_convex_in_x(
    p: &NCPolynomial,
    domain: &DomainSpec,
    samples: usize,
    seed: u64,
) -> Result<Decomposition> {
    check_input(p, None)?;
    let vars = p.vars();
    let (_, l) = degree_two_split(p)?;
    let q = partial_hessian_x(p)?;
    let mm = middle_matrix_of(&q, BorderMode::Reduced)?.pruned();
    let basis = mm
        .border()
        .entries()
        .iter()
        .map(|w| {
            let mut letters = w.letters().to_vec();
            letters[0] = Letter::x(letters[0].index);
            word_poly(vars, &Word::new(letters))
        })
        .collect::<Result<Vec<_>>>()?;
    let z = mm.z().try_map_entries(|e| e.with_vars(vars))?;
    let half = Rational::new(1.into(), 2.into());

    let mut cert = NumericCertificate::default();
    let mut factors = Factors::default();
    let form = match grid_of_constants(&z) {
        Some(grid) => {
            let numeric = to_f64_grid(&grid);
            cert.min_eig = Some(min_eigenvalue(&numeric));
            match exact_squares(&basis, &grid, &half) {
                Some(sq) => {
                    factors.squares = sq;
                    cert.exact_psd = Some(true);
                    let r = sos_factor_constant(&numeric, 1e-10)?;
                    cert.factor_residual = Some((r.transpose() * &r - &numeric).amax());
                    cert.factor = Some(rows_of(&r));
                    DecompositionForm::SosL
                }
                None if basis.is_empty() => DecompositionForm::SosL,
                None => {
                    cert.exact_psd = Some(false);
                    cert.notes.push("constant middle matrix is not PSD".into());
                    DecompositionForm::VzvL
                }
            }
        }
        None => {
            let mut worst = f64::INFINITY;
            for s in 0..samples {
                let n = 1 + s % 4;
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, s as u64));
                let pt = EvalPoint {
                    a: sample_tuple(domain.a, vars.ga, n, &mut rng),
                    x: MatrixTuple::zeros(vars.gx, n),
                    h: None,
                    k: None,
                };
                worst = worst.min(min_eigenvalue(&eval_matrixpoly(&z, &pt)?));
            }
            if samples > 0 {
                cert.min_eig = Some(worst);
            }
            cert.samples = samples;
            cert.notes.push("Z(A) ⪰ 0 sampled over the a-domain".into());
            DecompositionForm::VzvL
        }
    };
    Decomposition {
        form,
        l,
        basis,
        scale: half,
        z,
        factors,
        certificate: Some(cert),
        residual_zero: false,
    }
    .finish(p)
}

fn letters_of(class: LetterClass, g: usize) -> Vec<Word> {
    (1..=g as u16)
        .map(|i| Word::letter(Letter::new(class, i)))
        .collect()
}

fn bidegree_at_most_one(p: &NCPolynomial) -> bool {
    p.terms()
        .all(|(w, _)| w.degree(LetterClass::A) <= 1 && w.degree(LetterClass::X) <= 1)
}

/// `p = L + Λ^T Λ` with `Λ` of bidegree at most `(1,1)` and `L` of bidegree
/// at most `(1,1)`, for `p` of degree at most two in each of `a` and `x`.
///
/// The Gram matrices over `[J, x]` and `[J, a]`, `J = {x_i a_j, a_j x_i}`,
/// share their `J` block. Writing them as `[A B]^T [A B]` and
/// `[A' B']^T [A' B']`, the map `U = A' A^+` is a partial isometry and
/// `Λ = [[A, B, U^T B'], [0, 0, W B']]` with `W = (I - U U^T)^{1/2}`.
pub fn decompose_separately_convex(p: &NCPolynomial, tol: f64) -> Result<Decomposition> {
    check_input(p, Some(2))?;
    let vars = p.vars();
    let (ga, gx) = (vars.ga, vars.gx);
    let mut jset = Vec::new();
    for i in 1..=gx as u16 {
        for j in 1..=ga as u16 {
            jset.push(Word::new(vec![Letter::x(i), Letter::a(j)]));
        }
    }
    for i in 1..=gx as u16 {
        for j in 1..=ga as u16 {
            jset.push(Word::new(vec![Letter::a(j), Letter::x(i)]));
        }
    }
    let nj = jset.len();
    let xs = letters_of(LetterClass::X, gx);
    let as_ = letters_of(LetterClass::A, ga);

    let part = |a, x| homogeneous_part(p, a, x);
    let target_x = &(&part(2, 2) + &part(1, 2)) + &part(0, 2);
    let target_a = &(&part(2, 2) + &part(2, 1)) + &part(2, 0);
    let basis_x: Vec<Word> = jset.iter().chain(&xs).cloned().collect();
    let basis_a: Vec<Word> = jset.iter().chain(&as_).cloned().collect();
    let gram_x = solve_gram(&basis_x, &target_x, tol)?;
    let gram_a = solve_gram(&basis_a, &target_a, tol)?;
    for r in 0..nj {
        for c in 0..nj {
            if gram_x.matrix[r][c] != gram_a.matrix[r][c] {
                return Err(Error::Internal("Gram blocks over J disagree".into()));
            }
        }
    }

    let fx = to_f64_grid(&gram_x.matrix);
    let fa = to_f64_grid(&gram_a.matrix);
    let rx = sos_factor_constant(&fx, tol * fx.amax().max(1.0))?;
    let ra = sos_factor_constant(&fa, tol * fa.amax().max(1.0))?;
    let a_blk = rx.columns(0, nj).into_owned();
    let b_blk = rx.columns(nj, gx).into_owned();
    let a2_blk = ra.columns(0, nj).into_owned();
    let b2_blk = ra.columns(nj, ga).into_owned();
    let pinv = a_blk
        .clone()
        .pseudo_inverse(1e-10 * a_blk.amax().max(1.0))
        .map_err(|e| Error::Internal(e.to_string()))?;
    let u = &a2_blk * pinv;
    let defect = DMatrix::identity(u.nrows(), u.nrows()) - &u * u.transpose();
    let eig = SymmetricEigen::new((&defect + defect.transpose()) * 0.5);
    let w = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();

    let size = nj + gx + ga;
    let (rows_top, rows_bottom) = (rx.nrows(), ra.nrows());
    let mut lambda = DMatrix::zeros(rows_top + rows_bottom, size);
    lambda.view_mut((0, 0), (rows_top, nj)).copy_from(&a_blk);
    lambda.view_mut((0, nj), (rows_top, gx)).copy_from(&b_blk);
    lambda
        .view_mut((0, nj + gx), (rows_top, ga))
        .copy_from(&(u.transpose() * &b2_blk));
    lambda
        .view_mut((rows_top, nj + gx), (rows_bottom, ga))
        .copy_from(&(&w * &b2_blk));
    let cross = b_blk.transpose() * u.transpose() * &b2_blk;

    // exact Gram over [J, x, a]
    let mut m = vec![vec![Rational::zero(); size]; size];
    for r in 0..nj + gx {
        for c in 0..nj + gx {
            m[r][c] = gram_x.matrix[r][c].clone();
        }
    }
    let a_index = |k: usize| if k < nj { k } else { k + gx };
    for r in 0..nj + ga {
        for c in 0..nj + ga {
            if r >= nj || c >= nj {
                m[a_index(r)][a_index(c)] = gram_a.matrix[r][c].clone();
            }
        }
    }
    for i in 0..gx {
        for j in 0..ga {
            let v = rationalize(cross[(i, j)], 1_000_000);
            m[nj + i][nj + gx + j] = v.clone();
            m[nj + gx + j][nj + i] = v;
        }
    }
    let proof_gram = to_f64_grid(&m);
    let factor_residual = (lambda.transpose() * &lambda - &proof_gram).amax();

    let mut notes = Vec::new();
    let mut absorbed = m.clone();
    for i in 0..gx {
        for j in 0..ga {
            let v = p.coeff(&Word::new(vec![Letter::x(i as u16 + 1), Letter::a(j as u16 + 1)]));
            absorbed[nj + i][nj + gx + j] = v.clone();
            absorbed[nj + gx + j][nj + i] = v;
        }
    }
    if psd_rank_one_terms(&absorbed).is_some() {
        if absorbed != m {
            notes.push("bidegree (1,1) part absorbed into the Gram matrix".into());
        }
        m = absorbed;
    }

    let basis = basis_x
        .iter()
        .chain(&as_)
        .map(|w| word_poly(vars, w))
        .collect::<Result<Vec<_>>>()?;
    let z = constant_grid(vars, &m)?;
    let l = p - &quadratic_form(&basis, &z);
    if !bidegree_at_most_one(&l) {
        return Err(Error::HypothesisViolated(format!(
            "remainder {l} has bidegree above (1,1)"
        )));
    }
    let squares = exact_squares(&basis, &m, &Rational::one());
    let mut cert = NumericCertificate {
        min_eig: Some(min_eigenvalue(&to_f64_grid(&m))),
        samples: 0,
        exact_psd: Some(squares.is_some()),
        factor: Some(rows_of(&lambda)),
        factor_residual: Some(factor_residual),
        notes,
    };
    if !(gram_x.unique && gram_a.unique) {
        cert.notes
            .push("free Gram entries chosen numerically and rationalized".into());
    }
    Decomposition {
        form: DecompositionForm::SeparateConvex,
        l,
        basis,
        scale: Rational::one(),
        z,
        factors: Factors {
            squares: squares.unwrap_or_default(),
            ..Factors::default()
        },
        certificate: Some(cert),
        residual_zero: false,
    }
    .finish(p)
}

/// `p = L + R(x)^T R(x) - S(a)^T S(a)` with `L` of bidegree at most `(1,1)`.
pub fn decompose_convex_concave(p: &NCPolynomial, tol: f64) -> Result<Decomposition> {
    check_input(p, Some(2))?;
    let vars = p.vars();
    let xs = letters_of(LetterClass::X, vars.gx);
    let as_ = letters_of(LetterClass::A, vars.ga);
    let gram_x: GramSolution = solve_gram(&xs, &homogeneous_part(p, 0, 2), tol)?;
    let gram_a: GramSolution = solve_gram(&as_, &-homogeneous_part(p, 2, 0), tol)?;
    let (nx, na) = (xs.len(), as_.len());
    let mut m = vec![vec![Rational::zero(); nx + na]; nx + na];
    for r in 0..nx {
        for c in 0..nx {
            m[r][c] = gram_x.matrix[r][c].clone();
        }
    }
    for r in 0..na {
        for c in 0..na {
            m[nx + r][nx + c] = -gram_a.matrix[r][c].clone();
        }
    }
    let basis = xs
        .iter()
        .chain(&as_)
        .map(|w| word_poly(vars, w))
        .collect::<Result<Vec<_>>>()?;
    let z = constant_grid(vars, &m)?;
    let l = p - &quadratic_form(&basis, &z);
    if !bidegree_at_most_one(&l) {
        return Err(Error::HypothesisViolated(format!(
            "remainder {l} has bidegree above (1,1); p is not of the form L + R(x)^T R(x) - S(a)^T S(a)"
        )));
    }
    let squares = exact_squares(&basis[..nx], &gram_x.matrix, &Rational::one());
    let negative = exact_squares(&basis[nx..], &gram_a.matrix, &Rational::one());
    let cert = NumericCertificate {
        min_eig: Some(gram_x.min_eig.min(gram_a.min_eig)),
        exact_psd: Some(squares.is_some() && negative.is_some()),
        ..NumericCertificate::default()
    };
    Decomposition {
        form: DecompositionForm::ConvexConcave,
        l,
        basis,
        scale: Rational::one(),
        z,
        factors: Factors {
            squares: squares.unwrap_or_default(),
            negative_squares: negative.unwrap_or_default(),
            ..Factors::default()
        },
        certificate: Some(cert),
        residual_zero: false,
    }
    .finish(p)
}

/// `p = W(x)^T (R(a) - Q(a)) W(x)` with `W = (1, x_1, ..., x_g)`, `R` of degree
/// at most one in `a` and `Q` a Gram-PSD matrix homogeneous of degree two.
///
/// Every word must be `[x_i] m(a) [x_k]`; `R(A) - Q(A) ⪰ 0` is sampled on
/// the unit ball in `a`.
pub fn local_rq_form(p: &NCPolynomial, samples: usize, seed: u64) -> Result<Decomposition> {
    check_input(p, Some(2))?;
    let vars = p.vars();
    let g = vars.gx;
    let size = g + 1;
    let mut m = MatrixPoly::zeros(size, size, vars);
    let half = Rational::new(1.into(), 2.into());
    let mut add = |r: usize, c: usize, w: Word, coeff: Rational| -> Result<()> {
        let e = m.get_mut(r, c);
        *e = &*e + &NCPolynomial::monomial(vars, w, coeff)?;
        Ok(())
    };
    for (w, c) in p.terms() {
        let letters = w.letters();
        let len = letters.len();
        let xpos = w.positions(LetterClass::X);
        let slot = |l: &Letter| l.index as usize;
        match xpos[..] {
            [] => add(0, 0, w.clone(), c.clone())?,
            [0] if len == 1 => {
                let i = slot(&letters[0]);
                add(i, 0, Word::empty(), c * &half)?;
                add(0, i, Word::empty(), c * &half)?;
            }
            [0] => add(slot(&letters[0]), 0, w.slice(1, len), c.clone())?,
            [k] if k == len - 1 => add(0, slot(&letters[k]), w.slice(0, k), c.clone())?,
            [0, k] if k == len - 1 => {
                add(slot(&letters[0]), slot(&letters[k]), w.slice(1, k), c.clone())?
            }
            _ => return Err(Error::ForbiddenMonomial(w.to_string())),
        }
    }
    if !m.is_symmetric() {
        return Err(Error::Internal("coefficient matrix is not symmetric".into()));
    }
    let r = m.map_entries(|e| e.filter_terms(|w| w.degree(LetterClass::A) <= 1));
    let q = m.map_entries(|e| -e.filter_terms(|w| w.degree(LetterClass::A) == 2));

    let w_words: Vec<Word> = std::iter::once(Word::empty()).chain(letters_of(LetterClass::X, g)).collect();
    let w_polys = w_words
        .iter()
        .map(|w| word_poly(vars, w))
        .collect::<Result<Vec<_>>>()?;
    let mut gram_basis = Vec::new();
    for l in 1..=vars.ga as u16 {
        for w in &w_words {
            gram_basis.push(Word::letter(Letter::a(l)).concat(w));
        }
    }
    let q_target = quadratic_form(&w_polys, &q);
    let gram = solve_gram(&gram_basis, &q_target, 1e-9)?;
    let gram_polys = gram_basis
        .iter()
        .map(|w| word_poly(vars, w))
        .collect::<Result<Vec<_>>>()?;
    let negative = exact_squares(&gram_polys, &gram.matrix, &Rational::one());

    let z = &r - &q;
    let mut worst = f64::INFINITY;
    for s in 0..samples {
        let n = 1 + s % 4;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, s as u64));
        let pt = EvalPoint {
            a: sample_tuple(DomainKind::NormBall { radius: 1.0 }, vars.ga, n, &mut rng),
            x: MatrixTuple::zeros(vars.gx, n),
            h: None,
            k: None,
        };
        worst = worst.min(min_eigenvalue(&eval_matrixpoly(&z, &pt)?));
    }
    let cert = NumericCertificate {
        min_eig: (samples > 0).then_some(worst),
        samples,
        exact_psd: Some(gram.exact_psd),
        notes: vec!["R(A) - Q(A) ⪰ 0 sampled on |A| < 1".into()],
        ..NumericCertificate::default()
    };
    Decomposition {
        form: DecompositionForm::LocalRq,
        l: NCPolynomial::zero(vars),
        basis: w_polys,
        scale: Rational::one(),
        z,
        factors: Factors {
            negative_squares: negative.unwrap_or_default(),
            r: Some(r),
            q: Some(q),
            q_gram: Some(gram.matrix),
            ..Factors::default()
        },
        certificate: Some(cert),
        residual_zero: false,
    }
    .finish(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::rat_int;
    use crate::text::parse;

    fn v() -> VarCounts {
        VarCounts::new(1, 1)
    }

    fn p(s: &str) -> NCPolynomial {
        parse(s, v()).unwrap()
    }

    fn squares(d: &Decomposition) -> Vec<(String, String)> {
        d.factors
            .squares
            .iter()
            .map(|s| (s.weight.to_string(), s.poly.to_string()))
            .collect()
    }

    #[test]
    fn convex_in_x_examples() {
        let d = decompose_convex_in_x(&p("a1*x1^2*a1"), &DomainSpec::ALL, 10, 1).unwrap();
        assert_eq!(d.form, DecompositionForm::SosL);
        assert_eq!(d.z.to_strings(), [["2"]]);
        assert_eq!(d.basis[0].to_string(), "x1*a1");
        assert!(d.l.is_zero());

        let d = decompose_convex_in_x(&p("x1*a1*x1"), &DomainSpec::ALL, 20, 1).unwrap();
        assert_eq!(d.form, DecompositionForm::VzvL);
        assert_eq!(d.z.to_strings(), [["2*a1"]]);
        assert!(d.certificate.unwrap().min_eig.unwrap() < 0.0);

        let ball = DomainSpec {
            a: DomainKind::NormBall { radius: 1.0 },
            x: DomainKind::All,
        };
        let d = decompose_convex_in_x(&p("x1^2 + a1"), &ball, 0, 0).unwrap();
        assert_eq!(d.z.to_strings(), [["2"]]);
        assert_eq!(d.l, p("a1"));
        assert!(matches!(
            decompose_convex_in_x(&p("x1^3"), &ball, 0, 0),
            Err(Error::DegreeTooHigh { .. })
        ));
    }

    #[test]
    fn constant_factors() {
        let id = DMatrix::<f64>::identity(3, 3);
        let r = sos_factor_constant(&id, 1e-10).unwrap();
        assert!((r.transpose() * &r - &id).amax() < 1e-12);
        let z = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let r = sos_factor_constant(&z, 1e-10).unwrap();
        assert_eq!(r.nrows(), 1);
        assert!((r.transpose() * &r - &z).amax() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 1.0]);
        match sos_factor_constant(&bad, 1e-10) {
            Err(Error::NotPsd { min_eig }) => assert!((min_eig + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn separately_convex_examples() {
        let d = decompose_separately_convex(&p("(x1 + a1)^2"), 1e-9).unwrap();
        assert_eq!(squares(&d), [("1".to_string(), "a1 + x1".to_string())]);
        assert!(d.l.is_zero());

        let d = decompose_separately_convex(&p("x1^2 + a1^2"), 1e-9).unwrap();
        let mut got = squares(&d);
        got.sort();
        assert_eq!(got, [("1".into(), "a1".into()), ("1".into(), "x1".into())]);

        let d = decompose_separately_convex(&p("x1*a1^2*x1 + x1^2"), 1e-9).unwrap();
        let mut got = squares(&d);
        got.sort();
        assert_eq!(got, [("1".into(), "a1*x1".into()), ("1".into(), "x1".into())]);
        assert!(d.l.is_zero());
        let cert = d.certificate.unwrap();
        assert!(cert.factor_residual.unwrap() < 1e-9);
    }

    #[test]
    fn convex_concave_examples() {
        let d = decompose_convex_concave(&p("x1^2 - a1^2"), 1e-9).unwrap();
        assert_eq!(d.factors.squares[0].poly, p("x1"));
        assert_eq!(d.factors.negative_squares[0].poly, p("a1"));
        assert!(d.l.is_zero());
        let d = decompose_convex_concave(&p("x1^2 - a1^2 + a1*x1 + x1*a1"), 1e-9).unwrap();
        assert_eq!(d.l, p("a1*x1 + x1*a1"));
        assert!(matches!(
            decompose_convex_concave(&p("x1*a1*x1"), 1e-9),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn local_rq_examples() {
        let d = local_rq_form(&p("x1*a1*x1"), 10, 1).unwrap();
        assert_eq!(d.factors.r.as_ref().unwrap().get(1, 1), &p("a1"));
        assert!(d.factors.q.as_ref().unwrap().is_zero());

        let d = local_rq_form(&p("x1^2 - x1*a1^2*x1"), 50, 2).unwrap();
        assert_eq!(d.factors.r.as_ref().unwrap().get(1, 1), &p("1"));
        assert_eq!(d.factors.q.as_ref().unwrap().get(1, 1), &p("a1^2"));
        assert!(d.certificate.as_ref().unwrap().min_eig.unwrap() > -1e-12);

        let d = local_rq_form(&p("1"), 0, 0).unwrap();
        assert_eq!(d.factors.r.as_ref().unwrap().get(0, 0), &NCPolynomial::constant(v(), rat_int(1)));

        let v2 = VarCounts::new(1, 2);
        let bad = parse("x1*x2*a1 + a1*x2*x1", v2).unwrap();
        assert!(matches!(local_rq_form(&bad, 0, 0), Err(Error::ForbiddenMonomial(_))));
    }
}
