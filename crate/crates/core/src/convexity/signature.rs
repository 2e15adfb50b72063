//! Eigenvalue counts of evaluated middle matrices, the CHSY codimension, and
//! a generic-rank probe.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ser_rational;
use crate::calculus::partial_hessian_x;
use crate::error::{Error, Result};
use crate::freealg::{LetterClass, NCPolynomial, Rational, VarCounts, Word};
use crate::middlematrix::{middle_matrix_of, BorderMode, MiddleMatrix};
use crate::numeval::{eigenvalues, eval_matrixpoly, eval_poly, sample_tuple, trial_seed, DomainKind, EvalPoint, MatrixTuple};

/// Relative threshold separating zero from nonzero eigenvalues and singular values.
pub const ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EigenCounts {
    pub n: usize,
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

fn count_signs(m: &DMatrix<f64>, n: usize) -> EigenCounts {
    let ev = eigenvalues(m);
    let norm = ev.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let cut = ZERO_THRESHOLD * norm;
    let plus = ev.iter().filter(|&&l| l > cut).count();
    let minus = ev.iter().filter(|&&l| l < -cut).count();
    EigenCounts {
        n,
        plus,
        minus,
        zero: ev.len() - plus - minus,
    }
}

fn hessian_middle(p: &NCPolynomial) -> Result<MiddleMatrix> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let dx = p.degree(LetterClass::X);
    if dx < 2 {
        return Err(Error::InvalidArgument(format!(
            "degree in x is {dx}; the Hessian vanishes"
        )));
    }
    middle_matrix_of(&partial_hessian_x(p)?, BorderMode::Reduced)
}

/// Eigenvalue counts of `Z(A, X)` for the Hessian's middle matrix.
pub fn signature_at(p: &NCPolynomial, point: &EvalPoint) -> Result<EigenCounts> {
    let m = hessian_middle(p)?;
    Ok(count_signs(&eval_matrixpoly(m.z(), point)?, point.dim()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureWitness {
    pub seed: u64,
    pub counts: EigenCounts,
    pub point: EvalPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureEstimate {
    /// Best `μ+ / n` found; a lower bound on the positive square count.
    #[serde(serialize_with = "ser_rational")]
    pub mu_plus_sup: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub mu_minus_sup: Rational,
    pub at_x_zero: bool,
    /// Border length of the middle matrix.
    pub matrix_size: usize,
    pub samples: usize,
    /// Points at which a supremum improved.
    pub witnesses: Vec<SignatureWitness>,
    /// For degree at least three in `x`: whether some sample had `μ+ ≥ n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_plus_at_least_n: Option<bool>,
}

/// Samples `Z(A, X)` (or `Z(A, 0)`) and records `sup μ± / n`.
pub fn signature_estimate(
    p: &NCPolynomial,
    at_x_zero: bool,
    nmax: usize,
    trials: usize,
    seed: u64,
) -> Result<SignatureEstimate> {
    let m = hessian_middle(p)?;
    let v = p.vars();
    let nmax = nmax.max(1);
    let mut best = (BigRational::from_integer(0.into()), BigRational::from_integer(0.into()));
    let mut witnesses = Vec::new();
    let mut big_plus = false;
    for trial in 0..trials {
        let s = trial_seed(seed, trial as u64);
        let n = 1 + trial % nmax;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let a = sample_tuple(DomainKind::All, v.ga, n, &mut rng);
        let x = if at_x_zero {
            MatrixTuple::zeros(v.gx, n)
        } else {
            sample_tuple(DomainKind::All, v.gx, n, &mut rng)
        };
        let point = EvalPoint {
            a,
            x,
            h: None,
            k: None,
        };
        let counts = count_signs(&eval_matrixpoly(m.z(), &point)?, n);
        big_plus |= counts.plus >= n;
        let ratio = |c: usize| BigRational::new(c.into(), n.into());
        let (rp, rm) = (ratio(counts.plus), ratio(counts.minus));
        if rp > best.0 || rm > best.1 {
            best.0 = best.0.clone().max(rp);
            best.1 = best.1.clone().max(rm);
            witnesses.push(SignatureWitness {
                seed: s,
                counts,
                point,
            });
        }
    }
    Ok(SignatureEstimate {
        mu_plus_sup: best.0,
        mu_minus_sup: best.1,
        at_x_zero,
        matrix_size: m.len(),
        samples: trials,
        witnesses,
        mu_plus_at_least_n: (p.degree(LetterClass::X) >= 3).then_some(big_plus),
    })
}

fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > ZERO_THRESHOLD * top).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChsyReport {
    pub codim: usize,
    /// `g d (d - 1) / 2` with `d` the number of independent vectors `m(A,X) v`.
    pub bound: usize,
    pub independent: usize,
    pub rank: usize,
    pub g: usize,
    pub n: usize,
}

/// Codimension of `{ (H_j m_i(A,X) v)_{j,i} : H symmetric }` in `R^{g n d}`.
pub fn chsy_codimension(pt: &EvalPoint, v: &DVector<f64>, monomials: &[Word]) -> Result<ChsyReport> {
    let n = pt.dim();
    if v.len() != n {
        return Err(Error::Dimension(format!("vector has length {}, expected {n}", v.len())));
    }
    if v.norm() == 0.0 {
        return Err(Error::InvalidArgument("vector must be nonzero".into()));
    }
    let vars = VarCounts::new(pt.a.len(), pt.x.len());
    let g = vars.gx;
    let d = monomials.len();
    let zs = monomials
        .iter()
        .map(|w| {
            let p = NCPolynomial::monomial(vars, w.clone(), Rational::from_integer(1.into()))?;
            Ok(eval_poly(&p, pt)? * v)
        })
        .collect::<Result<Vec<DVector<f64>>>>()?;
    let zmat = DMatrix::from_columns(&zs);
    let independent = if d == 0 { 0 } else { numeric_rank(&zmat) };

    let sym_basis: Vec<DMatrix<f64>> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            e
        })
        .collect();
    let rows = g * n * d;
    let mut map = DMatrix::zeros(rows, g * sym_basis.len());
    for dir in 0..g {
        for (b, e) in sym_basis.iter().enumerate() {
            let col = dir * sym_basis.len() + b;
            for (i, z) in zs.iter().enumerate() {
                let img = e * z;
                let off = (dir * d + i) * n;
                map.view_mut((off, col), (n, 1)).copy_from(&img);
            }
        }
    }
    let rank = numeric_rank(&map);
    Ok(ChsyReport {
        codim: rows - rank,
        bound: g * independent * independent.saturating_sub(1) / 2,
        independent,
        rank,
        g,
        n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankProbeRow {
    pub n: usize,
    pub trials: usize,
    pub full_rank: usize,
    pub fraction: f64,
}

/// Fraction of random draws at which `q(A, X)` is invertible, per dimension.
pub fn generic_rank_probe(q: &NCPolynomial, nmax: usize, trials: usize, seed: u64) -> Result<Vec<RankProbeRow>> {
    if q.is_zero() {
        return Err(Error::ZeroInput);
    }
    if q.has_class(LetterClass::H) {
        return Err(Error::HasDirectionLetters);
    }
    let v = q.vars();
    (1..=nmax)
        .map(|n| {
            let mut full = 0;
            for t in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, (n * trials + t) as u64));
                let pt = EvalPoint {
                    a: sample_tuple(DomainKind::All, v.ga, n, &mut rng),
                    x: sample_tuple(DomainKind::All, v.gx, n, &mut rng),
                    h: None,
                    k: None,
                };
                if numeric_rank(&eval_poly(q, &pt)?) == n {
                    full += 1;
                }
            }
            Ok(RankProbeRow {
                n,
                trials,
                full_rank: full,
                fraction: if trials == 0 { 0.0 } else { full as f64 / trials as f64 },
            })
        })
        .collect()
}
