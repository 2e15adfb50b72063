//! Gram matrices: find a symmetric PSD rational `M` with
//! `sum_{r,c} M_rc * b_r^T b_c = target` over a fixed list of words `b`.
//!
//! Coefficient matching is exact. Entries that the constraints leave free are
//! chosen numerically (alternating projections), rationalized, and the last
//! entry of every constraint is solved exactly so the identity stays exact.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{ToPrimitive, Zero};

use super::exact::{is_psd_exact, rationalize};
use crate::error::{Error, Result};
use crate::freealg::{rat_int, NCPolynomial, Rational, Word};

const MAX_DENOMINATOR: i64 = 1_000_000;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GramSolution {
    pub basis: Vec<Word>,
    pub matrix: Vec<Vec<Rational>>,
    pub min_eig: f64,
    /// No entry was left to numerical choice.
    pub unique: bool,
    pub exact_psd: bool,
}

struct Unknown {
    r: usize,
    c: usize,
    mult: Rational,
}

impl Unknown {
    fn weight(&self) -> f64 {
        if self.r == self.c {
            1.0
        } else {
            2.0
        }
    }
}

/// `sum M_rc b_r^T b_c` as an exact polynomial.
pub fn gram_expand(basis: &[Word], m: &[Vec<Rational>], target_vars: crate::freealg::VarCounts) -> NCPolynomial {
    let mut out = NCPolynomial::zero(target_vars);
    for (r, br) in basis.iter().enumerate() {
        let left = br.transpose();
        for (c, bc) in basis.iter().enumerate() {
            if !m[r][c].is_zero() {
                out.add_term(left.concat(bc), m[r][c].clone());
            }
        }
    }
    out
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

/// Solves the Gram problem; fails if a target word is not representable, the
/// constraints are inconsistent, or no PSD solution is found within `tol`.
pub fn solve_gram(basis: &[Word], target: &NCPolynomial, tol: f64) -> Result<GramSolution> {
    if !target.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let m = basis.len();
    let mut unknowns = Vec::new();
    let mut classes: BTreeMap<Word, Vec<usize>> = BTreeMap::new();
    for r in 0..m {
        for c in r..m {
            let w = basis[r].transpose().concat(&basis[c]);
            let key = std::cmp::min(w.clone(), w.transpose());
            let mult = if r != c && w.is_symmetric() { 2 } else { 1 };
            classes.entry(key).or_default().push(unknowns.len());
            unknowns.push(Unknown {
                r,
                c,
                mult: rat_int(mult),
            });
        }
    }
    for (w, _) in target.terms() {
        let key = std::cmp::min(w.clone(), w.transpose());
        if !classes.contains_key(&key) {
            return Err(Error::HypothesisViolated(format!(
                "monomial {w} cannot be written over the basis"
            )));
        }
    }
    let class_list: Vec<(Rational, Vec<usize>)> = classes
        .iter()
        .map(|(k, ids)| (target.coeff(k), ids.clone()))
        .collect();

    let mut value: Vec<Option<Rational>> = vec![None; unknowns.len()];
    let mut slot = vec![vec![0usize; m]; m];
    for (i, u) in unknowns.iter().enumerate() {
        slot[u.r][u.c] = i;
        slot[u.c][u.r] = i;
    }
    let index_of = |r: usize, c: usize| slot[r][c];

    loop {
        let mut changed = false;
        for (t, ids) in &class_list {
            let fixed: Rational = ids
                .iter()
                .filter_map(|&i| value[i].as_ref().map(|v| v * &unknowns[i].mult))
                .sum();
            let free: Vec<usize> = ids.iter().copied().filter(|&i| value[i].is_none()).collect();
            match free.len() {
                0 if fixed != *t => {
                    return Err(Error::HypothesisViolated(
                        "Gram constraints are inconsistent with a PSD matrix".into(),
                    ))
                }
                1 => {
                    let i = free[0];
                    value[i] = Some((t - &fixed) / &unknowns[i].mult);
                    changed = true;
                }
                _ => {}
            }
        }
        for r in 0..m {
            match &value[index_of(r, r)] {
                Some(v) if v < &Rational::zero() => {
                    return Err(Error::NotPsd {
                        min_eig: v.to_f64().unwrap_or(f64::NAN),
                    })
                }
                Some(v) if v.is_zero() => {
                    for c in 0..m {
                        let i = index_of(r, c);
                        if value[i].is_none() {
                            value[i] = Some(Rational::zero());
                            changed = true;
                        }
                    }
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let free_classes: Vec<&(Rational, Vec<usize>)> = class_list
        .iter()
        .filter(|(_, ids)| ids.iter().any(|&i| value[i].is_none()))
        .collect();
    let unique = free_classes.is_empty();

    if !unique {
        let numeric = choose_free_entries(&unknowns, &value, &free_classes, m);
        for (t, ids) in &free_classes {
            let free: Vec<usize> = ids.iter().copied().filter(|&i| value[i].is_none()).collect();
            let (last, rest) = free.split_last().expect("free class has unknowns");
            for &i in rest {
                value[i] = Some(rationalize(numeric[i], MAX_DENOMINATOR));
            }
            let fixed: Rational = ids
                .iter()
                .filter(|&&i| i != *last)
                .map(|&i| value[i].as_ref().expect("set") * &unknowns[i].mult)
                .sum();
            value[*last] = Some((t - &fixed) / &unknowns[*last].mult);
        }
    }

    let mut matrix = vec![vec![Rational::zero(); m]; m];
    for (u, v) in unknowns.iter().zip(&value) {
        let v = v.clone().expect("every unknown is determined");
        matrix[u.r][u.c] = v.clone();
        matrix[u.c][u.r] = v;
    }
    let numeric = super::exact::to_f64_grid(&matrix);
    let min_eig = min_eigenvalue(&numeric);
    let scale = numeric.amax().max(1.0);
    if min_eig < -tol * scale {
        return Err(Error::NotPsd { min_eig });
    }
    let exact_psd = is_psd_exact(&matrix);
    Ok(GramSolution {
        basis: basis.to_vec(),
        matrix,
        min_eig,
        unique,
        exact_psd,
    })
}

/// Dykstra's alternating projections between the affine constraint set and
/// the PSD cone, in the Frobenius inner product.
fn choose_free_entries(
    unknowns: &[Unknown],
    value: &[Option<Rational>],
    free_classes: &[&(Rational, Vec<usize>)],
    m: usize,
) -> Vec<f64> {
    let fixed_f: Vec<Option<f64>> = value
        .iter()
        .map(|v| v.as_ref().map(|r| r.to_f64().unwrap_or(f64::NAN)))
        .collect();
    let targets: Vec<(f64, Vec<usize>)> = free_classes
        .iter()
        .map(|(t, ids)| (t.to_f64().unwrap_or(f64::NAN), ids.clone()))
        .collect();

    let to_vec = |x: &DMatrix<f64>| -> Vec<f64> { unknowns.iter().map(|u| x[(u.r, u.c)]).collect() };
    let to_mat = |v: &[f64]| -> DMatrix<f64> {
        let mut x = DMatrix::zeros(m, m);
        for (u, val) in unknowns.iter().zip(v) {
            x[(u.r, u.c)] = *val;
            x[(u.c, u.r)] = *val;
        }
        x
    };
    let project_affine = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let mut v = to_vec(x);
        for (i, f) in fixed_f.iter().enumerate() {
            if let Some(f) = f {
                v[i] = *f;
            }
        }
        for (t, ids) in &targets {
            let free: Vec<usize> = ids.iter().copied().filter(|&i| fixed_f[i].is_none()).collect();
            let mu = |i: usize| unknowns[i].mult.to_f64().unwrap_or(1.0);
            let current: f64 = ids.iter().map(|&i| mu(i) * v[i]).sum();
            let denom: f64 = free.iter().map(|&i| mu(i) * mu(i) / unknowns[i].weight()).sum();
            let lambda = (t - current) / denom;
            for &i in &free {
                v[i] += lambda * mu(i) / unknowns[i].weight();
            }
        }
        to_mat(&v)
    };

    let mut x = project_affine(&DMatrix::zeros(m, m));
    let mut p = DMatrix::zeros(m, m);
    let mut q = DMatrix::zeros(m, m);
    for _ in 0..MAX_ITERATIONS {
        let y = project_affine(&(&x + &p));
        p = &x + &p - &y;
        let next = project_psd(&(&y + &q));
        q = &y + &q - &next;
        x = next;
        let candidate = project_affine(&x);
        let scale = candidate.amax().max(1.0);
        if min_eigenvalue(&candidate) > -1e-13 * scale {
            break;
        }
    }
    to_vec(&project_affine(&x))
}
