//! Exact rational positive semidefiniteness via pivoted symmetric elimination.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::freealg::Rational;

/// A rank-one term `weight * v v^T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOne {
    pub weight: Rational,
    pub vector: Vec<Rational>,
}

/// Writes a symmetric rational matrix as `sum weight_i v_i v_i^T` with
/// `weight_i > 0`, or returns `None` if it is not positive semidefinite.
///
/// Pivots on the largest remaining diagonal entry; a zero pivot forces the
/// remaining rows to vanish.
pub fn psd_rank_one_terms(m: &[Vec<Rational>]) -> Option<Vec<RankOne>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut s: Vec<Vec<Rational>> = m.to_vec();
    for i in 0..n {
        for j in 0..i {
            if s[i][j] != s[j][i] {
                return None;
            }
        }
    }
    let mut done = vec![false; n];
    let mut out = Vec::new();
    loop {
        let pivot = (0..n)
            .filter(|&i| !done[i])
            .max_by(|&i, &j| s[i][i].cmp(&s[j][j]));
        let Some(k) = pivot else { break };
        let d = s[k][k].clone();
        if d.is_negative() {
            return None;
        }
        if d.is_zero() {
            let rest: Vec<usize> = (0..n).filter(|&i| !done[i]).collect();
            let all_zero = rest.iter().all(|&i| rest.iter().all(|&j| s[i][j].is_zero()));
            return all_zero.then_some(out);
        }
        let v: Vec<Rational> = (0..n).map(|i| &s[i][k] / &d).collect();
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() {
                    continue;
                }
                let delta = &d * &v[i] * &v[j];
                s[i][j] -= delta;
            }
        }
        done[k] = true;
        out.push(RankOne {
            weight: d,
            vector: v,
        });
    }
    Some(out)
}

pub fn is_psd_exact(m: &[Vec<Rational>]) -> bool {
    psd_rank_one_terms(m).is_some()
}

pub fn to_f64_grid(m: &[Vec<Rational>]) -> nalgebra::DMatrix<f64> {
    let n = m.len();
    let c = m.first().map_or(0, Vec::len);
    nalgebra::DMatrix::from_fn(n, c, |i, j| m[i][j].to_f64().unwrap_or(f64::NAN))
}

/// Best rational approximation with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut y = x.abs();
    // convergents h/k
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    if k1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(h1.into(), k1.into());
    if neg {
        -r
    } else {
        r
    }
}
