//! Floating-point evaluation of polynomials on tuples of real symmetric
//! matrices, plus the samplers used by the randomized tests.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calculus::{Direction, HessianPoly};
use crate::error::{Error, Result};
use crate::freealg::{Letter, LetterClass, MatrixPoly, NCPolynomial};

const SYMMETRY_TOL: f64 = 1e-12;

/// A tuple of real symmetric `n x n` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTuple", into = "RawTuple")]
pub struct MatrixTuple {
    n: usize,
    mats: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawTuple {
    n: usize,
    mats: Vec<Vec<f64>>,
}

impl TryFrom<RawTuple> for MatrixTuple {
    type Error = Error;
    fn try_from(raw: RawTuple) -> Result<Self> {
        let n = raw.n;
        let mats = raw
            .mats
            .into_iter()
            .map(|m| {
                if m.len() != n * n {
                    return Err(Error::Dimension(format!(
                        "expected {} entries for n = {n}, got {}",
                        n * n,
                        m.len()
                    )));
                }
                Ok(DMatrix::from_row_slice(n, n, &m))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixTuple::new(n, mats)
    }
}

impl From<MatrixTuple> for RawTuple {
    fn from(t: MatrixTuple) -> Self {
        RawTuple {
            n: t.n,
            mats: t
                .mats
                .iter()
                .map(|m| m.transpose().iter().copied().collect())
                .collect(),
        }
    }
}

impl MatrixTuple {
    /// Validates shape and symmetry (to `1e-12` relative to the largest entry).
    pub fn new(n: usize, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        for m in &mats {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "matrix is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let scale = m.amax().max(1.0);
            let asym = (m - m.transpose()).amax();
            if asym > SYMMETRY_TOL * scale {
                return Err(Error::AsymmetricMatrix(asym));
            }
        }
        Ok(MatrixTuple { n, mats })
    }

    pub fn zeros(g: usize, n: usize) -> Self {
        MatrixTuple {
            n,
            mats: vec![DMatrix::zeros(n, n); g],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn get(&self, i: usize) -> &DMatrix<f64> {
        &self.mats[i]
    }

    /// `sum_j M_j^2`.
    pub fn sum_of_squares(&self) -> DMatrix<f64> {
        self.mats
            .iter()
            .fold(DMatrix::zeros(self.n, self.n), |acc, m| acc + m * m)
    }

    fn map(&self, n: usize, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> MatrixTuple {
        MatrixTuple {
            n,
            mats: self.mats.iter().map(f).collect(),
        }
    }

    /// `t * self + (1 - t) * other`.
    pub fn lerp(&self, other: &MatrixTuple, t: f64) -> Result<MatrixTuple> {
        if self.n != other.n || self.len() != other.len() {
            return Err(Error::Dimension("tuples differ in shape".into()));
        }
        Ok(MatrixTuple {
            n: self.n,
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| a * t + b * (1.0 - t))
                .collect(),
        })
    }
}

/// Evaluation point `(A, X)` with optional directions `H` (for `x`) and `K` (for `a`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub a: MatrixTuple,
    pub x: MatrixTuple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MatrixTuple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<MatrixTuple>,
}

impl EvalPoint {
    pub fn new(a: MatrixTuple, x: MatrixTuple) -> Result<Self> {
        let pt = EvalPoint {
            a,
            x,
            h: None,
            k: None,
        };
        pt.check_dims()?;
        Ok(pt)
    }

    pub fn with_h(mut self, h: MatrixTuple) -> Result<Self> {
        self.h = Some(h);
        self.check_dims()?;
        Ok(self)
    }

    pub fn with_k(mut self, k: MatrixTuple) -> Result<Self> {
        self.k = Some(k);
        self.check_dims()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pt: EvalPoint = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        pt.check_dims()?;
        Ok(pt)
    }

    fn tuples(&self) -> impl Iterator<Item = &MatrixTuple> {
        [Some(&self.a), Some(&self.x), self.h.as_ref(), self.k.as_ref()]
            .into_iter()
            .flatten()
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.dim();
        if self.tuples().any(|t| t.dim() != n) {
            return Err(Error::Dimension("tuples of an evaluation point differ in size".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.a.dim().max(if self.a.is_empty() { self.x.dim() } else { 0 })
    }
}

/// Which tuple stands in for the `H` letters of a polynomial.
#[derive(Clone, Copy)]
enum DirectionSlot {
    H,
    K,
}

fn letter_matrix(pt: &EvalPoint, l: Letter, slot: DirectionSlot) -> Result<&DMatrix<f64>> {
    let tuple = match l.class {
        LetterClass::A => &pt.a,
        LetterClass::X => &pt.x,
        LetterClass::H => match slot {
            DirectionSlot::H => pt.h.as_ref().ok_or(Error::MissingDirection("h"))?,
            DirectionSlot::K => pt.k.as_ref().ok_or(Error::MissingDirection("k"))?,
        },
    };
    tuple
        .mats
        .get(l.index as usize - 1)
        .ok_or(Error::LetterOutOfRange {
            class: l.class,
            index: l.index as usize,
            declared: tuple.len(),
        })
}

fn check_counts(p: &NCPolynomial, pt: &EvalPoint) -> Result<()> {
    let v = p.vars();
    if v.ga != pt.a.len() || v.gx != pt.x.len() {
        return Err(Error::Dimension(format!(
            "polynomial declares ga={}, gx={} but the point has {} and {} matrices",
            v.ga,
            v.gx,
            pt.a.len(),
            pt.x.len()
        )));
    }
    Ok(())
}

fn eval_with(p: &NCPolynomial, pt: &EvalPoint, slot: DirectionSlot) -> Result<DMatrix<f64>> {
    check_counts(p, pt)?;
    let n = pt.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut words: Vec<_> = p.terms().collect();
    words.sort_by(|(u, _), (v, _)| u.letters().cmp(v.letters()));
    // prefix[i] is the product of the first i letters of the previous word
    let mut prefix: Vec<DMatrix<f64>> = vec![DMatrix::identity(n, n)];
    let mut prev: &[Letter] = &[];
    for (w, c) in words {
        let letters = w.letters();
        let common = prev.iter().zip(letters).take_while(|(x, y)| x == y).count();
        prefix.truncate(common + 1);
        for &l in &letters[common..] {
            let next = prefix.last().expect("identity at the bottom") * letter_matrix(pt, l, slot)?;
            prefix.push(next);
        }
        prev = letters;
        let coeff = c.to_f64().unwrap_or(f64::NAN);
        out += prefix.last().expect("nonempty") * coeff;
    }
    Ok(out)
}

/// `p(A, X, H)`; `H` must be present when `p` has direction letters.
pub fn eval_poly(p: &NCPolynomial, pt: &EvalPoint) -> Result<DMatrix<f64>> {
    eval_with(p, pt, DirectionSlot::H)
}

/// Evaluates a Hessian with `H` (direction in `x`) or `K` (direction in `a`).
pub fn eval_hessian(q: &HessianPoly, pt: &EvalPoint) -> Result<DMatrix<f64>> {
    let slot = match q.direction() {
        Direction::X => DirectionSlot::H,
        Direction::A => DirectionSlot::K,
    };
    eval_with(q.poly(), pt, slot)
}

/// Blockwise evaluation into a `(rows*n) x (cols*n)` matrix.
pub fn eval_matrixpoly(m: &MatrixPoly, pt: &EvalPoint) -> Result<DMatrix<f64>> {
    let n = pt.dim();
    let mut out = DMatrix::zeros(m.rows() * n, m.cols() * n);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let p = m.get(i, j);
            if p.is_zero() {
                continue;
            }
            let block = eval_poly(p, pt)?;
            out.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }
    Ok(out)
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n1, n2) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n1 + n2, n1 + n2);
    out.view_mut((0, 0), (n1, n1)).copy_from(a);
    out.view_mut((n1, n1), (n2, n2)).copy_from(b);
    out
}

fn tuple_sum(t1: &MatrixTuple, t2: &MatrixTuple) -> Result<MatrixTuple> {
    if t1.len() != t2.len() {
        return Err(Error::Dimension("tuples have different lengths".into()));
    }
    Ok(MatrixTuple {
        n: t1.n + t2.n,
        mats: t1.mats.iter().zip(&t2.mats).map(|(a, b)| block_diag(a, b)).collect(),
    })
}

fn option_sum(o1: &Option<MatrixTuple>, o2: &Option<MatrixTuple>) -> Result<Option<MatrixTuple>> {
    match (o1, o2) {
        (Some(t1), Some(t2)) => tuple_sum(t1, t2).map(Some),
        (None, None) => Ok(None),
        _ => Err(Error::Dimension("only one summand has direction matrices".into())),
    }
}

/// Block-diagonal stacking of two points.
pub fn direct_sum(p1: &EvalPoint, p2: &EvalPoint) -> Result<EvalPoint> {
    Ok(EvalPoint {
        a: tuple_sum(&p1.a, &p2.a)?,
        x: tuple_sum(&p1.x, &p2.x)?,
        h: option_sum(&p1.h, &p2.h)?,
        k: option_sum(&p1.k, &p2.k)?,
    })
}

/// `M ⊗ I_l` for every matrix of the point.
pub fn tensor_identity(pt: &EvalPoint, l: usize) -> Result<EvalPoint> {
    if l == 0 {
        return Err(Error::InvalidArgument("tensor factor must be at least 1".into()));
    }
    let id = DMatrix::<f64>::identity(l, l);
    let n = pt.dim() * l;
    let kron = |t: &MatrixTuple| t.map(n, |m| m.kronecker(&id));
    Ok(EvalPoint {
        a: kron(&pt.a),
        x: kron(&pt.x),
        h: pt.h.as_ref().map(kron),
        k: pt.k.as_ref().map(kron),
    })
}

/// Constraint on one block of variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    All,
    /// `sum_j M_j^2 ≺ radius^2 I`.
    NormBall { radius: f64 },
    /// `sum_j M_j^2 ≺ eps I`.
    EpsilonNbhd { eps: f64 },
}

impl DomainKind {
    fn radius_squared(self) -> Option<f64> {
        match self {
            DomainKind::All => None,
            DomainKind::NormBall { radius } => Some(radius * radius),
            DomainKind::EpsilonNbhd { eps } => Some(eps),
        }
    }

    pub fn contains(self, t: &MatrixTuple) -> bool {
        match self.radius_squared() {
            None => true,
            Some(r2) => t.is_empty() || largest_eigenvalue(&t.sum_of_squares()) < r2,
        }
    }
}

/// Product domain: one constraint on the `a` block and one on the `x` block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub a: DomainKind,
    pub x: DomainKind,
}

impl DomainSpec {
    pub const ALL: DomainSpec = DomainSpec {
        a: DomainKind::All,
        x: DomainKind::All,
    };

    pub fn contains(&self, pt: &EvalPoint) -> bool {
        self.a.contains(&pt.a) && self.x.contains(&pt.x)
    }

    /// Random `(A, X)` inside the domain, deterministic in `seed`.
    pub fn sample(&self, ga: usize, gx: usize, n: usize, seed: u64) -> EvalPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample_tuple(self.a, ga, n, &mut rng);
        let x = sample_tuple(self.x, gx, n, &mut rng);
        EvalPoint {
            a,
            x,
            h: None,
            k: None,
        }
    }
}

/// Symmetric matrix with standard normal off-diagonal entries.
pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    (&g + g.transpose()) * std::f64::consts::FRAC_1_SQRT_2
}

const BALL_MARGIN: f64 = 1e-6;

/// Draws a tuple; norm-ball kinds rescale into the open ball.
pub fn sample_tuple<R: Rng>(kind: DomainKind, g: usize, n: usize, rng: &mut R) -> MatrixTuple {
    let mats: Vec<DMatrix<f64>> = (0..g).map(|_| random_symmetric(n, rng)).collect();
    let mut t = MatrixTuple { n, mats };
    if let Some(r2) = kind.radius_squared() {
        let top = largest_eigenvalue(&t.sum_of_squares());
        if top > 0.0 {
            let rho: f64 = rng.random_range(0.05..1.0 - BALL_MARGIN);
            let s = r2.sqrt() * rho / top.sqrt();
            t = t.map(n, |m| m * s);
        }
    }
    t
}

/// Standard normal vector, deterministic in `seed`.
pub fn random_vector(n: usize, seed: u64) -> nalgebra::DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nalgebra::DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Independent per-trial seed derived from a campaign seed.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Eigenvalues of the symmetric part, ascending.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// `N(g, d) = sum_{j=0}^{d} g^j`.
pub fn ngd(g: u64, d: u32) -> u64 {
    (0..=d).map(|j| g.pow(j)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaithfulnessReport {
    pub dimension: usize,
    pub samples: usize,
    pub nonzero_hits: usize,
    /// Set when every sample evaluated to zero.
    pub flagged: bool,
}

/// Evaluates a nonzero polynomial at `samples` random points of dimension
/// `N(g, d)`, where `g` counts the letters of `a`, `x` and `h`.
pub fn faithfulness_probe(p: &NCPolynomial, samples: usize, seed: u64) -> Result<FaithfulnessReport> {
    if p.is_zero() {
        return Err(Error::ZeroInput);
    }
    let v = p.vars();
    let g = (v.ga + v.gx + if p.has_class(LetterClass::H) { v.gh } else { 0 }) as u64;
    let n = ngd(g.max(1), p.total_degree() as u32) as usize;
    let mut hits = 0;
    for s in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, s as u64));
        let mut pt = EvalPoint {
            a: sample_tuple(DomainKind::All, v.ga, n, &mut rng),
            x: sample_tuple(DomainKind::All, v.gx, n, &mut rng),
            h: None,
            k: None,
        };
        if p.has_class(LetterClass::H) {
            pt.h = Some(sample_tuple(DomainKind::All, v.gh, n, &mut rng));
        }
        let val = eval_poly(p, &pt)?;
        if val.amax() > 1e-9 {
            hits += 1;
        }
    }
    Ok(FaithfulnessReport {
        dimension: n,
        samples,
        nonzero_hits: hits,
        flagged: hits == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::VarCounts;
    use crate::text::parse;

    fn tuple(n: usize, mats: &[&[f64]]) -> MatrixTuple {
        MatrixTuple::new(n, mats.iter().map(|m| DMatrix::from_row_slice(n, n, m)).collect()).unwrap()
    }

    #[test]
    fn square_of_swap_is_identity() {
        let p = parse("x1^2", VarCounts::new(0, 1)).unwrap();
        let pt = EvalPoint::new(MatrixTuple::zeros(0, 2), tuple(2, &[&[0.0, 1.0, 1.0, 0.0]])).unwrap();
        assert_eq!(eval_poly(&p, &pt).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn commutator_of_equal_matrices_vanishes() {
        let p = parse("a1*x1 - x1*a1", VarCounts::new(1, 1)).unwrap();
        let m: &[f64] = &[1.0, 2.0, 2.0, -3.0];
        let pt = EvalPoint::new(tuple(2, &[m]), tuple(2, &[m])).unwrap();
        assert!(eval_poly(&p, &pt).unwrap().amax() < 1e-14);
    }

    #[test]
    fn shared_prefixes_give_the_same_value() {
        let v = VarCounts::new(1, 2);
        let p = parse("x1*x2*a1 + x1*x2 + 3*x1*a1*x1 - x2", v).unwrap();
        let pt = DomainSpec::ALL.sample(1, 2, 3, 5);
        let a = pt.a.get(0);
        let (x1, x2) = (pt.x.get(0), pt.x.get(1));
        let oracle = x1 * x2 * a + x1 * x2 + x1 * a * x1 * 3.0 - x2;
        assert!((eval_poly(&p, &pt).unwrap() - oracle).amax() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            MatrixTuple::new(2, vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])]),
            Err(Error::AsymmetricMatrix(_))
        ));
        assert!(MatrixTuple::from_json(r#"{"n": 2, "mats": [[1, 0, 0]]}"#).is_err());
        let t = MatrixTuple::from_json(r#"{"n": 2, "mats": [[1, 2, 2, 1]]}"#).unwrap();
        assert_eq!(t.get(0)[(0, 1)], 2.0);
        let p = parse("h1*x1", VarCounts::new(0, 1)).unwrap();
        let pt = EvalPoint::new(MatrixTuple::zeros(0, 1), MatrixTuple::zeros(1, 1)).unwrap();
        assert_eq!(eval_poly(&p, &pt), Err(Error::MissingDirection("h")));
        let wrong = EvalPoint::new(MatrixTuple::zeros(1, 1), MatrixTuple::zeros(1, 1)).unwrap();
        assert!(matches!(eval_poly(&p, &wrong), Err(Error::Dimension(_))));
    }

    #[test]
    fn tuple_json_round_trip() {
        let pt = DomainSpec::ALL.sample(1, 1, 3, 9);
        let text = serde_json::to_string(&pt).unwrap();
        assert_eq!(EvalPoint::from_json(&text).unwrap(), pt);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let dom = DomainSpec {
            a: DomainKind::NormBall { radius: 1.0 },
            x: DomainKind::All,
        };
        for s in 0..200 {
            let pt = dom.sample(2, 1, 3, s);
            assert!(largest_eigenvalue(&pt.a.sum_of_squares()) < 1.0 - 1e-6);
            assert!(dom.contains(&pt));
        }
        assert_eq!(dom.sample(2, 1, 3, 4), dom.sample(2, 1, 3, 4));
    }

    #[test]
    fn ngd_values() {
        assert_eq!(ngd(1, 2), 3);
        assert_eq!(ngd(2, 2), 7);
        assert_eq!(ngd(2, 3), 15);
    }

    #[test]
    fn tensor_with_one_is_identity() {
        let pt = DomainSpec::ALL.sample(1, 1, 2, 1);
        assert_eq!(tensor_identity(&pt, 1).unwrap(), pt);
        assert!(tensor_identity(&pt, 0).is_err());
    }
}
