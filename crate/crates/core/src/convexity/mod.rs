//! Convexity testing by matrix evaluation, structure decompositions, and
//! signature / codimension estimators.
//!
//! Randomized tests only falsify: `PositivitySampled` is evidence, never proof.
//! Certified answers come from exact identities (zero Hessian, exact PSD
//! Gram matrices) or from the degree bound for convexity in `x`.

mod decompose;
pub mod exact;
pub mod gram;
mod signature;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

pub use decompose::{
    decompose_convex_concave, decompose_convex_in_x, decompose_separately_convex, local_rq_form,
    sos_factor_constant, Decomposition, DecompositionForm, Factors, NumericCertificate, Square,
};
pub use signature::{
    chsy_codimension, generic_rank_probe, signature_at, signature_estimate, ChsyReport, EigenCounts,
    RankProbeRow, SignatureEstimate, SignatureWitness,
};

pub use crate::numeval::ngd;

use crate::calculus::partial_hessian_x;
use crate::error::{Error, Result};
use crate::freealg::{LetterClass, NCPolynomial, Rational};
use crate::numeval::{
    eval_hessian, eval_poly, sample_tuple, smallest_eigenvalue, trial_seed, DomainKind, DomainSpec,
    EvalPoint, MatrixTuple,
};

/// Eigenvalue below which a defect matrix counts as a violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-7;

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    ConvexCertified,
    NotConvex,
    DegreeObstruction,
    PositivitySampled,
    Inconclusive,
}

/// A reproducible counterexample; `seed` regenerates every random draw.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub seed: u64,
    pub n: usize,
    /// `(A, X)`, plus `H` for Hessian witnesses.
    pub point: EvalPoint,
    /// Second point of a midpoint witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<MatrixTuple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub min_eig: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityVerdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_x: Option<usize>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
}

impl ConvexityVerdict {
    fn new(status: Status) -> Self {
        ConvexityVerdict {
            status,
            witness: None,
            min_eig: None,
            samples: 0,
            degree_x: None,
            notes: Vec::new(),
            decomposition: None,
        }
    }
}

/// Sampling parameters shared by the randomized tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingConfig {
    pub domain: DomainSpec,
    pub trials: usize,
    /// Dimensions cycle through `1..=nmax`.
    pub nmax: usize,
    pub seed: u64,
}

impl SamplingConfig {
    /// `nmax = min(N(g, d), 16)` and 200 trials.
    pub fn for_poly(p: &NCPolynomial) -> Self {
        let v = p.vars();
        let g = (v.ga + v.gx).max(1) as u64;
        let cap = ngd(g, p.total_degree().min(8) as u32).min(16) as usize;
        SamplingConfig {
            domain: DomainSpec::ALL,
            trials: 200,
            nmax: cap.max(2),
            seed: 0,
        }
    }

    fn dimension(&self, trial: usize) -> usize {
        1 + trial % self.nmax.max(1)
    }
}

fn check_input(p: &NCPolynomial) -> Result<()> {
    if p.has_class(LetterClass::H) {
        return Err(Error::HasDirectionLetters);
    }
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

/// Shared prelude: certified answers that need no sampling.
fn degree_shortcut(p: &NCPolynomial) -> Option<ConvexityVerdict> {
    let dx = p.degree(LetterClass::X);
    if dx <= 1 {
        let mut v = ConvexityVerdict::new(Status::ConvexCertified);
        v.degree_x = Some(dx);
        v.notes.push("Hessian in x vanishes identically".into());
        return Some(v);
    }
    if dx >= 3 && p.vars().ga > 0 {
        let mut v = ConvexityVerdict::new(Status::DegreeObstruction);
        v.degree_x = Some(dx);
        v.notes
            .push("a polynomial convex in x on an open set has degree at most two in x".into());
        return Some(v);
    }
    None
}

fn finish_sampled(p: &NCPolynomial, min_eig: f64, samples: usize) -> ConvexityVerdict {
    let dx = p.degree(LetterClass::X);
    let mut v = if dx >= 3 {
        let mut v = ConvexityVerdict::new(Status::DegreeObstruction);
        v.notes.push("no explicit witness found; degree in x exceeds two".into());
        v
    } else {
        let mut v = ConvexityVerdict::new(Status::PositivitySampled);
        v.notes.push("sampled evidence only, not a proof".into());
        v
    };
    v.min_eig = Some(min_eig);
    v.samples = samples;
    v.degree_x = Some(dx);
    v
}

struct MidpointDraw {
    point: EvalPoint,
    y: MatrixTuple,
    t: f64,
}

fn midpoint_draw(p: &NCPolynomial, domain: &DomainSpec, n: usize, seed: u64, trial: usize) -> MidpointDraw {
    let v = p.vars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = sample_tuple(domain.a, v.ga, n, &mut rng);
    let x = sample_tuple(domain.x, v.gx, n, &mut rng);
    let y = sample_tuple(domain.x, v.gx, n, &mut rng);
    let t = if trial.is_multiple_of(2) {
        0.5
    } else {
        rng.random_range(0.05..0.95)
    };
    MidpointDraw {
        point: EvalPoint {
            a,
            x,
            h: None,
            k: None,
        },
        y,
        t,
    }
}

/// `t p(A,X) + (1-t) p(A,Y) - p(A, tX + (1-t)Y)`.
pub fn midpoint_defect(p: &NCPolynomial, point: &EvalPoint, y: &MatrixTuple, t: f64) -> Result<DMatrix<f64>> {
    let at_y = EvalPoint::new(point.a.clone(), y.clone())?;
    let mid = EvalPoint::new(point.a.clone(), point.x.lerp(y, t)?)?;
    Ok(eval_poly(p, point)? * t + eval_poly(p, &at_y)? * (1.0 - t) - eval_poly(p, &mid)?)
}

/// Randomized test of the midpoint inequality.
pub fn midpoint_convexity_test(p: &NCPolynomial, cfg: &SamplingConfig) -> Result<ConvexityVerdict> {
    check_input(p)?;
    if let Some(v) = degree_shortcut(p) {
        return Ok(v);
    }
    let mut worst = f64::INFINITY;
    for trial in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, trial as u64);
        let n = cfg.dimension(trial);
        let draw = midpoint_draw(p, &cfg.domain, n, seed, trial);
        let defect = midpoint_defect(p, &draw.point, &draw.y, draw.t)?;
        let min_eig = smallest_eigenvalue(&defect);
        worst = worst.min(min_eig);
        if min_eig < -VIOLATION_THRESHOLD {
            let mut v = ConvexityVerdict::new(Status::NotConvex);
            v.witness = Some(Witness {
                seed,
                n,
                point: draw.point,
                y: Some(draw.y),
                t: Some(draw.t),
                min_eig,
            });
            v.min_eig = Some(min_eig);
            v.samples = trial + 1;
            v.degree_x = Some(p.degree(LetterClass::X));
            return Ok(v);
        }
    }
    Ok(finish_sampled(p, worst, cfg.trials))
}

/// Recomputes the smallest eigenvalue of a stored midpoint witness.
pub fn replay_midpoint(p: &NCPolynomial, w: &Witness) -> Result<f64> {
    let (y, t) = match (&w.y, w.t) {
        (Some(y), Some(t)) => (y, t),
        _ => return Err(Error::InvalidArgument("not a midpoint witness".into())),
    };
    Ok(smallest_eigenvalue(&midpoint_defect(p, &w.point, y, t)?))
}

/// Redraws a midpoint witness from its seed alone and recomputes the
/// smallest eigenvalue of the defect.
pub fn regenerate_midpoint(p: &NCPolynomial, domain: &DomainSpec, w: &Witness) -> Result<f64> {
    let parity = usize::from(w.t != Some(0.5));
    let draw = midpoint_draw(p, domain, w.n, w.seed, parity);
    Ok(smallest_eigenvalue(&midpoint_defect(p, &draw.point, &draw.y, draw.t)?))
}

/// Randomized test of positivity of the Hessian in `x`.
pub fn hessian_positivity_test(p: &NCPolynomial, cfg: &SamplingConfig) -> Result<ConvexityVerdict> {
    check_input(p)?;
    if let Some(v) = degree_shortcut(p) {
        return Ok(v);
    }
    let q = partial_hessian_x(p)?;
    let v = p.vars();
    let mut worst = f64::INFINITY;
    for trial in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, trial as u64);
        let n = cfg.dimension(trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = EvalPoint {
            a: sample_tuple(cfg.domain.a, v.ga, n, &mut rng),
            x: sample_tuple(cfg.domain.x, v.gx, n, &mut rng),
            h: Some(sample_tuple(DomainKind::All, v.gx, n, &mut rng)),
            k: None,
        };
        let min_eig = smallest_eigenvalue(&eval_hessian(&q, &point)?);
        worst = worst.min(min_eig);
        if min_eig < -VIOLATION_THRESHOLD {
            let mut verdict = ConvexityVerdict::new(Status::NotConvex);
            verdict.witness = Some(Witness {
                seed,
                n,
                point,
                y: None,
                t: None,
                min_eig,
            });
            verdict.min_eig = Some(min_eig);
            verdict.samples = trial + 1;
            verdict.degree_x = Some(p.degree(LetterClass::X));
            return Ok(verdict);
        }
    }
    Ok(finish_sampled(p, worst, cfg.trials))
}

/// Exact certificate of convexity in `x` for polynomials whose middle matrix
/// is constant and exactly PSD; `Inconclusive` otherwise.
pub fn certify_convex_in_x(p: &NCPolynomial) -> Result<ConvexityVerdict> {
    check_input(p)?;
    if let Some(v) = degree_shortcut(p) {
        return Ok(v);
    }
    let d = decompose_convex_in_x(p, &DomainSpec::ALL, 0, 0)?;
    let certified = d
        .certificate
        .as_ref()
        .and_then(|c| c.exact_psd)
        .unwrap_or(false);
    let mut v = ConvexityVerdict::new(if certified {
        Status::ConvexCertified
    } else {
        Status::Inconclusive
    });
    v.degree_x = Some(p.degree(LetterClass::X));
    if !certified {
        v.notes
            .push("middle matrix depends on a or is not exactly PSD; use sampling".into());
    }
    v.decomposition = Some(d);
    Ok(v)
}
