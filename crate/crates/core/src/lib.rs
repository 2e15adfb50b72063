//! Symbolic and numerical tools for convexity of noncommutative polynomials.

#![allow(clippy::needless_range_loop)]

pub mod calculus;
pub mod convexity;
pub mod error;
pub mod freealg;
pub mod middlematrix;
pub mod numeval;
pub mod text;

pub use error::{Error, Result};
pub use freealg::{Letter, LetterClass, MatrixPoly, NCPolynomial, Rational, VarCounts, Word};

pub use nalgebra;
