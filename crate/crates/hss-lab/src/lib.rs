//! Shamir-style homomorphic secret sharing over prime fields, plus a
//! laboratory for measuring whether the output shares hide the input.
//!
//! The pipeline: [`hss::share`] splits a vector `x` into `m` server shares,
//! each server evaluates a polynomial on its share ([`hss::eval`]), and
//! [`hss::decode`] recombines the output shares into `f(x)`. The [`ctxhide`]
//! module runs the indistinguishability experiment behind "context hiding":
//! exact distinguisher advantage by full enumeration of the sharing
//! randomness, Monte-Carlo estimates with Hoeffding error bars, output-share
//! distributions, and a concrete attack on multilinear monomials. The
//! [`equiv`] module carries distinguishers across affine equivalences of
//! polynomials, preserving their advantage exactly.

pub mod cli;
pub mod ctxhide;
pub mod equiv;
pub mod error;
pub mod field;
pub mod hss;
pub mod linalg;
pub mod poly;

pub use error::{Error, Result};
pub use field::{Field, FieldElement};
