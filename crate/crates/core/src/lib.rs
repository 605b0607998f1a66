//! Exact and p-adic computation of Changhee q-Bernoulli polynomials
//! `B_{n,q}^(k)(w | a; b)`, verification of their identities over the
//! rationals, and brute-force level sums of the p-adic invariant integral.
//!
//! - [`exactq`]: rationals and q-analogs (`[m]_q`, Gaussian binomials, `(a;q)_n`).
//! - [`padic`]: finite-precision `Q_p` with `log`/`exp`.
//! - [`series`]: truncated power and Laurent series.
//! - [`changhee`]: closed forms, the `q -> 1` limit and the identity catalog.
//! - [`oracle`]: level sums `(1/p^N) sum_{x < p^N} f(x)` and convergence studies.

pub mod changhee;
pub mod error;
pub mod exactq;
pub mod oracle;
pub mod padic;
pub mod series;

pub use error::{Error, Result};
pub use exactq::{QPoint, Rational};
pub use padic::{PadicContext, PadicNumber};
