//! Mean density of complex eigenvalues for random matrices `A = U·√G`, where
//! `U` is Haar-distributed on `U(N)` and `G = diag(g_1, …, g_N) ≥ 0` fixes the
//! squared singular values of `A`.
//!
//! The crate has two halves that check each other:
//!
//! * an analytic evaluator ([`density`]) built on stable elementary symmetric
//!   polynomials ([`symfuncs`]) and truncated Taylor arithmetic ([`jets`]) for
//!   degenerate spectra;
//! * a Monte Carlo pipeline ([`sampling`] → [`eigen`] → [`experiment`]) that
//!   samples `A`, measures its eigenvalues and compares the radial histogram
//!   against the analytic curve.
//!
//! The [`cli`] module wires both into a CSV-emitting command-line tool.

pub mod cli;
pub mod density;
pub mod eigen;
mod error;
pub mod experiment;
pub mod jets;
pub mod matrix;
pub mod quad;
pub mod sampling;
pub mod sum;
pub mod symfuncs;

pub use error::{Error, Result};
