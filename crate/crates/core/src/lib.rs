//! Verification toolkit for Girsanov identities of Poisson random measures
//! under quasi-nilpotent (possibly anticipating) random transformations.
//!
//! The crate is organised bottom-up:
//!
//! * [`combinatorics`]: Stirling numbers of both kinds, associated Stirling
//!   numbers, partition counts and the exact identities relating them.
//! * [`polynomials`]: exact bivariate Charlier, generalized Bell and Touchard
//!   polynomials together with the Stirling-transform duality between them.
//! * [`moments`]: moments of compensated Poisson integrals of step functions,
//!   computed by three independent routes, plus Poisson central moments.
//! * [`finite_oracle`]: an exact (truncated) expectation engine on a finite
//!   cell discretization of the Poisson space, used to brute-force the
//!   Skorohod/finite-difference operator identities.
//! * [`geometry`]: planar Poisson sampling and the convex-hull transformation
//!   which moves interior points while fixing the extremal vertices.
//! * [`mc`]: Monte Carlo estimation of the Girsanov expectations.
//! * [`report`]: machine readable check reports shared by the CLI.

pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod finite_oracle;
pub mod geometry;
pub mod mc;
pub mod moments;
pub mod numeric;
pub mod polynomials;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use exact::ExactRational;
