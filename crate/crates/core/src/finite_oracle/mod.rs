//! Brute-force expectation engine on a truncated cell discretization of the
//! Poisson space.
//!
//! A configuration is reduced to its count vector `k ∈ {0..K}^m` over `m`
//! cells with intensities `σ_i`. Functionals are tables over the lattice,
//! `D_i` adds one point to cell `i`, and every expectation comes with a
//! rigorous bound on the mass lost by truncation.

pub mod catalog;
pub mod checks;
pub mod envelope;
pub mod expr;
pub mod space;
pub mod table;

pub use catalog::{run_check, OracleCheck};
pub use checks::{
    check_commutation, check_duality, check_isometry, check_lemma_l12_and_t11, check_product_rule,
    check_prop_l221, check_prop_p12, check_zero_mean, expectation, finite_difference,
    skorohod_delta, ExactComparison, OracleOptions, OracleRow, TauRule, MAX_EXACT_TRUNC,
};
pub use envelope::Envelope;
pub use expr::{CellProcess, Cond, Expr};
pub use space::{CellSpace, Estimate};
pub use table::{Scalar, Table};
