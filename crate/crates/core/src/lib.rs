//! Variational iteration for the time-fractional generalized Burgers'
//! equation
//!
//! ```text
//! cD_t^α u = u_xx + A u^p u_x,   0 < α ≤ 2
//! ```
//!
//! with exact symbolic iterates, plus an independent finite-difference
//! reference solver.

pub mod expr;
pub mod fracops;
pub mod oracle;
pub mod vimcore;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
