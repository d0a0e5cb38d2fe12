//! Nested pool-testing strategies: exact costs, variances, optimal design.
//!
//! A population with i.i.d. infection probability `p` is screened in stages:
//! pools of `m_1` samples are tested together, positive pools are split into
//! pools of `m_2`, and so on down to `m_k`; individuals of positive stage-`k`
//! pools are tested one by one. This crate computes the exact expected number
//! of tests per individual and its variance for any such chain, selects the
//! cost-optimal chain for a given prevalence, and cross-checks every closed
//! form against enumeration and Monte Carlo oracles.
//!
//! Highlights:
//!
//! - [`cost::cost`] / [`cost::dorfman_cost`]: exact expected tests per
//!   individual (pooling pays only for `p` below `1 - 3^{-1/3} ~= 0.3066`).
//! - [`optimizer::conjectured_optimal`]: the optimal chain, a power-of-3
//!   ladder `(3^k, ..., 3)` or its `4 * 3^{k-1}` variant, switched at
//!   closed-form transition points.
//! - [`optimizer::four_candidate_optimal`] / [`optimizer::conjecture_sweep`]:
//!   the four-family comparison with compensated-arithmetic sign
//!   certification of the cost gap.
//! - [`optimizer::exhaustive_optimal`]: brute-force oracle over all divisor
//!   chains.
//! - [`linearized`]: first-order cost model, its real-valued optimizers and
//!   error bounds.
//! - [`simulate`]: reproducible Monte Carlo and exact enumeration of the
//!   testing procedure.

pub mod cost;
pub mod dd;
mod error;
pub mod linearized;
pub mod optimizer;
pub mod simulate;
pub mod strategies;

pub use error::{Error, Result};
pub use strategies::{Family, Multipliers, NestedStrategy, Prevalence};
