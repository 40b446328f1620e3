//! Classical and generalized Bernstein operators.
//!
//! The crate covers three operator families sharing the fixed-basis form
//! `B f = sum_k f(t_k) p_k`:
//!
//! * the classical operator on `[0, 1]` (fixes `1` and `x`),
//! * the power-fixing operator with nodes `[k^(j) / n^(j)]^(1/j)` (fixes `1` and `x^j`),
//! * the exponential operator of Morigi and Neamtu (fixes `e^{mu0 x}` and `e^{mu1 x}`).
//!
//! On top of these it decides `(f0, f1)`-convexity, builds competitor
//! operators from discrete measures and certifies that the generalized
//! Bernstein operator dominates none of them from above on convex data:
//! `phi <= B phi <= L phi`, with equality at an interior point only when
//! every measure is a point mass at its node.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod convexity;
mod error;
pub mod exponential;
pub mod function;
pub mod operator;
pub mod optimality;

pub use error::{Error, Result};
pub use function::{DiscreteMeasure, Expr, Interval, RealFn, SampledGrid};
pub use operator::{OperatorKind, OperatorSpec};
