//! Numeric substrate: expressions, grids, monotone inversion and discrete measures.

mod expr;
mod grid;
mod inverse;
mod measure;
mod parse;
mod sum;

pub use expr::{Expr, FnRef, Interval, RealFn};
pub use grid::{second_differences, sweep, uniform_grid, SampledGrid, DEFAULT_CERT_GRID};
pub use inverse::{monotone_inverse, validate_pair, PairReport, Ratio};
pub use measure::{integrate, Atom, DiscreteMeasure};
pub use parse::parse_expression;
pub use sum::CompensatedSum;
