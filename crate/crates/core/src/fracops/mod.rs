//! Fractional-calculus primitives on nonuniform grids.

mod gamma;
mod grid;
mod operators;
mod weights;

pub use gamma::{gamma_fn, GAMMA_MAX_ARG};
pub use grid::{SampledFn, TimeGrid};
pub use operators::{caputo_derivative, rl_derivative, rl_integral, FracOrder};
pub use weights::{singular_weights, ProductIntegrator, QuadWeights};

pub(crate) use grid::sup_abs_diff;
pub(crate) use operators::caputo_rows;
pub(crate) use weights::{row_into, CumulativeTrapezoid};
