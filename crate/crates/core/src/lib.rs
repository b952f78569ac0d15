//! Numerical toolkit for a fractional thermistor problem with a nonlocal
//! source: fractional operators on nonuniform grids, the model and its
//! hypotheses, a local Picard solver, and global continuation with
//! Gronwall certificates.
//!
//! Everything is generic over the scalar ([`Real`], implemented for `f32` and
//! `f64`); the aliases below fix `f64`, and the `*32` ones `f32`.

// `!(x >= 0)` style comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuation;
pub mod error;
pub mod fracops;
pub mod model;
pub mod picard;
mod real;

pub use error::{Error, Result};
pub use real::Real;

pub type Grid = fracops::TimeGrid<f64>;
pub type Series = fracops::SampledFn<f64>;
pub type Problem = model::ProblemSpec<f64>;
/// ```
/// # fn main() -> Result<(), Box<dyn std::error::Error>> {
/// use fracthermistor::continuation::{global_solve, ContinuationConfig};
/// use fracthermistor::fracops::FracOrder;
/// use fracthermistor::model::{Conductivity, DenominatorPlacement, HypothesisConstants, ProblemSpec};
/// use fracthermistor::picard::PicardOptions;
///
/// let spec = ProblemSpec {
///     alpha: FracOrder::new(0.25)?,
///     lambda: 1.0,
///     u0: 1.0,
///     conductivity: Conductivity::BoundedOscillatory { base: 2.0, amplitude: 1.0 },
///     constants: HypothesisConstants {
///         c1: 2.0,
///         c2: 3.0,
///         lipschitz: 1.0,
///         growth_m: 12.0,
///         omega: 2.0,
///         growth: None,
///     },
///     delta: 1.0,
///     horizon: 5.0,
///     placement: DenominatorPlacement::Inner,
/// };
/// let config = ContinuationConfig::for_problem(&spec);
/// let sol = global_solve(&spec, &config, PicardOptions::default())?;
/// println!("{} at t = {}", sol.termination().label(), sol.beta());
/// # Ok(())
/// # }
/// ```
pub type Solution = continuation::GlobalSolution<f64>;

pub type Grid32 = fracops::TimeGrid<f32>;
pub type Series32 = fracops::SampledFn<f32>;
pub type Problem32 = model::ProblemSpec<f32>;
pub type Solution32 = continuation::GlobalSolution<f32>;
