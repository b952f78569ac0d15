//! The thermistor problem: conductivity, nonlocal accumulator, source term
//! and the hypothesis auditor.

mod conductivity;
mod hypotheses;
mod nonlocal;
mod problem;
mod table;

pub use conductivity::Conductivity;
pub use hypotheses::{validate_hypotheses, HypothesisReport, HypothesisSet, InconsistencyWindow, Verdict, Witness};
pub use nonlocal::{accumulate, NonlocalState};
pub use problem::{source_term, DenominatorPlacement, GrowthConstants, HypothesisConstants, ProblemSpec};
pub use table::ConductivityTable;
