use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Non-convergence of an iterative solve is not an error: it is reported as
/// a verdict carrying the diagnostics of the failed run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function} is undefined at {value}: {reason}")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("gamma({0}) overflows the supported range (x <= 170)")]
    Overflow(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: grid has {grid} points but {values} values were supplied")]
    LengthMismatch { grid: usize, values: usize },

    #[error("index {index} out of range for a grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("kernel exponent {0} outside (-1, 0)")]
    ExponentOutOfRange(f64),

    #[error("fractional order {0} outside (0, 1)")]
    OrderOutOfRange(f64),

    #[error("singular source at t = {t}: delta + I(t) vanishes")]
    SingularSource { t: f64 },

    #[error("conductivity table queried at (s = {s}, u = {u}) outside its rectangle")]
    TableOutOfRange { s: f64, u: f64 },

    #[error("conductivity table, line {line}: {message}")]
    Table { line: u64, message: String },

    #[error("invalid {field}: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("grid misaligned with the continuation point beta = {beta}: first point is {first}")]
    Misaligned { beta: f64, first: f64 },

    #[error("trial function starts at {found}, but the solution has u(beta) = {expected}")]
    GlueMismatch { expected: f64, found: f64 },

    #[error("Gronwall majorant iteration did not settle after {iterations} sweeps (last increment {increment})")]
    GronwallDivergent { iterations: usize, increment: f64 },

    #[error("t = {t} precedes the end of the stored history beta = {beta}")]
    BeforeHistory { t: f64, beta: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        message: message.into(),
    }
}
