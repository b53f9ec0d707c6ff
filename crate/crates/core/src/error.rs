use thiserror::Error;

/// Errors produced by the `zdlab` library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid game shape: {0}")]
    InvalidShape(String),

    /// A strategy table is missing, duplicated or out of range.
    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("stationary solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate chain: reference determinant {0:.3e} is numerically zero")]
    Degenerate(f64),

    /// Theorem-style bounds on the enforceable baseline collapse.
    #[error("empty baseline range: l_min = {l_min} exceeds l_max = {l_max}")]
    EmptyRange { l_min: f64, l_max: f64 },

    /// The alliance is too small (or `r` too low) to exert control.
    #[error("alliance not admissible: {0}")]
    Inadmissible(String),

    /// No nonzero scaling keeps every strategy entry inside [0, 1].
    #[error("infeasible ZD parameters: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty graph: no nodes were read")]
    EmptyGraph,

    #[error("enumeration refused: {count} combinations exceed the cap of {cap}")]
    TooManyCombinations { count: u128, cap: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that mean "this game cannot be controlled", as opposed
    /// to malformed input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::EmptyRange { .. } | Error::Inadmissible(_) | Error::Infeasible(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
