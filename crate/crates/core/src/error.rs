use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A caller violated a documented precondition (shapes, symmetry, feasibility).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Cholesky factorisation failed; `pivot` is the zero-based failing column.
    #[error("matrix is not positive definite (pivot {pivot})")]
    Singular { pivot: usize },

    /// A linear predictor left the representable range of `exp`.
    #[error("linear predictor out of range at row {row} (eta = {eta})")]
    NumericRange { row: usize, eta: f64 },

    #[error("degenerate ridge penalty: {0}")]
    DegeneratePenalty(String),

    /// A coordinate interval came out empty on a chain state that should be feasible.
    #[error("infeasible state: coordinate {coord} has interval [{lo}, {hi}]")]
    InfeasibleState { coord: usize, lo: f64, hi: f64 },

    #[error("{}", feasibility_message(*.passes, *.proved_empty))]
    FeasibilityUnresolved { passes: usize, proved_empty: bool },

    /// The truncation interval carries (numerically) no normal mass.
    #[error("degenerate truncation: interval [{lo}, {hi}] has normal mass below 1e-300")]
    DegenerateTruncation { lo: f64, hi: f64 },

    /// Sample or column without variation.
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

fn feasibility_message(passes: usize, proved_empty: bool) -> String {
    if proved_empty {
        "restriction system proved empty: single-coordinate bounds contradict each other".into()
    } else {
        format!(
            "no feasible point found after {passes} projection passes; supply an interior starting point"
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
