use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("element orders must satisfy low < high, got low={low}, high={high}")]
    OrderMismatch { low: u32, high: u32 },

    #[error("order {order} outside the supported range [{min}, {max}]")]
    OrderOutOfRange { order: u32, min: u32, max: u32 },

    #[error("h = {h} lies above the crossover h* = {h_star}; swap the roles of the two orders")]
    AboveCrossover { h: f64, h_star: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("exact solution violates the boundary condition: u({x}) = {value:e}")]
    BoundaryCondition { x: f64, value: f64 },

    #[error("seminorm of order {order} is not available for problem `{problem}`")]
    UnsupportedSeminorm { problem: String, order: u32 },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
