use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("coordinate out of representable range: {0}")]
    OutOfRange(String),

    #[error("value {what} is not a dyadic multiple of 2^-{wbits}")]
    NotDyadic { what: String, wbits: u32 },

    #[error("radius law is not normalized on [0, r_max]: total mass {0}")]
    UnnormalizedLaw(f64),

    #[error("moment integral diverges: {0}")]
    DivergentMoment(String),

    #[error("domination bound violated: {0}")]
    DomViolation(String),

    #[error("partition-function estimate unreliable: {0}")]
    UnreliableEstimate(String),

    #[error("probability {value} outside [0,1] beyond tolerance {tol}")]
    ClampViolation { value: f64, tol: f64 },

    #[error("insufficient order-interval mass: requested {requested}, available {available}")]
    InsufficientMass { requested: f64, available: f64 },

    #[error("recursion depth cap {cap} exceeded after {layers} layers")]
    DepthCapExceeded { cap: usize, layers: usize },

    #[error("estimator bias budget exceeded: used {used}, budget {budget}")]
    BudgetExceeded { used: f64, budget: f64 },

    #[error("search failed: {0}")]
    SearchFailed(String),
}
