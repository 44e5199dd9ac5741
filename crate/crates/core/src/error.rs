use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time {t} lies outside [0, {final_time}]")]
    TimeOutOfRange { t: f64, final_time: f64 },

    #[error("signal is nonzero ({value:e}) at t = {t} where the weight vanishes")]
    NotInWeightedSpace { t: f64, value: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("grids disagree: {0}")]
    GridMismatch(String),

    #[error("Courant number must be one: dt = {dt}, h = {h}")]
    Courant { dt: f64, h: f64 },

    #[error("final time {0} does not exceed the controllability threshold 2")]
    ShortHorizon(f64),

    #[error("mesh h = {h:e} does not resolve the layer: need h <= sqrt(eps)/4 = {limit:e}")]
    Unresolved { h: f64, limit: f64 },

    #[error("rate fit needs at least 3 positive points: {0}")]
    RateFit(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),

    #[error("final state {residual:e} did not vanish after {what} (tolerance {tol:e})")]
    Certificate { what: String, residual: f64, tol: f64 },
}
