use thiserror::Error;

/// Errors raised by synthesis, simulation, estimation and the experiment
/// pipeline. Numeric payloads are reported as `f64` whatever the scalar type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid direction: norm {norm} is not 1 within tolerance")]
    InvalidDirection { norm: f64 },

    #[error("invalid state: {reason} (norm {norm})")]
    InvalidState { norm: f64, reason: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: theta = {theta_deg} deg exceeds theta_max = {theta_max_deg} deg for p = {p}")]
    Infeasible { p: f64, theta_deg: f64, theta_max_deg: f64 },

    #[error("optimal design for p = {p}, theta = {theta_deg} deg has zero sharpness on the first observable")]
    ZeroSharpness { p: f64, theta_deg: f64 },

    #[error("synthesis error: sharpnesses do not saturate the tradeoff relation (|aA+bB|+|aA-bB| - 2 = {defect})")]
    NotSaturating { defect: f64 },

    #[error("degenerate design: alpha*a equals beta*b, so the d direction is undefined")]
    DegenerateDirection,

    #[error("infinite unsharpness: a sharpness of zero has no finite unsharpness")]
    InfiniteUnsharpness,

    #[error("undefined estimate: total count is zero")]
    UndefinedEstimate,

    #[error("ill-conditioned ratio: sharp expectation {value} is below the guard threshold {threshold}")]
    IllConditionedRatio { value: f64, threshold: f64 },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("numeric solver failed: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("nothing to emit: result set is empty")]
    EmptyResults,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
