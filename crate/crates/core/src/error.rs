use thiserror::Error;

/// Errors raised by the spectral, memory and renormalization machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("fields belong to different truncations")]
    TruncationMismatch,
    #[error("expected a {expected}-component field, got {actual}")]
    ComponentMismatch { expected: usize, actual: usize },
    #[error("memory term order {order} outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("expected {expected} coefficients, got {actual}")]
    CoefficientCount { expected: usize, actual: usize },
    #[error("matching system entirely singular (largest singular value {largest:e})")]
    EntirelySingular { largest: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid integration problem: {0}")]
    InvalidProblem(String),
    #[error("characteristic solve failed at x = {x}, t = {t}")]
    CharacteristicSolve { x: f64, t: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
