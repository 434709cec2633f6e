use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShadowError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("singular kinetics at u={u}, xi={xi}: {reason}")]
    SingularKinetics {
        u: f64,
        xi: f64,
        reason: &'static str,
    },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("invalid eigenvector: {0}")]
    InvalidEigenvector(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("past blowup: denominator vanished (crossing time {crossing:?})")]
    PastBlowup { crossing: Option<f64> },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("time grids do not align: {0}")]
    Alignment(String),

    #[error("step produced non-finite values at t={t}")]
    StepOverflow { t: f64 },
}

pub type Result<T, E = ShadowError> = std::result::Result<T, E>;
