use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("singular Bose occupation: beta*gap = {0} (infinite-temperature bath)")]
    SingularOccupation(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("steady state is not unique (second-smallest singular value {0:e})")]
    NonUniqueSteadyState(f64),

    #[error("steady state violates positivity (min eigenvalue {0:e})")]
    PositivityViolation(f64),

    #[error("linear solve for the steady state failed")]
    SingularSystem,

    #[error("steady-state residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),

    #[error("time integration unstable ({0}); reduce the time step")]
    Unstable(String),

    #[error("unknown channel group `{0}`")]
    UnknownGroup(String),

    #[error("system has no interaction operator")]
    MissingInteraction,

    #[error("no rotating frame renders the drive time independent: {0}")]
    NoValidFrame(String),

    #[error("invariant violated: {0}")]
    InvariantBreach(String),

    #[error("trace expected real has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
