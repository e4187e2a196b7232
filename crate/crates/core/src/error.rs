use thiserror::Error;

/// Errors raised across the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial is constant; no roots to extract")]
    DegreeZero,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("interpolated determinant disagrees with direct evaluation (relative mismatch {mismatch:.3e}); degree bound too small")]
    InterpolationInconsistent { mismatch: f64 },
    #[error("matrix is not rank deficient (smallest/reference singular value ratio {ratio:.3e})")]
    NotRankDeficient { ratio: f64 },
    #[error("kernel is more than one-dimensional (second smallest singular value ratio {ratio:.3e})")]
    KernelNotOneDimensional { ratio: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("energy is only conserved when J5 vanishes")]
    NonConservative,
    #[error("affine transform matrix is singular or too ill-conditioned (condition {condition:.3e})")]
    SingularTransform { condition: f64 },
    #[error("no real solution: {0}")]
    NoRealSolution(String),
    #[error("symmetry constraint cannot be satisfied: {0}")]
    SymmetryInfeasible(String),
    #[error("node index out of range: {0}")]
    OutOfRange(String),
    #[error("leading coefficient matrix is singular; the characteristic polynomial drops degree")]
    LeadingSingular,
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("characteristic roots are not separated (min separation {separation:.3e})")]
    DegenerateRoots { separation: f64 },
    #[error("solver assumptions violated: {0}")]
    AssumptionViolation(String),
    #[error("kernel extraction failed: {0}")]
    KernelFailure(String),
    #[error("boundary-value system is singular for these endpoints (condition {condition:.3e})")]
    SingularBoundarySystem { condition: f64 },
    #[error("leading block of the recurrence is singular")]
    LeadingBlockSingular,
    #[error("marching would leave the interior window: {0}")]
    WindowExceeded(String),
    #[error("set is empty")]
    EmptySet,
    #[error("no choreography: {0}")]
    NotChoreographic(String),
    #[error("delay is resonant for mode {lambda}: exp(lambda*T/n) = 1 and the center-of-mass sum does not cancel")]
    DelayResonant { lambda: String },
    #[error("invalid scale operator: {0}")]
    InvalidOperator(String),
    #[error("invalid Lagrangian data: {0}")]
    InvalidSpec(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse(_) | Error::DimensionMismatch(_) | Error::Io(_) => 2,
            Error::AssumptionViolation(_)
            | Error::NotChoreographic(_)
            | Error::DelayResonant { .. }
            | Error::NonConservative
            | Error::InvalidOperator(_)
            | Error::InvalidSpec(_)
            | Error::LeadingSingular
            | Error::SingularBoundarySystem { .. }
            | Error::NoRealSolution(_)
            | Error::SymmetryInfeasible(_)
            | Error::SingularTransform { .. }
            | Error::DegenerateRoots { .. } => 3,
            _ => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
