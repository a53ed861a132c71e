use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Positions and magnitudes are carried as `f64` regardless of the scalar
/// type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("adaptive step size underflow at x = {at:e}")]
    StepSizeUnderflow { at: f64 },
    #[error("non-finite state at x = {at:e}")]
    NonFiniteState { at: f64 },
    #[error("no sign change on [{lo:e}, {hi:e}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root finder exceeded {0} iterations")]
    MaxIterations(usize),
    #[error("argument {0:e} outside the supported domain")]
    DomainError(f64),
    #[error("Wronskian drift {max_rel:e} exceeds tolerance")]
    WronskianDrift { max_rel: f64 },
    #[error("orthogonality defect {rel:e} after correction")]
    OrthogonalityFailure { rel: f64 },
    #[error("grid reaches {r_max:e} but {needed:e} is required")]
    GridTooShort { r_max: f64, needed: f64 },
    #[error("eigenfunction does not enter its decay regime (relative slope {slope:e})")]
    DecayNotEntered { slope: f64 },
    #[error("tail mismatch: neither shooting sign bounds the target")]
    TailMismatch,
    #[error("tail coefficient unstable: {k_m:e} vs {k_2m:e}")]
    TailFitUnstable { k_m: f64, k_2m: f64 },
    #[error("singular Bessel system (det = {det:e})")]
    SingularBesselSystem { det: f64 },
    #[error("b increased at s = {s:e}")]
    NonMonotoneB { s: f64 },
    #[error("no dichotomy: both bracket ends exit with sign {sign}")]
    NoDichotomy { sign: i32 },
    #[error("time step {dt:e} exceeds stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("modulation Newton iteration diverged: {0}")]
    NewtonDiverged(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Validation errors map to exit status 2, everything else to 1.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::GridTooShort { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
