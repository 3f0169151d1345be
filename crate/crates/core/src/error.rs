use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("positivity failure at t = {t}: min rho = {min_rho}")]
    PositivityFailure { t: f64, min_rho: f64 },
    #[error("point outside Omega (z1 = {0} must be > 0)")]
    OutsideOmega(f64),
    #[error("point outside w(Omega): {0}")]
    OutsideImage(String),
    #[error("step-size underflow while integrating characteristic ODE at s = {0}")]
    StepUnderflow(f64),
    #[error("Newton inversion did not converge: {0}")]
    InversionFailed(String),
    #[error("no blow-up estimate: {0}")]
    NoEstimate(String),
    #[error("domain conflict: {0}")]
    DomainConflict(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
