use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too small: {nx}x{ny} (need at least {min} points per axis)")]
    GridTooSmall { nx: usize, ny: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite value at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("point ({x}, {y}) outside the valid domain of surface '{surface}'")]
    DomainViolation { surface: String, x: f64, y: f64 },

    #[error("unknown surface '{0}'")]
    UnknownSurface(String),

    #[error("invalid surface parameter: {0}")]
    InvalidParameter(String),

    #[error("test function touches the trimmed margin")]
    SupportTouchesMargin,

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("flow unstable: energy kept increasing after {halvings} timestep halvings")]
    FlowUnstable { halvings: usize },

    #[error("malformed WGL1 data: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
