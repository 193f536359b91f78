use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A division or square root hit a non-invertible / non-positive value.
    #[error("singular evaluation of `{expr}`: {reason}")]
    SingularEvaluation { expr: String, reason: String },

    #[error("requested derivative order {requested} exceeds jet order {available}")]
    OutOfOrder { requested: usize, available: usize },

    #[error("jet dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("point {point:?} lies outside the model domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("symplectic form is degenerate at {point:?} (|det| = {det:e})")]
    SingularOmega { point: Vec<f64>, det: f64 },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("insufficient order: need {needed}, have {available}")]
    InsufficientOrder { needed: usize, available: usize },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("geodesic left the domain at t = {t}")]
    DomainExit { t: f64 },

    #[error("step size collapsed at t = {t} (h = {h:e})")]
    StepCollapse { t: f64, h: f64 },

    #[error("transversality failure: {0}")]
    Transversality(String),

    #[error("chart left its validity region: Omega'(v, Av) = {value}")]
    ChartValidity { value: f64 },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn singular(expr: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::SingularEvaluation {
            expr: expr.into(),
            reason: reason.into(),
        }
    }
}
