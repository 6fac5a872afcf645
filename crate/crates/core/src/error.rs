use thiserror::Error;

/// Every failure the library can report.
///
/// The variants fall into three groups that the command-line driver maps
/// onto distinct exit codes: bad input (`Domain`, `Mesh`, `Config`,
/// `UnknownTest`, `UnknownScheme`), numerical failure (`PositivityLost`,
/// `DriedCell`, `NonFiniteSpeed`, `NoStepTransition`, `PatternInfeasible`,
/// `InadmissiblePattern`) and validation failure (`Connector`, `Registry`).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown test `{0}`")]
    UnknownTest(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("positivity lost in cell {cell} at step {step}: h = {height:e}")]
    PositivityLost { cell: usize, step: usize, height: f64 },

    #[error("hydrostatic reconstruction dried a cell at interface {interface}: h* = {height:e}")]
    DriedCell { interface: usize, height: f64 },

    #[error("non-finite characteristic speed at step {step}")]
    NonFiniteSpeed { step: usize },

    #[error("no step transition in the {branch} branch: {detail}")]
    NoStepTransition { branch: &'static str, detail: String },

    #[error("pattern infeasible: {0}")]
    PatternInfeasible(String),

    #[error("inadmissible pattern: {0}")]
    InadmissiblePattern(String),

    #[error("connector validation failed between states {left} and {right}: {detail} (residual {residual:e})")]
    Connector {
        left: usize,
        right: usize,
        detail: String,
        residual: f64,
    },

    #[error("registry validation failed: {0}")]
    Registry(String),

    #[error("time mismatch: numerical solution at t = {numerical}, reference requested at t = {reference}")]
    TimeMismatch { numerical: f64, reference: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the failure comes from the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PositivityLost { .. }
                | Error::DriedCell { .. }
                | Error::NonFiniteSpeed { .. }
                | Error::NoStepTransition { .. }
                | Error::PatternInfeasible(_)
                | Error::InadmissiblePattern(_)
        )
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Connector { .. } | Error::Registry(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
