use thiserror::Error;

pub type Result<T> = std::result::Result<T, ToaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ToaError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside the domain ({expected})")]
    Domain { what: &'static str, value: f64, expected: &'static str },

    #[error("argument {value} outside supported range {range}")]
    Range { value: f64, range: &'static str },

    #[error("quadrature did not converge: {context} (achieved estimate {estimate:e})")]
    Accuracy { context: String, estimate: f64 },

    #[error("phase derivative failed at p = {p}: {reason}")]
    PhaseDerivative { p: f64, reason: String },

    #[error("time grid captures only {captured:.9} of the arrival mass (need {required})")]
    GridTooSmall { captured: f64, required: f64 },

    #[error("turning point: E - V(q) = {margin:e} at q = {position} is inside the guard band")]
    TurningPoint { position: f64, margin: f64 },

    #[error("classical path from q = {from} to x = {to} crosses a turning point")]
    Unreachable { from: f64, to: f64 },

    #[error("only {fraction:.4} of the packet reaches x classically (need {required})")]
    Coverage { fraction: f64, required: f64 },

    #[error("{0} is not supported for this potential")]
    Unsupported(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ToaError {
    fn from(e: std::io::Error) -> Self {
        ToaError::Io(e.to_string())
    }
}
