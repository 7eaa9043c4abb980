use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{operation} is not defined for {equation}")]
    UnsupportedEquation {
        operation: &'static str,
        equation: &'static str,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate derivative at t = {t}: |y'| too small relative to |y| to locate the pole")]
    DegenerateDerivative { t: f64 },
    #[error("purity violation leaving the detour around t0 = {pole}: |Im y| = {im_y:e}, |Im y'| = {im_yp:e}")]
    PurityViolation { pole: f64, im_y: f64, im_yp: f64 },
    #[error("step size underflow at t = ({t_re}, {t_im}) with h = {h:e}")]
    StepUnderflow { t_re: f64, t_im: f64, h: f64 },
    #[error("horizon {horizon} not reached: {cause}")]
    HorizonUnreached { horizon: f64, cause: String },
    #[error("ambiguous classification: {0}")]
    AmbiguousClassification(String),
    #[error("bisection probe at {probe} could not be classified: {reason}")]
    ProbeFailure { probe: f64, reason: String },
    #[error("bracket endpoints share the discriminant class {0}")]
    InvalidBracket(String),
    #[error("sequence of length {len} too short for order-{order} Richardson extrapolation")]
    SequenceTooShort { len: usize, order: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
