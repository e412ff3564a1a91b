use alloc::string::String;
use core::fmt;

/// Failure modes of the solvers and model constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operation needs a different fading model kind.
    KindMismatch { op: &'static str, expected: &'static str },
    /// An argument lies outside the operation's domain.
    Domain { op: &'static str, detail: String },
    /// Model parameters violate a construction invariant.
    InvalidModel(String),
    /// No sign change of the root condition was found on the scanned range.
    NoRoot { op: &'static str, lo: f64, hi: f64 },
    /// The power-exhaustion boundary could not be bracketed.
    BracketFailure {
        power: f64,
        floor: f64,
        power_at_floor: f64,
    },
    /// RK4 refinement could not reach tolerance.
    StepUnderflow { at: f64 },
    /// Brute-force oracle refuses more layers than it can enumerate.
    TooManyLayers { layers: usize, max: usize },
    /// Exponent fitting needs more points or a wider SNR span.
    InsufficientSpan { points: usize, span_db: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::KindMismatch { op, expected } => {
                write!(f, "{op}: requires {expected} fading model")
            }
            Error::Domain { op, detail } => write!(f, "{op}: domain error: {detail}"),
            Error::InvalidModel(msg) => write!(f, "invalid fading model: {msg}"),
            Error::NoRoot { op, lo, hi } => {
                write!(f, "{op}: no sign change found on [{lo:e}, {hi:e}]")
            }
            Error::BracketFailure {
                power,
                floor,
                power_at_floor,
            } => write!(
                f,
                "cannot bracket exhaustion boundary for P = {power:e}: U({floor:e}) = {power_at_floor:e} <= P"
            ),
            Error::StepUnderflow { at } => {
                write!(f, "RK4 step underflow near gain {at:e}")
            }
            Error::TooManyLayers { layers, max } => {
                write!(f, "brute force supports at most {max} layers, got {layers}")
            }
            Error::InsufficientSpan { points, span_db } => write!(
                f,
                "exponent fit needs >= 4 ascending points spanning >= 20 dB (got {points} points, {span_db:.1} dB)"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
