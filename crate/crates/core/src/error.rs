use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("invalid `{field}` = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: String,
    },

    /// ω̄k < 1: geometric block coverage never reaches the whole network.
    #[error("omega_bar * k = {product} < 1, coverage never reaches all miners")]
    CoverageUnreachable { product: f64 },

    /// The integrator produced densities outside the admissible band.
    #[error(
        "step {step} left the density band at t = {time} (component {component} = {value}); use a smaller step"
    )]
    StepTooLarge {
        step: f64,
        time: f64,
        component: &'static str,
        value: f64,
    },

    #[error("receiver threshold undefined: delta_i + delta_p + epsilon * risk = 0")]
    ZeroThresholdDenominator,

    #[error("cannot build a {k}-regular graph on {n} vertices: {reason}")]
    Graph { n: u64, k: u64, reason: String },

    /// AoBI is undefined until block propagation has finished.
    #[error("trace incomplete: {spreaders} spreaders and {unspreaders} unspreaders remain at the last epoch")]
    IncompleteTrace { spreaders: u64, unspreaders: u64 },

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn invalid(field: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            value,
            reason: reason.into(),
        }
    }
}
