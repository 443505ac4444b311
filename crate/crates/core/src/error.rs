use thiserror::Error;

/// Errors raised by the analytic and numerical engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NdpoError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid Fock configuration: {0}")]
    Config(String),

    #[error("not integrable: {0}")]
    NotIntegrable(String),

    #[error("degenerate marginal: y = b1^2 - b4^2 = {0} is not positive")]
    DegenerateMarginal(f64),

    #[error("no finite value: {0}")]
    NoFiniteValue(String),

    #[error("integration failed at t = {last_good_time}: {reason}")]
    Integration { last_good_time: f64, reason: String },

    #[error("steady state unavailable: {0}")]
    SteadyState(String),

    #[error("amplitude |{which}|^2 = {norm_sqr:.3} too large for n_cut = {n_cut}; need n_cut >= {required}")]
    AmplitudeTooLarge {
        which: &'static str,
        norm_sqr: f64,
        n_cut: usize,
        required: usize,
    },

    #[error("parameter parse error: {0}")]
    Parse(String),

    #[error("case {case}: {source}")]
    Validation {
        case: String,
        source: Box<NdpoError>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NdpoError {
    fn from(e: std::io::Error) -> Self {
        NdpoError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NdpoError>;
