use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("`{field}` out of range: {reason}")]
    Range { field: &'static str, reason: String },

    /// The linearized drift matrix has an eigenvalue with non-positive real part.
    #[error("unstable quadrature dynamics: eigenvalue real parts ({0:.6e}, {1:.6e})")]
    Instability(f64, f64),

    #[error("scenario {scenario} is inconsistent with the parameters: {reason}")]
    ScenarioMismatch { scenario: String, reason: String },

    /// Closed forms assume k_s = 2 gamma N.
    #[error("self-phase modulation is not cancelled: k_s = {k_s}, 2*gamma*N = {required}")]
    SpmNotCancelled { k_s: f64, required: f64 },

    #[error("curve is already normalized")]
    DoubleNormalization,

    #[error("curve is not normalized")]
    NotNormalized,

    #[error("minimization did not converge after {iterations} iterations (bracket width {width:.3e})")]
    Convergence { iterations: usize, width: f64 },

    #[error("spectral density stays above the shot-noise limit on [{lo}, {hi}]")]
    NoBand { lo: f64, hi: f64 },

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("invalid frequency grid: {0}")]
    Grid(String),

    #[error("probe signal-to-noise ratio {snr:.2} is below {required}")]
    Snr { snr: f64, required: f64 },

    #[error("curve ordering violated at omega = {omega}: {detail}")]
    Ordering { omega: f64, detail: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn range(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Range {
            field,
            reason: reason.into(),
        }
    }
}
