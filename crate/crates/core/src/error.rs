use thiserror::Error;

/// Which of the two runs in a paired experiment failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunSide {
    /// The weakly dissipative run, integrated directly in `t`.
    Dissipative,
    /// The non-dissipative reference run, integrated in the rescaled time.
    Reference,
}

impl std::fmt::Display for RunSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunSide::Dissipative => f.write_str("dissipative"),
            RunSide::Reference => f.write_str("reference"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} samples, grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field contains a non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("unsupported derivative order {0} (expected 1, 2 or 3)")]
    UnsupportedOrder(u32),

    #[error("momentum mean {mean:e} is incompatible with m = -v_xx (must vanish)")]
    IncompatibleMean { mean: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rescaled time {s} is outside [0, {limit})")]
    OutOfRange { s: f64, limit: f64 },

    #[error("integrator configuration: {0}")]
    Config(String),

    #[error("{side} run blew up at t = {t}")]
    BlowUp { side: RunSide, t: f64 },

    #[error("closed-form solution breaks down at t = {t} (denominator {min_denominator:e})")]
    Breakdown { t: f64, min_denominator: f64 },

    #[error("flow map is not increasing between labels {index} and {next}")]
    NonMonotoneFlow { index: usize, next: usize },

    #[error("neither run crossed the blow-up threshold before the end time")]
    NoBlowUpObserved,
}

pub type Result<T> = std::result::Result<T, Error>;
