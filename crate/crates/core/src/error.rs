use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    /// The state left the representable range (log-coordinate overflow or NaN).
    #[error("non-finite state at t = {time}: {detail}")]
    NonFinite { time: f64, detail: String },

    /// Only produced by the diagnostic direct Euler scheme.
    #[error("positivity lost in {coordinate} at t = {time} (value {value})")]
    PositivityLost {
        time: f64,
        coordinate: &'static str,
        value: f64,
    },

    #[error("horizon {horizon} is shorter than the minimum {min_horizon} required for verification")]
    HorizonTooShort { horizon: f64, min_horizon: f64 },

    #[error("{aborted} of {total} paths aborted (limit is 10%)")]
    TooManyAborts { aborted: usize, total: usize },

    #[error("model file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
