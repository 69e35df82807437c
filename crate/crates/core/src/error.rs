use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must satisfy {constraint} (got {value})")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("right-hand side returned a non-finite value at step {step} (x = {x}, x_delayed = {x_delayed})")]
    NonFinite { step: usize, x: f64, x_delayed: f64 },

    #[error("right-hand side undefined at step {step}: {message}")]
    RhsDomain { step: usize, message: String },

    #[error("delayed index {index} is not yet available ({len} stored values)")]
    DelayIndex { index: usize, len: usize },

    #[error("no all-q-unstable b found for a = {a} down to b = {limit}")]
    BracketNotFound { a: f64, limit: f64 },

    #[error("least-squares design is rank deficient: {0}")]
    RankDeficient(String),

    #[error("malformed table: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, constraint: &'static str, value: f64) -> Self {
        Error::InvalidParameter {
            name,
            constraint,
            value,
        }
    }
}
