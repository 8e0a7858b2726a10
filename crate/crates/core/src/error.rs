use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("no positive revenue is attainable (shift {shift})")]
    NoPositiveRevenue { shift: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid estimator: {0}")]
    InvalidEstimator(String),

    #[error("review count {n} out of range for c = {c}")]
    IndexOutOfRange { n: usize, c: usize },

    #[error("invalid pricing policy: {0}")]
    InvalidPolicy(String),

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("stay-probability {value} for state {state} is outside (0, 1]")]
    InvalidStay { state: usize, value: f64 },

    #[error("absorbing states (zero purchase probability): {states:?}")]
    AbsorbingState { states: Vec<String> },

    #[error("price {price} is absorbing: zero purchase probability with {count} positive reviews")]
    AbsorbingPrice { price: f64, count: usize },

    #[error("window {w} too large for exact enumeration (max {max})")]
    WindowTooLarge { w: usize, max: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("estimator is not calibrated to the quality states: {0}")]
    NotCalibrated(String),

    #[error("distribution kind `{0}` is not verified to be well behaved")]
    NotWellBehaved(String),

    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),

    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
