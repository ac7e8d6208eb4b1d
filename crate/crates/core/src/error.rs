use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids (L={left_length}, n={left_n} vs L={right_length}, n={right_n})")]
    GridMismatch { left_length: f64, left_n: usize, right_length: f64, right_n: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("symbol is not finite at frequency {xi}")]
    NonFiniteSymbol { xi: f64 },

    #[error("zero mode must vanish (|coeff_0| = {magnitude:e}, allowed {allowed:e})")]
    ZeroModeViolation { magnitude: f64, allowed: f64 },

    #[error("invalid beta {beta}: negative dispersion radicand at xi = {xi}")]
    InvalidBeta { beta: f64, xi: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("divergence: sample {index} overflowed ({value})")]
    Divergence { index: usize, value: f64 },

    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("trajectory has {found} stored states, need at least {needed}")]
    EmptyTrajectory { found: usize, needed: usize },

    #[error("grid too large for brute-force evaluation: n = {n} (limit {limit})")]
    GridTooLarge { n: usize, limit: usize },

    #[error(
        "undersampled in time: spacing {spacing} exceeds {required} (use a snapshot cadence of at most {required})"
    )]
    Undersampled { spacing: f64, required: f64 },

    #[error("trajectory does not cover [{start}, {end}]")]
    WindowNotCovered { start: f64, end: f64 },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("Strichartz pair (p={p}, q={q}) violates 3/p + 1/q >= 1/2 with 2 <= q <= inf")]
    InadmissiblePair { p: f64, q: f64 },

    #[error("power-law fit: {0}")]
    Fit(String),

    #[error("trajectory terminated early ({0}); analysis needs a completed run")]
    IncompleteTrajectory(String),
}

pub type Result<T> = std::result::Result<T, Error>;
