use thiserror::Error;

/// Errors raised anywhere in the identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("sample {index} is exactly zero; phase is undefined")]
    ZeroSample { index: usize },
    #[error("window of {window_s} s exceeds signal duration {duration_s} s")]
    WindowTooLong { window_s: f64, duration_s: f64 },
    #[error("hop must be positive and at least one sample, got {0} s")]
    InvalidHop(f64),
    #[error("two-sided spectrum requested for a real-valued series")]
    TwoSidedRealInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("filter index {index} out of range for {len} filters")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("spectrogram axis does not match the filter bank: {0}")]
    AxisMismatch(String),
    #[error("empty input")]
    EmptyInput,
    #[error("K' = {k_prime} must satisfy 0 < K' < {k}")]
    KPrimeTooLarge { k_prime: usize, k: usize },
    #[error("feature kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate data cube: {0}")]
    DegenerateCube(String),
    #[error("empty angle grid")]
    EmptyGrid,
    #[error("range window [{lo} m, {hi} m] selects no range bins")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("duration must be positive, got {0} s")]
    InvalidDuration(f64),
    #[error("measurement schedule is empty")]
    ScheduleEmpty,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("segment length {seg_len} s does not divide duration {duration} s")]
    NonDivisibleLength { seg_len: f64, duration: f64 },
    #[error("need at least {min} rows, got {got}")]
    TooFewRows { min: usize, got: usize },
    #[error("binary training set contains a single class")]
    SingleClass,
    #[error("SMO did not converge within {iterations} iterations (KKT gap {gap:.3e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("need at least 2 sessions for grouped cross-validation, got {0}")]
    TooFewSessions(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("perplexity {perplexity} too large for {rows} rows (need rows > 3*perplexity)")]
    PerplexityTooLarge { perplexity: f64, rows: usize },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("malformed feature file: {0}")]
    FeatureFile(String),
    #[error("sample {id}: {source}")]
    Sample { id: String, source: Box<Error> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
