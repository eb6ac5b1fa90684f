use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("circuit width {n} exceeds the simulator limit of {max} qubits")]
    WidthOverflow { n: usize, max: usize },

    #[error("expected {expected} parameters, got {got}")]
    ParamLength { expected: usize, got: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("circuit text line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("invalid ansatz spec: {0}")]
    InvalidSpec(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("malformed price data: {0}")]
    MalformedData(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("problem too large for enumeration: n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("unsupported plan: {0}")]
    UnsupportedPlan(String),

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("reduced-channel precondition violated: {0}")]
    ChannelViolation(String),

    #[error("fragment cache belongs to a different plan")]
    CacheMismatch,

    #[error("singular assignment matrix")]
    SingularMatrix,

    #[error("mitigated distribution has no mass on the allowed weight class")]
    EmptyDistribution,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("objective returned {value} at evaluation {evaluation} (theta = {theta:?})")]
    NonFinite { value: f64, evaluation: usize, theta: Vec<f64> },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("shot log: {0}")]
    ShotLog(String),

    #[error("shot stream of fragment {fragment}, input {input} ran out of draws")]
    StreamExhausted { fragment: usize, input: u8 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
