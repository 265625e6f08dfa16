use thiserror::Error;

/// Largest register (qubits or binary variables) the dense engines accept.
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },

    #[error("assignment has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("value {value} at position {position} is outside the {alphabet} alphabet")]
    Alphabet {
        position: usize,
        value: i64,
        alphabet: &'static str,
    },

    #[error("negative penalty weight {0}")]
    NegativeWeight(f64),

    #[error("polynomial degree {found} exceeds supported maximum {max}")]
    DegreeTooHigh { found: usize, max: usize },

    #[error("constraint coefficient {0} is not an integer")]
    NonIntegerCoefficient(f64),

    #[error("inequality can never be satisfied: bound {bound} is below the minimum left-hand side {min_lhs}")]
    UnsatisfiableInequality { bound: i64, min_lhs: i64 },

    #[error("{n} qubits exceeds the resource guard of {max}")]
    ResourceGuard { n: usize, max: usize },

    #[error("qubit count must be at least 1")]
    EmptyRegister,

    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),

    #[error("energy table has {got} entries, expected {expected}")]
    EnergyTableSize { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no {0} entries in spectrum")]
    EmptyClass(&'static str),

    #[error("size mismatch: spectrum has {spectrum} qubits, instance has {instance}")]
    SizeMismatch { spectrum: usize, instance: usize },

    #[error("infeasible design instance: {0}")]
    Infeasible(String),

    #[error("invalid component value {0}")]
    InvalidComponent(f64),

    #[error("singular basis during simplex pivot (condition estimate {condition:.3e})")]
    SingularBasis { condition: f64 },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("unsupported gate `{0}`")]
    UnknownGate(String),

    #[error("qasm parse error on line {line}: {message}")]
    QasmParse { line: usize, message: String },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
