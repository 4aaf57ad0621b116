use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} spins, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("spin index {index} out of range for a model with {n} spins")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-coupling on spin {0} is not allowed")]
    SelfCoupling(usize),

    #[error("non-finite coefficient {value} at {what}")]
    NonFinite { what: String, value: f64 },

    #[error("model has {n} spins, above the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid truth table: {0}")]
    TruthTable(String),

    #[error("penalty synthesis failed: {violated} invalid states below the requested gap {gap} (best achievable gap {best_gap})")]
    Synthesis {
        violated: usize,
        gap: f64,
        best_gap: f64,
    },

    #[error("circuit graph: {0}")]
    Circuit(String),

    #[error("value {value} does not fit in {bits} bits")]
    Range { value: u64, bits: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("integration diverged at t = {time:e} s: {detail}")]
    Instability { time: f64, detail: String },
}
