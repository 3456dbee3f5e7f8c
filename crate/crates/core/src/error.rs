use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("letter {letter} is out of range for {n_symbols} symbols (max {})", n_symbols.saturating_sub(2))]
    LetterOutOfRange { letter: usize, n_symbols: usize },

    #[error("invalid permutation array: {0}")]
    InvalidPermutation(String),

    #[error("digit k_{position} = {value} exceeds its bound {position}")]
    DigitOutOfRange { position: usize, value: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("pattern-controlled gate must be lowered before emission")]
    MustLower,

    #[error("measured branch has probability {0:e}")]
    ImpossibleBranch(f64),

    #[error("invalid restriction: {0}")]
    InvalidRestriction(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("label not found in graph: {0}")]
    LabelNotFound(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{0}")]
    Domain(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),
}

impl Error {
    /// Stable machine-readable tag, used for CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LetterOutOfRange { .. } | Error::DigitOutOfRange { .. } => "range",
            Error::InvalidPermutation(_) => "validation",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::QubitOutOfRange { .. } => "qubit_range",
            Error::InvalidGate(_) => "invalid_gate",
            Error::MustLower => "must_lower",
            Error::ImpossibleBranch(_) => "impossible_branch",
            Error::InvalidRestriction(_) => "invalid_restriction",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::LabelNotFound(_) => "not_found",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::Domain(_) => "domain",
            Error::Resource(_) => "resource",
        }
    }
}
