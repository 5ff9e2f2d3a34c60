use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bitstring has {got} bits but the register has {expected} qubits")]
    LengthMismatch { expected: usize, got: usize },

    #[error("register of {0} qubits is outside the supported range 1..={max}", max = crate::statevec::MAX_QUBITS)]
    UnsupportedSize(usize),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("control and target are both qubit {0}")]
    ControlEqualsTarget(usize),

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid bit value {0}")]
    InvalidBit(u8),

    #[error("qubit {0} is not in a definite computational-basis state")]
    QubitNotDefinite(usize),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("label {0} is not canonical (leading bit must be 1)")]
    NonCanonicalLabel(String),

    #[error("direction vector has norm {0}, expected 1")]
    NotUnitVector(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("account is flagged; re-enrollment required")]
    AccountFlagged,

    #[error("classical password check failed")]
    AccessDenied,
}
