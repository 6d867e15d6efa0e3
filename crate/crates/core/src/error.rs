use thiserror::Error;

pub type Result<T, E = PrepError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrepError {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),

    #[error("register `{name}` must be at least one bit wide")]
    EmptyRegister { name: String },

    #[error("layout needs {requested} qubits but the budget is {budget}")]
    QubitBudget { requested: usize, budget: usize },

    #[error("value {value} does not fit register `{register}` ({width} bits)")]
    ValueOutOfRange {
        register: String,
        value: u64,
        width: usize,
    },

    #[error("invalid fixed-point format: point {point} exceeds width {width}")]
    InvalidFormat { width: usize, point: usize },

    #[error("qubit {qubit} out of range for a {total}-qubit state")]
    QubitOutOfRange { qubit: usize, total: usize },

    #[error("map is not a bijection: {0}")]
    NotBijective(String),

    #[error("post-selection onto a subspace with zero probability")]
    ZeroProbability,

    #[error("register `{register}` is entangled with the rest of the state (residual {residual:.3e})")]
    Entangled { register: String, residual: f64 },

    /// A support or state precondition did not hold for the state an
    /// operation was applied to.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Rejected configuration or argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl PrepError {
    /// True for errors caused by the caller's configuration or input files,
    /// as opposed to failures that surface while a simulation runs.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            PrepError::UnknownRegister(_)
                | PrepError::DuplicateRegister(_)
                | PrepError::EmptyRegister { .. }
                | PrepError::QubitBudget { .. }
                | PrepError::ValueOutOfRange { .. }
                | PrepError::InvalidFormat { .. }
                | PrepError::QubitOutOfRange { .. }
                | PrepError::NotBijective(_)
                | PrepError::InvalidArgument(_)
                | PrepError::Parse(_)
        )
    }
}

impl From<std::io::Error> for PrepError {
    fn from(err: std::io::Error) -> Self {
        PrepError::Io(err.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> PrepError {
    PrepError::InvalidArgument(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> PrepError {
    PrepError::Precondition(msg.into())
}
