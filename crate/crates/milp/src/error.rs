use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("non-finite coefficient in `{0}`")]
    InvalidCoefficient(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("simplex iteration limit reached ({0} pivots)")]
    IterationLimit(usize),
    #[error("time limit reached during an LP solve")]
    Deadline,
    #[error("LP engine failure: {0}")]
    Engine(String),
}

impl MilpError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        MilpError::Parse {
            line,
            message: message.into(),
        }
    }
}
