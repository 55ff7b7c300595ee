use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("event `{0}` declared twice")]
    DuplicateEvent(String),
    #[error("event name `tick` is reserved")]
    ReservedEvent,
    #[error("event name must not be empty")]
    EmptyEventName,
    #[error("event `{name}`: lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { name: String, lower: u32, upper: u32 },
    #[error("event `{0}`: prohibitible events cannot be tick")]
    InvalidAttributes(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("event `{0}` has no time bounds")]
    MissingBounds(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("nondeterministic transition from state {state} on `{event}`")]
    Nondeterministic { state: u32, event: String },
    #[error("state {0} out of range")]
    BadState(u32),
    #[error("event `{0}` collides with an existing event")]
    NameCollision(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no supervisor exists: {hint}")]
    EmptySupervisor { hint: String },
    #[error("control equivalence check failed: {0}")]
    EquivalenceFailure(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
