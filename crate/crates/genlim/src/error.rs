use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("class `{0}` has no ERM rule")]
    StructuredWithoutErm(String),
    #[error("class `{0}` cannot be enumerated")]
    StructuredWithoutEnumeration(String),
    #[error("ERM is undefined on an empty class")]
    EmptyClass,
    #[error("finiteness undecided: at least {count} elements among the first {window}")]
    UnclassifiableWithinWindow { count: u64, window: u64 },
    #[error("no eligible example among the first {window}")]
    WindowExhausted { window: u64 },
    #[error("the observed stream is inconsistent with every hypothesis")]
    BotClosure,
    #[error("no class is consistent at the switching time")]
    EmptyS,
    #[error("horizon {horizon} exceeded: {what}")]
    HorizonExceeded { horizon: u64, what: String },
    #[error("no closure witness of size {d} within the window")]
    NoWitness { d: u64 },
    #[error("no consistent hypothesis")]
    NoConsistentHypothesis,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for bugs, 1 for everything a user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvariantViolation(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
