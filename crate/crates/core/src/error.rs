use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("invalid preference list: {0}")]
    InvalidList(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("`{entry}` does not appear in the list of {agent}")]
    NotInList { agent: String, entry: String },
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    #[error("invalid JSON instance: {0}")]
    Json(String),
    #[error("instance size {size} exceeds the configured bound {max}")]
    SizeBound { size: usize, max: usize },
    #[error("lists are over different universes ({left} vs {right} entries)")]
    UniverseMismatch { left: usize, right: usize },
    #[error("penalty must lie in [0, 1], got {0}")]
    PenaltyOutOfRange(String),
    #[error("invalid swap move: {0}")]
    InvalidMove(String),
    #[error("outcome for {0} is not deterministic; the input is not an equilibrium")]
    NonDeterministicBaseline(String),
    #[error("list of {0} is not a truncation of the sincere list")]
    NotATruncation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown mechanism `{0}` (expected gs-man, gs-woman, uniform, uniform-egal or egal-lex)")]
    UnknownMechanism(String),
    #[error("unknown fixture case `{0}`")]
    UnknownCase(String),
    #[error("unknown sweep `{0}`")]
    UnknownSweep(String),
}

/// The specific reason an instance file failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `{0}:` header")]
    MissingHeader(&'static str),
    #[error("agent `{0}` declared twice")]
    DuplicateAgent(String),
    #[error("`{0}` listed twice")]
    DuplicateEntry(String),
    #[error("no `@` marker in the list")]
    MissingSelf,
    #[error("more than one `@` marker in the list")]
    MultipleSelf,
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` belongs to the same side as the list owner")]
    SideMismatch(String),
    #[error("`{0}` is missing from the list")]
    MissingEntry(String),
    #[error("no preference list for `{0}`")]
    MissingList(String),
    #[error("invalid quota: {0}")]
    InvalidQuota(String),
    #[error("{0}")]
    Syntax(String),
}

pub type Result<T> = std::result::Result<T, Error>;
