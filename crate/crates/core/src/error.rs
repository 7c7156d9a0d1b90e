use thiserror::Error;

/// A structurally malformed agent, environment, set or electorate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("invalid transducer: {0}")]
    Transducer(String),
    #[error("invalid environment: {0}")]
    Environment(String),
    #[error("invalid ultimately periodic set: {0}")]
    UpSet(String),
    #[error("invalid electorate: {0}")]
    Electorate(String),
}
