use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("span is not closed: Q{q}({monomial}) escapes it")]
    NotClosed { q: usize, monomial: String },
    #[error("Q{q} is not defined on this module")]
    UndefinedQ { q: usize },
    #[error("degree {degree} lies outside the certified range (<= {certified})")]
    Uncertified { degree: i64, certified: i64 },
    #[error("theta_{k} consistency failure at {monomial}: {reason}")]
    Theta { k: u64, monomial: String, reason: String },
    #[error("submodule is not free: {0}")]
    NotFree(String),
    #[error("no retraction exists: {0}")]
    Retraction(String),
    #[error("resolution did not stabilise: {0}")]
    Unstable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
