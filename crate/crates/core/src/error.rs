use crate::scalar::ParseScalarError;
use crate::word::{Gen, Word, WordParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single map could not produce `f^power(value)`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{gen}^{power} is not defined at {value}: {reason}")]
pub struct MapFault {
    pub gen: Gen,
    pub power: i64,
    pub value: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Word(#[from] WordParseError),

    #[error(transparent)]
    Scalar(#[from] ParseScalarError),

    #[error("invalid subgroup spec {text:?}: {reason}")]
    Spec { text: String, reason: String },

    #[error("ball of radius {radius} on {rank} generators has {size} nodes, above the cap of {cap}")]
    NodeCap {
        radius: usize,
        rank: usize,
        size: String,
        cap: u64,
    },

    #[error("D_t(x) = {value} at t = {word} leaves the domain {domain}")]
    Domain {
        word: Word,
        value: String,
        domain: String,
    },

    #[error("evaluating D_t at t = {word}: {fault}")]
    Map { word: Word, fault: MapFault },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
