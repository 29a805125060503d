use thiserror::Error;

use crate::descriptor::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("variable mismatch: {0}")]
    VariableMismatch(String),

    #[error("cohomology index {index} exceeds the dimension of {space}")]
    InvalidIndex { space: &'static str, index: usize },

    #[error("Z not zero-dimensional: {0}")]
    NotZeroDimensional(String),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("extension not locally free (Cayley-Bacharach violated by h): {0}")]
    NotLocallyFree(String),

    #[error("not a simple-type restriction: {0}")]
    NotSimpleType(String),

    #[error("section not unique: {0}")]
    SectionNotUnique(String),

    #[error("no adjugate partner: {0}")]
    NoAdjugatePartner(String),

    #[error("non-linear entry: {0}")]
    NonLinearEntry(String),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// An internal consistency check between two independent computations
    /// failed. Never expected; signals a bug.
    #[error("LES inconsistency: {0}")]
    Inconsistency(String),
}

impl Error {
    /// Input errors are the caller's fault; inconsistencies are ours.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Inconsistency(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
