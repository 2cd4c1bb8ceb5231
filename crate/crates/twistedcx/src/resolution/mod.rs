use thiserror::Error;

use crate::cover_model::{Face, Tuple};

mod factor;
mod resolve;

pub use factor::*;
pub use resolve::*;

#[cfg(test)]
mod tests;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error("restriction {from:?} -> {to:?} is not a quasi-isomorphism")]
    NotPerfect { from: Face, to: Face },
    #[error("no lift at tuple {0:?}")]
    LiftFailed(Tuple),
    #[error("obstruction at tuple {0:?} is not a cocycle")]
    NotACocycle(Tuple),
    #[error("not a weak equivalence")]
    NotWeakEquivalence,
    #[error("map is not closed")]
    NotClosed,
    #[error("internal: {0}")]
    Internal(String),
    #[error("verification failed: {0}")]
    Verification(String),
}
