//! Finite cover nerves and presheaves of graded spaces on them.

mod nerve;
mod presheaf;

pub use nerve::{build_nerve, face_order, CoverError, CoverNerve, Face, MAX_OPENS};
pub use presheaf::{
    block_diag, section_space, validate_presheaf, NaturalMap, Presheaf, PresheafComplex, PresheafError,
    PresheafReport,
};

/// An ordered multi-index `(i0, ..., ip)`; repeats allowed.
pub type Tuple = Vec<usize>;
