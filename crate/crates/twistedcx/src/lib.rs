//! Twisted complexes on a finite cover nerve, with exact arithmetic.

pub mod exact_linalg;
pub mod cover_model;
pub mod par;
pub mod twisted_core;
pub mod gen;
pub mod functors;
pub mod resolution;
pub mod dgcat_descent;
