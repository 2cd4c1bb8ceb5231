//! Sheafification, twisting, and the maps between them.

mod local;
mod sheafify;

pub use local::*;
pub use sheafify::*;

#[cfg(test)]
mod tests;
