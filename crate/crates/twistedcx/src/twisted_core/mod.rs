//! Twisted complexes over a cover nerve: bigraded morphisms, cochains, MC data.

mod cochain;
mod complex;
mod family;
mod morphism;
mod natural;

pub use cochain::Cochain;
pub use complex::*;
pub use family::LocalFamily;
pub use morphism::{sign, FaceMaps, Morphism};
pub use natural::{solve_natural, NatEquation, NatTerm, NatUnknown};
