//! Exact linear algebra over ℚ and prime fields.

mod complex;
mod graded;
mod matrix;
mod modular;
mod rational;
mod scalar;
mod system;

pub use complex::{
    cohomology_dims, homotopy_boundary, homotopy_equation, is_acyclic, is_quasi_iso, mapping_cone,
    minimize_complex, null_homotopy, LinalgError, MinimalModel,
};
pub use graded::{GradedMap, GradedSpace};
pub use matrix::{offsets, rank, solve_linear, Echelon, Matrix, SparseRow, DENSE_CUTOFF};
pub use scalar::{Field, FieldError, Scalar};
pub use system::{BlockEquation, BlockSystem, Term};
