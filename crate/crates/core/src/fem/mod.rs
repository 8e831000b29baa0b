//! High-order 1D finite elements and 2D tensor-product assembly.
//!
//! Global degrees of freedom are ordered lexicographically with θ fastest:
//! `index = radial_dof * n_theta + theta_dof`, so the trace of one radial
//! node is a contiguous block.

mod assembly;
mod load;
mod norms;
pub mod quadrature;
mod space;

pub use assembly::{
    assemble_perturbed_system, assemble_tensor_system, assemble_weighted_matrix,
    assemble_weighted_matrix_on, radial_matrices, radial_space, theta_matrices, theta_space,
    Derivative, SystemForm, TensorSystem,
};
pub use load::{assemble_load, SourceKind, SourceSpec};
pub use norms::relative_l2_error;
pub use space::{Mesh1D, ReferenceElement, Space1D, SpaceBc};
