//! Uniform meshes and P1 finite-element assembly.

pub mod assembly;
pub mod mesh;
pub mod quadrature;

pub use assembly::{
    assemble_mass, assemble_rhs, assemble_stiffness, assemble_weighted_mass, integrate_nodal, nodal_weights,
};
pub use mesh::Mesh;
