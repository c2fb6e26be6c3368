use crate::error::Result;
use crate::fem::{assemble_mass, assemble_stiffness, nodal_weights, Mesh};
use crate::la::sparse::CsrMatrix;
use crate::la::vector::dot;
use crate::Real;

/// A mesh together with its time-independent matrices `M` and `S`.
#[derive(Clone, Debug)]
pub struct Discretization<T: Real> {
    mesh: Mesh<T>,
    mass: CsrMatrix<T>,
    stiffness: CsrMatrix<T>,
    weights: Vec<T>,
    volume: T,
}

impl<T: Real> Discretization<T> {
    pub fn new(mesh: Mesh<T>) -> Self {
        let mass = assemble_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh);
        let weights = nodal_weights(&mesh);
        let volume = weights.iter().copied().sum();
        Self {
            mesh,
            mass,
            stiffness,
            weights,
            volume,
        }
    }

    pub fn uniform(dim: usize, n: usize) -> Result<Self> {
        Ok(Self::new(Mesh::new(dim, n)?))
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn mass(&self) -> &CsrMatrix<T> {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    /// Number of vertices, i.e. unknowns per field.
    pub fn p(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// `M 1`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Discrete mean `1^T M u / 1^T M 1`.
    pub fn mean(&self, u: &[T]) -> T {
        dot(&self.weights, u) / self.volume
    }

    /// `sqrt(v^T M v)`.
    pub fn mass_norm(&self, v: &[T]) -> T {
        dot(v, &self.mass.mul_vec(v)).max(T::zero()).sqrt()
    }
}
