use crate::error::{Error, Result};
use crate::Real;

/// Uniform mesh of the unit interval or the unit square.
///
/// In 2D every grid cell is split along its lower-left to upper-right
/// diagonal; vertex `(i, j)` has index `i + j (n + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    dim: usize,
    cells_per_axis: usize,
    vertices: Vec<[T; 2]>,
    /// Flattened connectivity, `dim + 1` vertices per element.
    elements: Vec<usize>,
    h: T,
}

impl<T: Real> Mesh<T> {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMesh(format!("need at least 2 cells per axis, got {n}")));
        }
        let nf = T::from_usize_lossy(n);
        match dim {
            1 => {
                let vertices = (0..=n).map(|i| [T::from_usize_lossy(i) / nf, T::zero()]).collect();
                let elements = (0..n).flat_map(|e| [e, e + 1]).collect();
                Ok(Self {
                    dim,
                    cells_per_axis: n,
                    vertices,
                    elements,
                    h: T::one() / nf,
                })
            }
            2 => {
                let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
                for j in 0..=n {
                    for i in 0..=n {
                        vertices.push([T::from_usize_lossy(i) / nf, T::from_usize_lossy(j) / nf]);
                    }
                }
                let idx = |i: usize, j: usize| i + j * (n + 1);
                let mut elements = Vec::with_capacity(6 * n * n);
                for j in 0..n {
                    for i in 0..n {
                        let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                        elements.extend_from_slice(&[v00, v10, v11]);
                        elements.extend_from_slice(&[v00, v11, v01]);
                    }
                }
                Ok(Self {
                    dim,
                    cells_per_axis: n,
                    vertices,
                    elements,
                    h: T::lit(2.0).sqrt() / nf,
                })
            }
            d => Err(Error::InvalidMesh(format!("dimension must be 1 or 2, got {d}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Number of vertices, i.e. unknowns per field.
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len() / self.nodes_per_element()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.dim + 1
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> [T; 2] {
        self.vertices[i]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_element();
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.elements.chunks_exact(self.nodes_per_element())
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn measure(&self, e: usize) -> T {
        let el = self.element(e);
        let a = self.vertices[el[0]];
        let b = self.vertices[el[1]];
        if self.dim == 1 {
            (b[0] - a[0]).abs()
        } else {
            let c = self.vertices[el[2]];
            ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs() * T::lit(0.5)
        }
    }

    /// Largest vertex-to-vertex distance in element `e`.
    pub fn diameter(&self, e: usize) -> T {
        let el = self.element(e);
        let mut d = T::zero();
        for (k, &a) in el.iter().enumerate() {
            for &b in &el[k + 1..] {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                d = d.max(((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt());
            }
        }
        d
    }
}
