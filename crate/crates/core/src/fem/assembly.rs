use crate::error::{Error, Result};
use crate::fem::mesh::Mesh;
use crate::fem::quadrature::degree4_rule;
use crate::la::sparse::{CooBuilder, CsrMatrix};
use crate::scheme::Params;
use crate::Real;

fn check_len<T>(mesh: &Mesh<T>, v: &[T], what: &str) -> Result<()>
where
    T: Real,
{
    if v.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "{what} has length {}, mesh has {} vertices",
            v.len(),
            mesh.num_vertices()
        )));
    }
    Ok(())
}

/// Scatters a symmetric local matrix (upper triangle filled) into `coo`.
fn scatter<T: Real>(coo: &mut CooBuilder<T>, nodes: &[usize], local: &[[T; 3]; 3]) {
    let k = nodes.len();
    for a in 0..k {
        for b in 0..k {
            let v = if a <= b { local[a][b] } else { local[b][a] };
            coo.push(nodes[a], nodes[b], v);
        }
    }
}

/// Consistent mass matrix `m_ij = (phi_i, phi_j)`.
pub fn assemble_mass<T: Real>(mesh: &Mesh<T>) -> CsrMatrix<T> {
    let p = mesh.num_vertices();
    let k = mesh.nodes_per_element();
    let mut coo = CooBuilder::with_capacity(p, p, mesh.num_elements() * k * k);
    for (e, nodes) in mesh.elements().enumerate() {
        let meas = mesh.measure(e);
        let mut local = [[T::zero(); 3]; 3];
        let (diag, off) = if mesh.dim() == 1 {
            (meas / T::lit(3.0), meas / T::lit(6.0))
        } else {
            (meas / T::lit(6.0), meas / T::lit(12.0))
        };
        for a in 0..k {
            for b in a..k {
                local[a][b] = if a == b { diag } else { off };
            }
        }
        scatter(&mut coo, nodes, &local);
    }
    coo.build(false)
}

/// Stiffness matrix `s_ij = (grad phi_i, grad phi_j)`, natural Neumann
/// boundary, so constants span the kernel.
pub fn assemble_stiffness<T: Real>(mesh: &Mesh<T>) -> CsrMatrix<T> {
    let p = mesh.num_vertices();
    let k = mesh.nodes_per_element();
    let mut coo = CooBuilder::with_capacity(p, p, mesh.num_elements() * k * k);
    for (e, nodes) in mesh.elements().enumerate() {
        let meas = mesh.measure(e);
        let mut local = [[T::zero(); 3]; 3];
        if mesh.dim() == 1 {
            let inv = T::one() / meas;
            local[0][0] = inv;
            local[0][1] = -inv;
            local[1][1] = inv;
        } else {
            let [x0, y0] = mesh.vertex(nodes[0]);
            let [x1, y1] = mesh.vertex(nodes[1]);
            let [x2, y2] = mesh.vertex(nodes[2]);
            let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
            let grads = [
                [(y1 - y2) / det, (x2 - x1) / det],
                [(y2 - y0) / det, (x0 - x2) / det],
                [(y0 - y1) / det, (x1 - x0) / det],
            ];
            for a in 0..3 {
                for b in a..3 {
                    local[a][b] = meas * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                }
            }
        }
        scatter(&mut coo, nodes, &local);
    }
    coo.build(false)
}

/// `l_ij = int (u_h)^2 phi_i phi_j` with a degree-4 rule, so the integral
/// is exact. The sparsity pattern is that of the mass matrix even when
/// `u` vanishes.
pub fn assemble_weighted_mass<T: Real>(mesh: &Mesh<T>, u: &[T]) -> Result<CsrMatrix<T>> {
    check_len(mesh, u, "weight field")?;
    let p = mesh.num_vertices();
    let k = mesh.nodes_per_element();
    let rule = degree4_rule::<T>(mesh.dim());
    let mut coo = CooBuilder::with_capacity(p, p, mesh.num_elements() * k * k);
    for (e, nodes) in mesh.elements().enumerate() {
        let meas = mesh.measure(e);
        let mut local = [[T::zero(); 3]; 3];
        for (lam, w) in &rule {
            let uq: T = (0..k).map(|a| lam[a] * u[nodes[a]]).sum();
            let wt = *w * meas * uq * uq;
            for a in 0..k {
                for b in a..k {
                    local[a][b] += wt * lam[a] * lam[b];
                }
            }
        }
        scatter(&mut coo, nodes, &local);
    }
    Ok(coo.build(true))
}

/// Row sums of the mass matrix, `(phi_i, 1)`, computed without assembling it.
pub fn nodal_weights<T: Real>(mesh: &Mesh<T>) -> Vec<T> {
    let mut w = vec![T::zero(); mesh.num_vertices()];
    let k = T::from_usize_lossy(mesh.nodes_per_element());
    for (e, nodes) in mesh.elements().enumerate() {
        let share = mesh.measure(e) / k;
        for &i in nodes {
            w[i] += share;
        }
    }
    w
}

/// `int f(u_h) dx` with the same degree-4 rule used for the weighted mass.
pub fn integrate_nodal<T: Real>(mesh: &Mesh<T>, u: &[T], f: impl Fn(T) -> T) -> Result<T> {
    check_len(mesh, u, "field")?;
    let k = mesh.nodes_per_element();
    let rule = degree4_rule::<T>(mesh.dim());
    let mut total = T::zero();
    for (e, nodes) in mesh.elements().enumerate() {
        let meas = mesh.measure(e);
        let mut s = T::zero();
        for (lam, w) in &rule {
            let uq: T = (0..k).map(|a| lam[a] * u[nodes[a]]).sum();
            s += *w * f(uq);
        }
        total += meas * s;
    }
    Ok(total)
}

/// Right-hand sides of the linearized block system:
/// `F = M u_prev_time + sigma dt m (M 1)` and `E = -M u_explicit`, where
/// `u_explicit` is the state at which the concave part of the bulk energy is
/// evaluated.
pub fn assemble_rhs<T: Real>(
    mass: &CsrMatrix<T>,
    u_prev_time: &[T],
    u_explicit: &[T],
    params: &Params<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let mut f = mass.try_mul_vec(u_prev_time)?;
    let ones = vec![T::one(); mass.ncols()];
    let mass_of_one = mass.mul_vec(&ones);
    let c = params.sigma() * params.dt() * params.m();
    for (fi, &mi) in f.iter_mut().zip(&mass_of_one) {
        *fi += c * mi;
    }
    let mut e = mass.try_mul_vec(u_explicit)?;
    e.iter_mut().for_each(|v| *v = -*v);
    Ok((f, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::vector::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_rows(a: &CsrMatrix<f64>) -> Vec<Vec<f64>> {
        let d = a.to_dense();
        (0..d.nrows()).map(|i| d.row(i).to_vec()).collect()
    }

    #[test]
    fn two_cell_mass_by_hand() {
        let mesh = Mesh::new(1, 2).unwrap();
        let m = assemble_mass(&mesh);
        let expect = [
            [1.0 / 6.0, 1.0 / 12.0, 0.0],
            [1.0 / 12.0, 1.0 / 3.0, 1.0 / 12.0],
            [0.0, 1.0 / 12.0, 1.0 / 6.0],
        ];
        for (row, e) in dense_rows(&m).iter().zip(&expect) {
            for (a, b) in row.iter().zip(e) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        for (a, b) in m.mul_vec(&[1.0; 3]).iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn nodal_weights_are_mass_row_sums() {
        for (dim, n) in [(1, 5), (2, 6)] {
            let mesh = Mesh::<f64>::new(dim, n).unwrap();
            let rows = assemble_mass(&mesh).row_sums();
            for (a, b) in nodal_weights(&mesh).iter().zip(&rows) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_cell_stiffness_by_hand() {
        let mesh = Mesh::new(1, 2).unwrap();
        let s = assemble_stiffness(&mesh);
        assert_eq!(
            dense_rows(&s),
            vec![vec![2.0, -2.0, 0.0], vec![-2.0, 4.0, -2.0], vec![0.0, -2.0, 2.0]]
        );
    }

    #[test]
    fn constants_in_stiffness_kernel() {
        for (dim, n) in [(1, 7), (2, 5), (2, 9)] {
            let mesh = Mesh::<f64>::new(dim, n).unwrap();
            let s = assemble_stiffness(&mesh);
            let r = s.mul_vec(&vec![1.0; mesh.num_vertices()]);
            assert!(r.iter().all(|&v| v.abs() < 1e-12), "{r:?}");
            assert!(s.is_symmetric());
        }
    }

    #[test]
    fn mass_partition_of_unity() {
        for (dim, n) in [(1, 13), (2, 6)] {
            let mesh = Mesh::<f64>::new(dim, n).unwrap();
            let m = assemble_mass(&mesh);
            let one = vec![1.0; mesh.num_vertices()];
            assert!((dot(&one, &m.mul_vec(&one)) - 1.0).abs() < 1e-12);
            assert!(m.is_symmetric());
        }
    }

    #[test]
    fn linear_function_energy_is_one() {
        for n in [2, 5, 40] {
            let mesh = Mesh::<f64>::new(1, n).unwrap();
            let s = assemble_stiffness(&mesh);
            let u: Vec<f64> = mesh.vertices().iter().map(|v| v[0]).collect();
            assert!((dot(&u, &s.mul_vec(&u)) - 1.0).abs() < 1e-12);
        }
        let mesh = Mesh::<f64>::new(2, 8).unwrap();
        let s = assemble_stiffness(&mesh);
        let u: Vec<f64> = mesh.vertices().iter().map(|v| v[0]).collect();
        assert!((dot(&u, &s.mul_vec(&u)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_mass_special_weights() {
        for (dim, n) in [(1, 9), (2, 4)] {
            let mesh = Mesh::<f64>::new(dim, n).unwrap();
            let p = mesh.num_vertices();
            let m = assemble_mass(&mesh);
            let l1 = assemble_weighted_mass(&mesh, &vec![1.0; p]).unwrap();
            assert!(l1.same_pattern(&m));
            for (a, b) in l1.values().iter().zip(m.values()) {
                assert!((a - b).abs() < 1e-14);
            }
            let l0 = assemble_weighted_mass(&mesh, &vec![0.0; p]).unwrap();
            assert!(l0.same_pattern(&m));
            assert!(l0.values().iter().all(|&v| v == 0.0));
            let c = -1.7;
            let lc = assemble_weighted_mass(&mesh, &vec![c; p]).unwrap();
            for (a, b) in lc.values().iter().zip(m.values()) {
                assert!((a - c * c * b).abs() < 1e-14);
            }
            assert!(lc.is_symmetric());
        }
    }

    #[test]
    fn rhs_vectors() {
        let mesh = Mesh::new(1, 2).unwrap();
        let m = assemble_mass(&mesh);
        let params = Params::new(0.1, 1.0, 1.0, 0.0).unwrap();
        let (f, e) = assemble_rhs::<f64>(&m, &[0.0; 3], &[0.0; 3], &params).unwrap();
        assert_eq!(f, vec![0.0; 3]);
        assert_eq!(e, vec![0.0; 3]);
        // sigma dt = 1, m = 1
        let params = Params::<f64>::new(0.1, 1.0, 1.0, 1.0).unwrap();
        let (f, _) = assemble_rhs(&m, &[1.0; 3], &[0.0; 3], &params).unwrap();
        for (a, b) in f.iter().zip([0.5, 1.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn assembly_is_bit_reproducible() {
        let mesh = Mesh::<f64>::new(2, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..mesh.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert_eq!(assemble_mass(&mesh), assemble_mass(&mesh));
        assert_eq!(assemble_stiffness(&mesh), assemble_stiffness(&mesh));
        assert_eq!(
            assemble_weighted_mass(&mesh, &u).unwrap(),
            assemble_weighted_mass(&mesh, &u).unwrap()
        );
    }

    #[test]
    fn single_precision_assembly() {
        let mesh = Mesh::<f32>::new(1, 2).unwrap();
        let m = assemble_mass(&mesh);
        let r = m.mul_vec(&[1.0f32; 3]);
        assert!((r[1] - 0.5).abs() < 1e-6);
    }
}
