use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::{nodal_weights, Mesh};
use crate::Real;

/// Random perturbation of the constant state `m`:
/// `u_i = m + amplitude * xi_i` with `xi_i` uniform on `[-1, 1]`, shifted so
/// that the discrete mean `1^T M u / 1^T M 1` equals `m`.
pub fn initial_condition<T: Real>(mesh: &Mesh<T>, m: T, amplitude: T, seed: u64) -> Result<Vec<T>> {
    if !(amplitude >= T::zero()) {
        return Err(Error::InvalidParameter("amplitude must be nonnegative".into()));
    }
    let p = mesh.num_vertices();
    if amplitude == T::zero() {
        return Ok(vec![m; p]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<T> = (0..p)
        .map(|_| m + amplitude * T::lit(rng.gen_range(-1.0..=1.0)))
        .collect();
    let w = nodal_weights(mesh);
    let volume: T = w.iter().copied().sum();
    let mean = u.iter().zip(&w).map(|(&a, &b)| a * b).sum::<T>() / volume;
    let shift = mean - m;
    u.iter_mut().for_each(|x| *x -= shift);
    Ok(u)
}
