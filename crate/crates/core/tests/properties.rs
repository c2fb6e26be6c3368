use approx::assert_relative_eq;
use proptest::prelude::*;

use okpc::fem::{assemble_mass, assemble_stiffness, assemble_weighted_mass, nodal_weights, Mesh};
use okpc::la::{gmres, CsrMatrix, DenseMatrix, GmresOptions, LinearOperator};
use okpc::precond::NeumannInverse;
use okpc::la::InnerSolverKind;
use okpc::scheme::{initial_condition, BlockForm, BlockOperator, Discretization, Params};

fn quad(a: &CsrMatrix<f64>, v: &[f64]) -> f64 {
    a.mul_vec(v).iter().zip(v).map(|(x, y)| x * y).sum()
}

fn mesh_strategy() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![(Just(1usize), 2usize..40), (Just(2usize), 2usize..8)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_is_symmetric_with_unit_total((dim, n) in mesh_strategy()) {
        let mesh = Mesh::<f64>::new(dim, n).unwrap();
        let m = assemble_mass(&mesh);
        let d = m.to_dense();
        prop_assert!(d.sub(&d.transpose()).max_abs() < 1e-15);
        let total: f64 = m.values().iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        let w = nodal_weights(&mesh);
        for (a, b) in m.row_sums().iter().zip(&w) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn stiffness_kernel_and_semidefinite(
        (dim, n) in mesh_strategy(),
        seed in any::<u64>(),
    ) {
        let mesh = Mesh::<f64>::new(dim, n).unwrap();
        let s = assemble_stiffness(&mesh);
        let ones = vec![1.0; mesh.num_vertices()];
        prop_assert!(s.mul_vec(&ones).iter().all(|v| v.abs() < 1e-11));
        let v = initial_condition(&mesh, 0.0, 1.0, seed).unwrap();
        prop_assert!(quad(&s, &v) >= -1e-12);
    }

    #[test]
    fn weighted_mass_bounded_by_sup_norm(
        (dim, n) in mesh_strategy(),
        seed in any::<u64>(),
        amp in 0.0f64..2.0,
        m in -0.5f64..0.5,
    ) {
        let mesh = Mesh::<f64>::new(dim, n).unwrap();
        let u = initial_condition(&mesh, m, amp, seed).unwrap();
        let v = initial_condition(&mesh, 0.1, 1.0, seed.wrapping_add(1)).unwrap();
        let l = assemble_weighted_mass(&mesh, &u).unwrap();
        let mass = assemble_mass(&mesh);
        let sup = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let lv = quad(&l, &v);
        prop_assert!(lv >= -1e-14);
        prop_assert!(lv <= sup * sup * quad(&mass, &v) * (1.0 + 1e-12) + 1e-15);
        prop_assert!(l.same_pattern(&mass));
    }

    #[test]
    fn weighted_mass_of_constant(c in -2.0f64..2.0, n in 2usize..30) {
        let mesh = Mesh::<f64>::new(1, n).unwrap();
        let l = assemble_weighted_mass(&mesh, &vec![c; n + 1]).unwrap();
        let m = assemble_mass(&mesh).scaled(c * c);
        prop_assert!(l.to_dense().sub(&m.to_dense()).max_abs() < 1e-14);
    }

    #[test]
    fn initial_condition_mean_is_exact(
        (dim, n) in mesh_strategy(),
        m in -0.9f64..0.9,
        amp in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let disc = Discretization::<f64>::uniform(dim, n).unwrap();
        let u = initial_condition(disc.mesh(), m, amp, seed).unwrap();
        prop_assert!((disc.mean(&u) - m).abs() < 1e-13);
        prop_assert_eq!(u.clone(), initial_condition(disc.mesh(), m, amp, seed).unwrap());
    }

    #[test]
    fn block_operator_is_linear(
        n in 2usize..20,
        seed in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let disc = Discretization::<f64>::uniform(1, n).unwrap();
        let u = initial_condition(disc.mesh(), 0.0, 0.8, seed).unwrap();
        let l = assemble_weighted_mass(disc.mesh(), &u).unwrap();
        let params = Params::new(0.1, 50.0, 0.01, 0.0).unwrap();
        let p = disc.p();
        let x = initial_condition(&Mesh::new(1, 2 * p - 1).unwrap(), 0.0, 1.0, 3).unwrap();
        let y = initial_condition(&Mesh::new(1, 2 * p - 1).unwrap(), 0.2, 1.0, 4).unwrap();
        for form in [BlockForm::Full, BlockForm::Scaled, BlockForm::Saddle] {
            let op = BlockOperator::new(form, disc.mass(), disc.stiffness(), &l, &params).unwrap();
            let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = op.apply_vec(&comb).unwrap();
            let ox = op.apply_vec(&x).unwrap();
            let oy = op.apply_vec(&y).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs[i] - (a * ox[i] + b * oy[i])).abs() < 1e-10 * (1.0 + lhs[i].abs()));
            }
        }
    }

    #[test]
    fn all_block_forms_share_the_solution(n in 2usize..12, seed in any::<u64>()) {
        let disc = Discretization::<f64>::uniform(1, n).unwrap();
        let u = initial_condition(disc.mesh(), 0.1, 0.5, seed).unwrap();
        let l = assemble_weighted_mass(disc.mesh(), &u).unwrap();
        let params = Params::new(0.1, 30.0, 0.01, 0.1).unwrap();
        let (f, e) = okpc::fem::assemble_rhs(disc.mass(), &u, &u, &params).unwrap();
        let mut sols = Vec::new();
        for form in [BlockForm::Full, BlockForm::Scaled, BlockForm::Saddle] {
            let op = BlockOperator::new(form, disc.mass(), disc.stiffness(), &l, &params).unwrap();
            let (x, rep) = gmres(&op, &form.rhs(&f, &e, &params), None, &GmresOptions::default()).unwrap();
            prop_assert!(rep.converged);
            sols.push(x);
        }
        for s in &sols[1..] {
            for (a, b) in s.iter().zip(&sols[0]) {
                prop_assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn csr_products_match_dense(n in 2usize..15, seed in any::<u64>()) {
        let mesh = Mesh::<f64>::new(1, n).unwrap();
        let u = initial_condition(&mesh, 0.0, 1.0, seed).unwrap();
        let a = assemble_weighted_mass(&mesh, &u).unwrap();
        let b = assemble_stiffness(&mesh);
        let prod = a.matmul(&b).unwrap().to_dense();
        prop_assert!(prod.sub(&a.to_dense().matmul(&b.to_dense())).max_abs() < 1e-12);
        let lc = CsrMatrix::lincomb(2.0, &a, -0.5, &b).unwrap().to_dense();
        prop_assert!(lc.sub(&a.to_dense().scaled(2.0).sub(&b.to_dense().scaled(0.5))).max_abs() < 1e-12);
        prop_assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn neumann_residual_is_power_of_g(depth in 1usize..7, seed in any::<u64>()) {
        let mesh = Mesh::<f64>::new(1, 4).unwrap();
        let u = initial_condition(&mesh, 0.0, 0.9, seed).unwrap();
        let s = assemble_stiffness(&mesh);
        let l = assemble_weighted_mass(&mesh, &u).unwrap();
        let eps = 0.3;
        let eps_tilde = 0.5;
        let inv = NeumannInverse::static_with_depth(&s, &l, eps, eps_tilde, depth, InnerSolverKind::Cholesky, 1e-14).unwrap();
        let a = CsrMatrix::lincomb(eps * eps, &s, 1.0, &l).unwrap().to_dense();
        let p = s.scaled(eps * eps).to_dense().add(&DenseMatrix::identity(5).scaled(eps_tilde));
        let q = DenseMatrix::identity(5).scaled(eps_tilde).sub(&l.to_dense());
        let g = p.inverse().unwrap().matmul(&q);
        let pd_a = okpc::diagnostics::materialize_product(&a, Some(&inv as &dyn LinearOperator<f64>)).unwrap();
        let expected = DenseMatrix::identity(5).sub(&g.pow(depth));
        prop_assert!(pd_a.sub(&expected).frobenius_norm() < 1e-12);
    }
}

#[test]
fn f32_and_f64_assembly_agree() {
    let m32 = assemble_mass(&Mesh::<f32>::new(2, 6).unwrap());
    let m64 = assemble_mass(&Mesh::<f64>::new(2, 6).unwrap());
    for (a, b) in m32.values().iter().zip(m64.values()) {
        assert_relative_eq!(*a as f64, *b, max_relative = 1e-6);
    }
}
