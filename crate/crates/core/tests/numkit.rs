use num_complex::Complex64 as C64;
use optocool_core::numkit::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn seeded(seed: u64, rows: usize, cols: usize) -> CMatrix {
    random_matrix(&mut ChaCha8Rng::seed_from_u64(seed), rows, cols)
}

#[test]
fn construction_rejects_bad_input() {
    assert_eq!(
        CMatrix::new(0, 2, vec![]).unwrap_err(),
        NumError::EmptyMatrix
    );
    assert!(matches!(
        CMatrix::new(2, 2, vec![c(1.0, 0.0); 3]),
        Err(NumError::DimensionMismatch { .. })
    ));
    assert_eq!(
        CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).unwrap_err(),
        NumError::NonFinite
    );
    assert_eq!(
        CMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).unwrap_err(),
        NumError::RaggedRows
    );
}

#[test]
fn solve_identity_returns_rhs() {
    let b = seeded(1, 3, 2);
    let x = solve_linear(&CMatrix::identity(3), &b).unwrap();
    assert!(x.max_abs_diff(&b) == 0.0);
}

#[test]
fn solve_diagonal() {
    let a = CMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 4.0)]);
    let b = CMatrix::new(2, 1, vec![c(2.0, 0.0), c(0.0, 4.0)]).unwrap();
    let x = solve_linear(&a, &b).unwrap();
    let want = CMatrix::new(2, 1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert!(x.max_abs_diff(&want) < 1e-15);
}

// Residual recomputed with an explicit triple loop rather than CMatrix::matmul.
fn residual_inf(a: &CMatrix, x: &CMatrix, b: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        let mut row = 0.0;
        for j in 0..b.cols() {
            let mut s = c(0.0, 0.0);
            for k in 0..a.cols() {
                s += a[(i, k)] * x[(k, j)];
            }
            row += (s - b[(i, j)]).norm();
        }
        worst = worst.max(row);
    }
    worst
}

#[test]
fn solve_random_six_by_six_residual() {
    for seed in 0..20 {
        let mut a = seeded(seed, 6, 6);
        for i in 0..6 {
            a[(i, i)] += c(3.0, 0.0);
        }
        let b = seeded(100 + seed, 6, 3);
        let x = solve_linear(&a, &b).unwrap();
        assert!(residual_inf(&a, &x, &b) <= 1e-10 * (1.0 + b.norm_inf()));
    }
}

#[test]
fn solve_reports_singular() {
    let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
    let b = CMatrix::identity(2);
    assert!(matches!(
        solve_linear(&a, &b),
        Err(NumError::SingularMatrix { .. })
    ));
    assert!(matches!(
        solve_linear(&CMatrix::zeros(2, 3), &b),
        Err(NumError::NotSquare { .. })
    ));
}

#[test]
fn solve_is_bitwise_deterministic() {
    let a = seeded(7, 8, 8);
    let b = seeded(8, 8, 2);
    let x1 = solve_linear(&a, &b).unwrap();
    let x2 = solve_linear(&a, &b).unwrap();
    assert_eq!(x1.data(), x2.data());
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn assert_spectrum(got: &[C64], want: &[C64], tol: f64) {
    let g = sorted(got.to_vec());
    let w = sorted(want.to_vec());
    assert_eq!(g.len(), w.len());
    for (x, y) in g.iter().zip(&w) {
        assert!((x - y).norm() < tol, "got {g:?}, want {w:?}");
    }
}

#[test]
fn eigenvalues_of_diagonal() {
    let a = CMatrix::from_diag(&[c(-1.0, 0.0), c(-2.0, 3.0)]);
    let e = eigenvalues(&a).unwrap();
    assert!(e.converged);
    assert_spectrum(&e.values, &[c(-1.0, 0.0), c(-2.0, 3.0)], 1e-14);
}

#[test]
fn eigenvalues_of_swap() {
    let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let e = eigenvalues(&a).unwrap();
    assert_spectrum(&e.values, &[c(1.0, 0.0), c(-1.0, 0.0)], 1e-13);
}

#[test]
fn eigenvalues_of_companion_matrix() {
    // (λ²+1)(λ²+4) = λ⁴ + 5λ² + 4
    let a = CMatrix::from_real_rows(&[
        &[0.0, -5.0, 0.0, -4.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
    .unwrap();
    let e = eigenvalues(&a).unwrap();
    assert!(e.converged);
    assert_spectrum(
        &e.values,
        &[c(0.0, 1.0), c(0.0, -1.0), c(0.0, 2.0), c(0.0, -2.0)],
        1e-10,
    );
}

#[test]
fn eigenvalues_match_jacobi_on_hermitian_input() {
    for seed in 0..10 {
        let r = seeded(seed, 7, 7);
        let h = &r + &r.adjoint();
        let qr = eigenvalues(&h).unwrap();
        let jac = hermitian_eigen(&h).unwrap();
        let mut qr_re: Vec<f64> = qr.values.iter().map(|z| z.re).collect();
        qr_re.sort_by(f64::total_cmp);
        for (x, y) in qr_re.iter().zip(&jac.values) {
            assert!((x - y).abs() < 1e-11);
        }
        assert!(qr.values.iter().all(|z| z.im.abs() < 1e-11));
    }
}

#[test]
fn eigenvalues_reject_non_square() {
    assert!(matches!(
        eigenvalues(&CMatrix::zeros(2, 3)),
        Err(NumError::NotSquare { .. })
    ));
}

#[test]
fn hermitian_eigen_residual_and_orthonormality() {
    for seed in 0..10 {
        let r = seeded(seed + 50, 6, 6);
        let h = &r + &r.adjoint();
        let eig = hermitian_eigen(&h).unwrap();
        let v = &eig.vectors;
        let hv = &h * v;
        for k in 0..6 {
            for i in 0..6 {
                assert!((hv[(i, k)] - v[(i, k)] * eig.values[k]).norm() < 1e-12);
            }
        }
        let gram = &v.adjoint() * v;
        assert!(gram.max_abs_diff(&CMatrix::identity(6)) < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn kron_examples() {
    let b = seeded(3, 2, 2);
    let k = kron(&CMatrix::identity(2), &b).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = if i / 2 == j / 2 { b[(i % 2, j % 2)] } else { c(0.0, 0.0) };
            assert_eq!(k[(i, j)], want);
        }
    }
    let d = CMatrix::from_diag(&[c(2.0, 1.0), c(-3.0, 0.5)]);
    let k = kron(&d, &CMatrix::identity(2)).unwrap();
    let want = CMatrix::from_diag(&[c(2.0, 1.0), c(2.0, 1.0), c(-3.0, 0.5), c(-3.0, 0.5)]);
    assert_eq!(k, want);
}

#[test]
fn kron_respects_dimension_cap() {
    let a = CMatrix::identity(65);
    assert!(matches!(
        kron(&a, &a),
        Err(NumError::DimensionOverflow { dim: 4225, cap: 4096 })
    ));
    assert!(kron_with_cap(&CMatrix::identity(3), &CMatrix::identity(3), 8).is_err());
}

#[test]
fn ode_scalar_fixed_point() {
    let a = CMatrix::identity(1).scale(c(-1.0, 0.0));
    let r = CMatrix::identity(1).scale(c(2.0, 0.0));
    let x = integrate_linear_ode(&a, &r, &CMatrix::zeros(1, 1), 40.0, 0.01).unwrap();
    assert!((x[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    // Identity-sized version.
    let a3 = CMatrix::identity(3).scale(c(-1.0, 0.0));
    let r3 = CMatrix::identity(3).scale(c(2.0, 0.0));
    let x3 = integrate_linear_ode(&a3, &r3, &CMatrix::zeros(3, 3), 40.0, 0.01).unwrap();
    assert!(x3.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
}

#[test]
fn ode_free_decay() {
    let a = CMatrix::identity(2).scale(c(-1.0, 0.0));
    let x0 = seeded(9, 2, 2);
    let x = integrate_linear_ode(&a, &CMatrix::zeros(2, 2), &x0, 60.0, 0.01).unwrap();
    assert!(x.max_abs() < 1e-40);
}

#[test]
fn ode_short_run_matches_exact_exponential() {
    // Scalar x' = 2a x with a = −0.3 + 0.7i: x(t) = e^{2at}.
    let av = c(-0.3, 0.7);
    let a = CMatrix::from_diag(&[av]);
    let x0 = CMatrix::identity(1);
    let x = integrate_linear_ode(&a, &CMatrix::zeros(1, 1), &x0, 2.0, 1e-3).unwrap();
    assert!((x[(0, 0)] - (av * 4.0).exp()).norm() < 1e-11);
}

#[test]
fn ode_long_run_agrees_with_direct_stepping() {
    // 8000 steps goes through the doubling path; compare against a plain loop.
    let mut a = seeded(11, 3, 3);
    for i in 0..3 {
        a[(i, i)] -= c(2.0, 0.0);
    }
    let r = seeded(12, 3, 3);
    let x0 = seeded(13, 3, 3);
    let dt = 1e-3;
    let fast = integrate_linear_ode(&a, &r, &x0, 8.0, dt).unwrap();
    let mut slow = x0.clone();
    for _ in 0..4 {
        slow = integrate_linear_ode(&a, &r, &slow, 2.0, dt).unwrap();
    }
    assert!(fast.max_abs_diff(&slow) < 1e-11 * (1.0 + slow.max_abs()));
}

#[test]
fn ode_detects_blow_up() {
    let a = CMatrix::identity(2);
    let x0 = CMatrix::identity(2);
    let err = integrate_linear_ode(&a, &CMatrix::zeros(2, 2), &x0, 100.0, 0.01).unwrap_err();
    assert!(matches!(err, NumError::BlowUp { .. }));
    let err = integrate_linear_ode(&a, &CMatrix::zeros(2, 2), &x0, 20.0, 0.01).unwrap_err();
    assert!(matches!(err, NumError::BlowUp { .. }));
}

#[test]
fn ode_rejects_bad_step() {
    let a = CMatrix::identity(1);
    assert!(matches!(
        integrate_linear_ode(&a, &a, &a, 1.0, 0.0),
        Err(NumError::InvalidArgument(_))
    ));
    assert!(default_dt(&CMatrix::identity(2).scale(c(-4.0, 0.0))) == 0.0025);
}

fn char_residual(a: &CMatrix, lambda: C64) -> f64 {
    let n = a.rows();
    let shifted = a - &CMatrix::identity(n).scale(lambda);
    determinant(&shifted).unwrap().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenvalues_satisfy_characteristic_and_trace(seed in any::<u64>(), n in 2usize..=12) {
        let a = seeded(seed, n, n);
        let e = eigenvalues(&a).unwrap();
        prop_assert!(e.converged);
        prop_assert_eq!(e.values.len(), n);
        let norm = a.norm_inf();
        for &l in &e.values {
            prop_assert!(char_residual(&a, l) <= 1e-8 * norm.powi(n as i32));
        }
        let sum: C64 = e.values.iter().sum();
        let tr = a.trace();
        prop_assert!((sum - tr).norm() <= 1e-8 * tr.norm().max(norm));
    }

    #[test]
    fn kron_vec_identity(seed in any::<u64>(), p in 1usize..4, q in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, p, p);
        let b = random_matrix(&mut rng, q, q);
        let x = random_matrix(&mut rng, q, p);
        let lhs = (&(&b * &x) * &a.transpose()).vectorize();
        let rhs = &kron(&a, &b).unwrap() * &x.vectorize();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn solve_residual_bound(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_matrix(&mut rng, n, n);
        for i in 0..n {
            a[(i, i)] += c(n as f64, 0.0);
        }
        let b = random_matrix(&mut rng, n, 2);
        let x = solve_linear(&a, &b).unwrap();
        prop_assert!(residual_inf(&a, &x, &b) <= 1e-10 * (1.0 + b.norm_inf()));
    }

    #[test]
    fn vectorize_roundtrip(seed in any::<u64>(), r in 1usize..5, k in 1usize..5) {
        let m = seeded(seed, r, k);
        prop_assert_eq!(CMatrix::unvectorize(&m.vectorize(), r, k).unwrap(), m);
    }
}
