use genlyap::instances::{random_instance, random_symmetric_instance};
use genlyap::linalg::{is_symmetric, min_eig_sym};
use genlyap::{
    check_contraction, direct_solve, direct_solve_with, h2_norm_squared, relative_residual, BilinearSystem,
    DirectOptions, Error, Mat,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn scalar_equation_is_exact() {
    // 2aX + n²X + b² = 0 with a = −1, n = 1, b = 1 gives X = 1
    let sys = BilinearSystem::new(
        Mat::from_element(1, 1, -1.0),
        vec![Mat::from_element(1, 1, 1.0)],
        Mat::from_element(1, 1, 1.0),
    )
    .unwrap();
    let x = direct_solve(&sys).unwrap();
    assert!((x[(0, 0)] - 1.0).abs() < 1e-14);
    assert!((check_contraction(&sys).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn kronecker_and_iterative_paths_agree() {
    let mut g = ChaCha8Rng::seed_from_u64(11);
    let sys = random_instance(30, 2, 2, 0.6, &mut g).unwrap();
    let dense = direct_solve_with(
        &sys,
        &DirectOptions {
            kron_max: 30,
            ..DirectOptions::default()
        },
    )
    .unwrap();
    let iterative = direct_solve_with(
        &sys,
        &DirectOptions {
            kron_max: 10,
            ..DirectOptions::default()
        },
    )
    .unwrap();
    assert!((&dense - &iterative).norm() <= 1e-8 * dense.norm());
    assert!(relative_residual(&sys, &iterative).unwrap() <= 1e-10);
}

#[test]
fn symmetric_instances_give_psd_solutions() {
    let mut g = ChaCha8Rng::seed_from_u64(5);
    for n in [3, 8, 20, 40] {
        let sys = random_symmetric_instance(n, 1, 2, 0.7, &mut g).unwrap();
        let x = direct_solve(&sys).unwrap();
        assert!(is_symmetric(&x, 1e-12));
        assert!(min_eig_sym(&x) >= -1e-10 * x.norm());
        assert!(relative_residual(&sys, &x).unwrap() <= 1e-10);
    }
}

#[test]
fn cap_is_enforced() {
    let mut g = ChaCha8Rng::seed_from_u64(1);
    let sys = random_instance(12, 1, 1, 0.5, &mut g).unwrap();
    let opts = DirectOptions {
        cap: 10,
        ..DirectOptions::default()
    };
    assert!(matches!(direct_solve_with(&sys, &opts), Err(Error::CapExceeded { n: 12, cap: 10 })));
}

#[test]
fn unstable_system_is_rejected() {
    let sys = BilinearSystem::new(Mat::identity(3, 3), vec![Mat::zeros(3, 3)], Mat::from_element(3, 1, 1.0)).unwrap();
    assert!(matches!(check_contraction(&sys), Err(Error::Unstable(m)) if m > 0.0));
}

#[test]
fn contraction_matches_instance_target() {
    let mut g = ChaCha8Rng::seed_from_u64(9);
    for target in [0.2, 0.5, 0.9] {
        let sys = random_instance(10, 2, 1, target, &mut g).unwrap();
        assert!((check_contraction(&sys).unwrap() - target).abs() < 1e-6);
    }
}

#[test]
fn h2_norm_is_positive_and_consistent() {
    let mut g = ChaCha8Rng::seed_from_u64(2);
    let sys = random_symmetric_instance(10, 1, 1, 0.5, &mut g).unwrap();
    let h2 = h2_norm_squared(&sys).unwrap();
    let x = direct_solve(&sys).unwrap();
    let c = sys.c();
    assert!(h2 > 0.0);
    assert!(((&*c * &x * c.transpose()).trace() - h2).abs() <= 1e-8 * h2);
}
