use genlyap::instances::{random_instance, random_symmetric_instance};
use genlyap::{direct_solve, fixed_point_solve, FixedPointConfig, FixedPointMode, SolveStatus};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn converges_to_oracle() {
    let mut g = ChaCha8Rng::seed_from_u64(12);
    let sys = random_instance(15, 2, 2, 0.5, &mut g).unwrap();
    let x = direct_solve(&sys).unwrap();
    let cfg = FixedPointConfig {
        stop_tol: 1e-12,
        ..FixedPointConfig::default()
    };
    let out = fixed_point_solve(&sys, &cfg, Some(&x)).unwrap();
    assert_eq!(out.report.status, SolveStatus::Converged);
    assert!((&out.x - &x).norm() <= 1e-10 * x.norm());
    let errs: Vec<f64> = out.report.records.iter().filter_map(|r| r.rel_error).collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
}

#[test]
fn rejects_nonpositive_tolerance() {
    let mut g = ChaCha8Rng::seed_from_u64(1);
    let sys = random_instance(4, 1, 1, 0.5, &mut g).unwrap();
    let cfg = FixedPointConfig {
        stop_tol: 0.0,
        ..FixedPointConfig::default()
    };
    assert!(fixed_point_solve(&sys, &cfg, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn splitting_and_residual_forms_agree(seed in any::<u64>(), n in 2usize..12) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_symmetric_instance(n, 1, 1, 0.5, &mut g).unwrap();
        let run = |mode| {
            let cfg = FixedPointConfig { max_iters: 6, stop_tol: 1e-300, mode, keep_iterates: true, ..FixedPointConfig::default() };
            fixed_point_solve(&sys, &cfg, None).unwrap()
        };
        let a = run(FixedPointMode::Splitting);
        let b = run(FixedPointMode::ResidualForm);
        prop_assert_eq!(a.iterates.len(), b.iterates.len());
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            prop_assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm()));
        }
    }
}
