use genlyap::als::{als_objective, ChangeMeasure};
use genlyap::instances::random_symmetric_instance;
use genlyap::{als_greedy, als_rank1, AlsConfig, AlsMode, BilinearSystem, GreedyOptions, Mat};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn scalar_rank_one_is_exact() {
    // X = 1 for a = −1, n = 1, b = 1
    let sys = BilinearSystem::new_symmetric(
        Mat::from_element(1, 1, -1.0),
        vec![Mat::from_element(1, 1, 1.0)],
        Mat::from_element(1, 1, 1.0),
    )
    .unwrap();
    let v0 = DVector::from_element(1, 0.3);
    let out = als_rank1(&sys, &sys.rhs(), &v0, &v0, &AlsConfig::default()).unwrap();
    assert!((out.v[0] * out.w[0] - 1.0).abs() < 1e-12);
}

#[test]
fn greedy_residuals_decrease() {
    let mut g = ChaCha8Rng::seed_from_u64(4);
    let sys = random_symmetric_instance(20, 1, 1, 0.5, &mut g).unwrap();
    for mode in [AlsMode::RankOne, AlsMode::Subspace] {
        let cfg = AlsConfig {
            max_outer_ranks: 15,
            ..AlsConfig::default()
        };
        let opts = GreedyOptions {
            mode,
            rel_tol: 1e-10,
            keep_history: false,
        };
        let out = als_greedy(&sys, &cfg, &opts, None).unwrap();
        let res: Vec<f64> = out.report.records.iter().map(|r| r.rel_residual).collect();
        assert!(res.len() > 2);
        if mode == AlsMode::Subspace {
            assert!(res.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)), "{res:?}");
        }
        assert!(res.last().unwrap() < &res[0]);
    }
}

#[test]
fn symmetric_start_keeps_factors_equal() {
    let mut g = ChaCha8Rng::seed_from_u64(8);
    let sys = random_symmetric_instance(12, 1, 1, 0.5, &mut g).unwrap();
    let v0 = DVector::from_fn(12, |i, _| 1.0 + i as f64);
    let out = als_rank1(&sys, &sys.rhs(), &v0, &v0, &AlsConfig::default()).unwrap();
    assert!(out.symmetric_sweeps);
    assert!((&out.v - &out.w).norm() <= 1e-12 * out.v.norm());
    let j = als_objective(&sys, &sys.rhs(), &out.v, &out.w).unwrap();
    assert!(j.is_finite());
}

#[test]
fn invalid_arguments_are_rejected() {
    let mut g = ChaCha8Rng::seed_from_u64(1);
    let sys = random_symmetric_instance(5, 1, 1, 0.5, &mut g).unwrap();
    let zero = DVector::zeros(5);
    assert!(als_rank1(&sys, &sys.rhs(), &zero, &zero, &AlsConfig::default()).is_err());
    let short = DVector::from_element(4, 1.0);
    assert!(als_rank1(&sys, &sys.rhs(), &short, &short, &AlsConfig::default()).is_err());
    let bad = AlsConfig {
        tol: -1.0,
        change: ChangeMeasure::Absolute,
        ..AlsConfig::default()
    };
    assert!(bad.validate().is_err());
}
