use genlyap::instances::gaussian;
use genlyap::linalg::{orth, svd_thin};
use genlyap::Mat;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn thin_svd_is_valid_on_rank_deficient_input(
        seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12, rank in 0usize..4
    ) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let r = rank.min(rows).min(cols);
        let m: Mat = gaussian(rows, r, &mut g) * gaussian(r, cols, &mut g);
        let svd = svd_thin(&m);
        let p = rows.min(cols);
        prop_assert_eq!(svd.s.len(), p);
        prop_assert!(svd.s.iter().zip(svd.s.iter().skip(1)).all(|(a, b)| a >= b));
        prop_assert!((svd.recompose() - &m).norm() <= 1e-10 * (1.0 + m.norm()));
        prop_assert!((svd.u.transpose() * &svd.u - Mat::identity(p, p)).norm() <= 1e-10);
        prop_assert!((&svd.vt * svd.vt.transpose() - Mat::identity(p, p)).norm() <= 1e-10);
    }

    #[test]
    fn orth_spans_input(seed in any::<u64>(), rows in 2usize..12, rank in 1usize..4) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let r = rank.min(rows);
        let m: Mat = gaussian(rows, r, &mut g) * gaussian(r, 5, &mut g);
        let q = orth(&m, 1e-12);
        prop_assert_eq!(q.ncols(), r);
        let proj = &q * (q.transpose() * &m);
        prop_assert!((proj - &m).norm() <= 1e-10 * m.norm());
    }
}
