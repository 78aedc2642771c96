use genlyap::linalg::C64;
use genlyap::rk::{birka_shift_list, convex_hull, prescribed_shifts_from_birka, sample_boundary, shift_ritz};
use genlyap::{direct_solve, rk_solve, variant, BenchmarkSpec};
use proptest::prelude::*;

fn inside(hull: &[C64], z: C64) -> bool {
    let m = hull.len();
    let scale = hull.iter().map(|p| p.norm()).fold(1.0, f64::max);
    (0..m).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % m]);
        (b.re - a.re) * (z.im - a.im) - (b.im - a.im) * (z.re - a.re) >= -1e-9 * scale * scale
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hull_contains_all_points(pts in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..30)) {
        let pts: Vec<C64> = pts.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let hull = convex_hull(&pts);
        if hull.len() >= 3 {
            for &p in &pts {
                prop_assert!(inside(&hull, p));
            }
            for s in sample_boundary(&hull, 40) {
                prop_assert!(inside(&hull, s));
            }
        }
    }

    #[test]
    fn prescribed_shifts_are_mirrored_and_sorted(
        pts in prop::collection::vec((-10.0..-0.1f64, -5.0..5.0f64), 1..12)
    ) {
        let eig: Vec<C64> = pts.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let s = prescribed_shifts_from_birka(&eig);
        prop_assert!(!s.is_empty());
        prop_assert!(s.iter().all(|z| z.re > 0.0 && z.im >= 0.0));
        prop_assert!(s.windows(2).all(|w| w[0].re <= w[1].re));
    }
}

#[test]
fn ritz_shift_lies_in_right_half_plane() {
    let ritz = vec![C64::new(-1.0, 0.0), C64::new(-5.0, 1.0), C64::new(-5.0, -1.0), C64::new(-20.0, 0.0)];
    let s = shift_ritz(&ritz, &[C64::new(2.0, 0.0)], 200).unwrap();
    assert!(s.re > 0.0);
}

#[test]
fn shift_driven_variants_converge_on_heat() {
    let sys = BenchmarkSpec::heat2d(6).build().unwrap();
    let x = direct_solve(&sys).unwrap();
    let f_shifts = birka_shift_list(&sys, 6, 0).unwrap();
    assert!(f_shifts.iter().all(|z| z.re > 0.0));
    for label in ['A', 'B', 'C', 'D', 'F'] {
        let shifts = (label == 'F').then_some(f_shifts.as_slice());
        let strategy = variant(label, shifts).unwrap();
        let out = rk_solve(&sys, &strategy, 1e-6, 30, Some(&x)).unwrap();
        let last = out.report.last().unwrap();
        assert!(last.dim <= 30, "{label}");
        assert!(last.rel_residual < 1e-3, "{label}: {}", last.rel_residual);
    }
}

#[test]
fn rhs_driven_variant_terminates_within_budget() {
    let sys = BenchmarkSpec::heat2d(6).build().unwrap();
    let out = rk_solve(&sys, &variant('E', None).unwrap(), 1e-6, 30, None).unwrap();
    let res: Vec<f64> = out.report.records.iter().map(|r| r.rel_residual).collect();
    assert!(out.report.last().unwrap().dim <= 30);
    assert!(res.last().unwrap() < &res[0]);
}

#[test]
fn unknown_variant_and_missing_shifts_are_errors() {
    assert!(variant('Z', None).is_err());
    assert!(variant('F', None).is_err() || variant('F', Some(&[])).is_err());
}
