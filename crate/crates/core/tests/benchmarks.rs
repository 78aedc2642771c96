use genlyap::{check_contraction, BenchmarkSpec};
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = BenchmarkSpec> {
    prop_oneof![
        (3usize..200).prop_map(BenchmarkSpec::heat2d),
        (10usize..500, 0.01..10.0f64).prop_map(|(n, nu)| BenchmarkSpec::FokkerPlanck1D { n, nu }),
        (5usize..100, 0.01..1.0f64, 0.01..1.0f64)
            .prop_map(|(n_grid, nu, alpha)| BenchmarkSpec::BurgersCarleman { n_grid, nu, alpha }),
    ]
}

proptest! {
    #[test]
    fn display_round_trips(s in spec()) {
        let back: BenchmarkSpec = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn parser_never_panics(text in ".{0,40}") {
        let _ = text.parse::<BenchmarkSpec>();
    }
}

#[test]
fn dimension_matches_build() {
    for s in [
        BenchmarkSpec::heat2d(5),
        BenchmarkSpec::fokker_planck(30),
        BenchmarkSpec::burgers(6),
    ] {
        assert_eq!(s.build().unwrap().dim(), s.dimension(), "{s}");
    }
    assert_eq!(BenchmarkSpec::burgers(71).dimension(), 5112);
}

#[test]
fn heat_control_acts_on_boundary_only() {
    let nx = 5;
    let sys = BenchmarkSpec::heat2d(nx).build().unwrap();
    assert!(sys.is_symmetric());
    let n = &sys.n_list()[0];
    for r in 0..nx * nx {
        let boundary = r % nx == 0;
        assert_eq!(n[(r, r)] != 0.0, boundary, "row {r}");
        assert_eq!(sys.b()[(r, 0)] != 0.0, boundary, "row {r}");
    }
    assert_eq!(n.iter().filter(|v| **v != 0.0).count(), nx);
}

#[test]
fn benchmarks_are_contractive() {
    for s in [
        BenchmarkSpec::heat2d(6),
        BenchmarkSpec::fokker_planck(40),
        BenchmarkSpec::burgers(5),
    ] {
        let rho = check_contraction(&s.build().unwrap()).unwrap();
        assert!(rho < 1.0, "{s}: {rho}");
    }
}

#[test]
fn invalid_specs_are_rejected() {
    for text in ["heat2d:nx=2", "fokker-planck:n=5", "burgers:n=3", "heat2d:nx=4,nx=5", "wave", "heat2d:nx=-1"] {
        assert!(text.parse::<BenchmarkSpec>().and_then(|s| s.validate()).is_err(), "{text}");
    }
}
