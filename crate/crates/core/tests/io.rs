use genlyap::instances::gaussian;
use genlyap::io::{
    load_system, read_matrix_market, read_matrix_market_with_limit, save_system, write_matrix_market, Manifest,
};
use genlyap::{BenchmarkSpec, Mat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn matrix_market_round_trips(seed in any::<u64>(), r in 0usize..8, c in 0usize..8, sparse in any::<bool>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let mut m = gaussian(r, c, &mut g);
        if sparse {
            m.iter_mut().enumerate().for_each(|(i, v)| if i % 3 != 0 { *v = 0.0 });
        }
        let back = read_matrix_market(&write_matrix_market(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn reader_never_panics(text in "(%%MatrixMarket matrix (coordinate|array) real (general|symmetric)\n)?[0-9 .e\n-]{0,60}") {
        let _ = read_matrix_market_with_limit(&text, 1000);
    }

    #[test]
    fn manifest_parser_never_panics(text in "[a-z_=0-9./ \n]{0,80}") {
        let _ = Manifest::parse(&text);
    }
}

#[test]
fn malformed_inputs_are_errors() {
    for text in [
        "",
        "%%MatrixMarket matrix coordinate real general\n2 2\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
        "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 nan\n",
    ] {
        assert!(read_matrix_market(text).is_err(), "{text:?}");
    }
    let big = "%%MatrixMarket matrix array real general\n100000 100000\n";
    assert!(read_matrix_market_with_limit(big, 1000).is_err());
}

#[test]
fn symmetric_storage_is_expanded() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4.0\n2 1 -1.5\n";
    let m = read_matrix_market(text).unwrap();
    assert_eq!(m, Mat::from_row_slice(2, 2, &[4.0, -1.5, -1.5, 0.0]));
}

#[test]
fn manifest_round_trips() {
    let m = Manifest {
        n: 4,
        symmetric: true,
        a: "A.mtx".into(),
        n_files: vec!["N1.mtx".into(), "N2.mtx".into()],
        b: "B.mtx".into(),
        c: Some("C.mtx".into()),
    };
    assert_eq!(Manifest::parse(&m.render()).unwrap(), m);
}

#[test]
fn system_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let sys = BenchmarkSpec::fokker_planck(12).build().unwrap();
    let path = save_system(&sys, dir.path()).unwrap();
    let back = load_system(&path).unwrap();
    assert_eq!(back.a(), sys.a());
    assert_eq!(back.n_list(), sys.n_list());
    assert_eq!(back.b(), sys.b());
    assert_eq!(back.is_symmetric(), sys.is_symmetric());
}
