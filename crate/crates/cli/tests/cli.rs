use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use genlyap::io::{load_system, read_matrix_market_file};
use genlyap::{relative_residual, BenchmarkSpec};
use genlyap_cli::verify::{psd_residual_chain, Mutation};

fn genlyap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genlyap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn solve_als_heat_writes_monotone_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = genlyap(&["solve", "--benchmark", "heat2d:nx=8", "--method", "als", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(files.iter().filter(|f| f.ends_with(".csv")).count(), 1);
    let csv = fs::read_to_string(dir.path().join("als.csv")).unwrap();
    assert!(csv.starts_with("dim,rel_residual,rel_error,shift_re,shift_im,kept,millis\n"));
    let res: Vec<f64> = column(&csv, "rel_residual").iter().map(|s| s.parse().unwrap()).collect();
    assert!(res.len() > 2);
    assert!(res.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{res:?}");
    assert!(column(&csv, "rel_error").iter().all(|s| !s.is_empty()));
    assert!(column(&csv, "millis").iter().all(|s| s.is_empty()));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["dimension"], 64);
    assert!(summary["contraction"].as_f64().unwrap() < 1.0);
    assert!(summary["oracle_rel_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn same_seed_gives_identical_files() {
    let run = |dir: &Path| {
        let o = genlyap(&[
            "solve",
            "--benchmark",
            "heat2d:nx=6",
            "--method",
            "als,birka:1-3,fixed-point,rk:A,rk:F",
            "--seed",
            "7",
            "--max-dim",
            "12",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path());
    run(b.path());
    for f in ["als.csv", "birka.csv", "fixed-point.csv", "rk-A.csv", "rk-F.csv", "summary.json"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        if f == "summary.json" {
            // settings echo contains the output directory
            let strip = |v: Vec<u8>| {
                let mut j: serde_json::Value = serde_json::from_slice(&v).unwrap();
                j["settings"]["out"] = serde_json::Value::Null;
                j
            };
            assert_eq!(strip(x), strip(y));
        } else {
            assert_eq!(x, y, "{f} differs");
        }
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            r#"{{"benchmark": "fp:n=40", "methods": ["rk:C"], "max_dim": 15, "out": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = genlyap(&["solve", "--config", cfg.to_str().unwrap(), "--method", "rk:D"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("rk-D.csv").exists());
    assert!(!out.join("rk-C.csv").exists());
    let dims: Vec<usize> = column(&fs::read_to_string(out.join("rk-D.csv")).unwrap(), "dim")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(*dims.last().unwrap() <= 15);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["solve", "--method", "", "--out", out],
        vec!["solve", "--method", "rk:Z", "--out", out],
        vec!["solve", "--benchmark", "heat2d:nx=2", "--method", "als", "--out", out],
        vec!["solve", "--benchmark", "wave:n=3", "--method", "als", "--out", out],
        vec!["frobnicate"],
    ] {
        let o = genlyap(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn oracle_writes_solution_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = genlyap(&["oracle", "--benchmark", "heat2d:nx=4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_matrix_market_file(&dir.path().join("X.mtx")).unwrap();
    let sys = BenchmarkSpec::heat2d(4).build().unwrap();
    assert!(relative_residual(&sys, &x).unwrap() <= 1e-10);
    let csv = fs::read_to_string(dir.path().join("singular_values.csv")).unwrap();
    let sigma: Vec<f64> = column(&csv, "sigma").iter().map(|s| s.parse().unwrap()).collect();
    let err: Vec<f64> = column(&csv, "svd_rel_error").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(sigma.len(), 16);
    assert!(sigma.windows(2).all(|w| w[1] <= w[0]));
    assert!(err.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*err.last().unwrap(), 0.0);
}

#[test]
fn oracle_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let o = genlyap(&[
        "oracle",
        "--benchmark",
        "heat2d:nx=8",
        "--oracle-cap",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = genlyap(&["bench-export", "--benchmark", "burgers:n=5", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let loaded = load_system(&dir.path().join("manifest.txt")).unwrap();
    let built = BenchmarkSpec::burgers(5).build().unwrap();
    assert_eq!(loaded.dim(), 30);
    assert_eq!(loaded.a(), built.a());
    assert_eq!(loaded.n_list(), built.n_list());
    assert_eq!(loaded.b(), built.b());
}

#[test]
fn flipped_pi_sign_breaks_psd_chain() {
    assert!(psd_residual_chain(0, 3, Mutation::default()).passed);
    let flipped = psd_residual_chain(0, 3, Mutation { flip_pi_sign: true });
    assert!(!flipped.passed, "{}", flipped.detail);
}
