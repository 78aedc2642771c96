//! Implementations of the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use genlyap::als::{als_greedy, AlsConfig, AlsMode, ChangeMeasure, GreedyOptions};
use genlyap::birka::{birka, birka_initial_basis, BirkaConfig};
use genlyap::fixed_point::{fixed_point_solve, FixedPointConfig};
use genlyap::galerkin::{galerkin_residual, project, singular_values_sym, solve_projected};
use genlyap::io::{save_system, write_matrix_market_file};
use genlyap::rk::{birka_shift_list, rk_solve, variant};
use genlyap::{
    check_contraction, direct_solve, relative_residual, BenchmarkSpec, BilinearSystem, IterationRecord, Mat,
    SolveReport, SolveStatus, SubspaceBasis,
};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, MethodSpec};
use crate::verify::{self, Check, Mutation};
use crate::CliError;

/// Per-method line of the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub file: Option<String>,
    pub status: String,
    pub records: usize,
    pub final_dim: Option<usize>,
    pub final_rel_residual: Option<f64>,
    pub final_rel_error: Option<f64>,
    pub error: Option<String>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub benchmark: String,
    pub dimension: usize,
    pub settings: ExperimentConfig,
    /// `ρ(L⁻¹Π)`, computed when the dimension is within the oracle cap.
    pub contraction: Option<f64>,
    /// Relative residual of the reference solution.
    pub oracle_rel_residual: Option<f64>,
    pub methods: Vec<MethodSummary>,
}

impl Summary {
    pub fn failures(&self) -> usize {
        self.methods.iter().filter(|m| m.error.is_some()).count()
    }
}

fn run_method(
    exp: &Experiment,
    sys: &BilinearSystem,
    method: MethodSpec,
    oracle: Option<&Mat>,
) -> genlyap::Result<SolveReport> {
    let c = &exp.config;
    match method {
        MethodSpec::Als => {
            let cfg = AlsConfig {
                tol: c.als_tol,
                max_inner_iters: c.als_max_inner_iters,
                max_outer_ranks: c.max_dim,
                change: ChangeMeasure::Absolute,
            };
            let opts = GreedyOptions {
                mode: AlsMode::Subspace,
                rel_tol: c.stop_tol,
                keep_history: false,
            };
            Ok(als_greedy(sys, &cfg, &opts, oracle)?.report)
        }
        MethodSpec::Birka { from, to } => birka_sweep(exp, sys, from, to, oracle),
        MethodSpec::FixedPoint => {
            let cfg = FixedPointConfig {
                max_iters: c.fixed_point_max_iters,
                stop_tol: c.stop_tol,
                ..FixedPointConfig::default()
            };
            Ok(fixed_point_solve(sys, &cfg, oracle)?.report)
        }
        MethodSpec::Rk(label) => {
            let shifts = if label == 'F' {
                Some(birka_shift_list(sys, c.prescribed_order, c.seed)?)
            } else {
                None
            };
            let strategy = variant(label, shifts.as_deref())?;
            Ok(rk_solve(sys, &strategy, c.stop_tol, c.max_dim, oracle)?.report)
        }
    }
}

/// BIRKA for each order, with the Galerkin solution on its right basis.
fn birka_sweep(
    exp: &Experiment,
    sys: &BilinearSystem,
    from: usize,
    to: usize,
    oracle: Option<&Mat>,
) -> genlyap::Result<SolveReport> {
    let c = &exp.config;
    let n = sys.dim();
    let scale = sys.rhs().norm();
    let xn = oracle.map(|x| x.norm());
    let mut report = SolveReport::new();
    let start = Instant::now();
    for k in from..=to.min(n) {
        let v0 = birka_initial_basis(n, k, c.seed);
        let cfg = BirkaConfig {
            k,
            tol: c.birka_tol,
            max_iters: c.birka_max_iters,
            change: ChangeMeasure::Relative,
        };
        let out = birka(sys, &v0, &v0, &cfg)?;
        let basis = SubspaceBasis::from_columns(&out.v);
        let sol = solve_projected(&project(sys, &basis)?)?;
        let res = galerkin_residual(sys, &sol)?;
        let rel_error = oracle.zip(xn).map(|(x, xn)| (x - sol.approximation()).norm() / xn);
        report.records.push(IterationRecord {
            dim: basis.k(),
            rel_residual: res.norm / scale,
            rel_error,
            shift: None,
            kept: basis.k(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        if res.norm / scale <= c.stop_tol {
            report.status = SolveStatus::Converged;
            break;
        }
    }
    Ok(report)
}

/// Runs every method of the experiment and writes one CSV per method plus
/// `summary.json`. Method failures are recorded in the summary and do not
/// stop the remaining methods.
pub fn cmd_solve(exp: &Experiment) -> Result<Summary, CliError> {
    let c = &exp.config;
    let sys = exp.benchmark.build()?;
    let n = sys.dim();
    fs::create_dir_all(&c.out)?;
    let within_cap = n <= c.oracle_cap;
    let contraction = if within_cap { Some(check_contraction(&sys)?) } else { None };
    let oracle = if c.oracle && within_cap {
        Some(direct_solve(&sys)?)
    } else {
        None
    };
    let oracle_rel_residual = match &oracle {
        Some(x) => Some(relative_residual(&sys, x)?),
        None => None,
    };
    let mut methods = Vec::new();
    for &m in &exp.methods {
        let summary = match run_method(exp, &sys, m, oracle.as_ref()) {
            Ok(report) => {
                let file = format!("{}.csv", m.file_stem());
                fs::write(c.out.join(&file), report.to_csv(c.timing))?;
                let last = report.last();
                MethodSummary {
                    method: m.to_string(),
                    file: Some(file),
                    status: report.status.as_str().into(),
                    records: report.records.len(),
                    final_dim: last.map(|r| r.dim),
                    final_rel_residual: last.map(|r| r.rel_residual),
                    final_rel_error: last.and_then(|r| r.rel_error),
                    error: None,
                }
            }
            Err(e) => MethodSummary {
                method: m.to_string(),
                file: None,
                status: "failed".into(),
                records: 0,
                final_dim: None,
                final_rel_residual: None,
                final_rel_error: None,
                error: Some(e.to_string()),
            },
        };
        methods.push(summary);
    }
    let summary = Summary {
        benchmark: exp.benchmark.to_string(),
        dimension: n,
        settings: c.clone(),
        contraction,
        oracle_rel_residual,
        methods,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(c.out.join("summary.json"), json + "\n")?;
    Ok(summary)
}

/// Files written by [`cmd_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleFiles {
    pub solution: PathBuf,
    pub singular_values: PathBuf,
    pub rel_residual: f64,
}

/// Writes the reference solution `X.mtx` and `singular_values.csv` with
/// columns `k,sigma,svd_rel_error`, where `svd_rel_error` is the relative
/// error of the best rank-`k` approximation.
pub fn cmd_oracle(spec: &BenchmarkSpec, cap: usize, out: &Path) -> Result<OracleFiles, CliError> {
    let n = spec.dimension();
    if n > cap {
        return Err(CliError::Solver(format!(
            "dimension {n} exceeds the oracle cap {cap}"
        )));
    }
    let sys = spec.build()?;
    let x = direct_solve(&sys)?;
    let rel_residual = relative_residual(&sys, &x)?;
    fs::create_dir_all(out)?;
    let solution = out.join("X.mtx");
    write_matrix_market_file(&solution, &x)?;
    let sv = singular_values_sym(&x);
    // tails[k] = Σ_{j≥k} σⱼ², summed from the small end for accuracy
    let mut tails = vec![0.0; sv.len() + 1];
    for i in (0..sv.len()).rev() {
        tails[i] = tails[i + 1] + sv[i] * sv[i];
    }
    let total = tails[0];
    let mut csv = String::from("k,sigma,svd_rel_error\n");
    for (i, s) in sv.iter().enumerate() {
        let err = if total > 0.0 { (tails[i + 1] / total).sqrt() } else { 0.0 };
        let _ = writeln!(csv, "{},{:e},{:e}", i + 1, s, err);
    }
    let singular_values = out.join("singular_values.csv");
    fs::write(&singular_values, csv)?;
    Ok(OracleFiles {
        solution,
        singular_values,
        rel_residual,
    })
}

/// Writes the benchmark as MatrixMarket files with a manifest.
pub fn cmd_bench_export(spec: &BenchmarkSpec, out: &Path) -> Result<PathBuf, CliError> {
    let sys = spec.build()?;
    Ok(save_system(&sys, out)?)
}

/// Runs the property suite and renders the pass/fail table.
pub fn cmd_verify(seed: u64, mutation: Mutation) -> (Vec<Check>, String) {
    let checks = verify::suite(seed, mutation);
    (checks.clone(), render_table(&checks))
}

pub fn render_table(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(s, "{} checks, {} failed", checks.len(), failed);
    s
}
