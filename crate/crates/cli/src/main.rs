use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use genlyap_cli::commands::{cmd_bench_export, cmd_oracle, cmd_solve, cmd_verify};
use genlyap_cli::verify::Mutation;
use genlyap_cli::{parse_benchmark, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "genlyap", version, about = "Generalized Lyapunov equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers on a benchmark and write CSV reports plus summary.json.
    Solve(SolveArgs),
    /// Write the reference solution and its singular values.
    Oracle(OracleArgs),
    /// Run the property suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Write a benchmark as MatrixMarket files with a manifest.
    BenchExport(ExportArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark, e.g. heat2d:nx=8 or fokker-planck:n=100,nu=1.
    #[arg(long)]
    benchmark: Option<String>,
    /// Comma-separated methods, e.g. als,birka:1-10,fixed-point,rk:A.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Skip the reference solution (no error column).
    #[arg(long)]
    no_oracle: bool,
    #[arg(long)]
    stop_tol: Option<f64>,
    #[arg(long)]
    max_dim: Option<usize>,
    /// Fill the millis column.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    als_tol: Option<f64>,
    #[arg(long)]
    als_max_inner_iters: Option<usize>,
    #[arg(long)]
    birka_tol: Option<f64>,
    #[arg(long)]
    birka_max_iters: Option<usize>,
    #[arg(long)]
    fixed_point_max_iters: Option<usize>,
    #[arg(long)]
    prescribed_order: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    benchmark: String,
    #[arg(long, default_value_t = 1024)]
    oracle_cap: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate residuals with the sign of Π flipped (mutation control).
    #[arg(long, hide = true)]
    flip_pi_sign: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    benchmark: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(b) = args.benchmark {
        cfg.benchmark = b;
    }
    if let Some(m) = args.method {
        cfg.methods = vec![m];
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = args.$f { cfg.$f = v; })* };
    }
    set!(seed, out, oracle_cap, stop_tol, max_dim, als_tol, als_max_inner_iters, birka_tol,
         birka_max_iters, fixed_point_max_iters, prescribed_order);
    if args.no_oracle {
        cfg.oracle = false;
    }
    if args.timing {
        cfg.timing = true;
    }
    let exp = cfg.validate()?;
    let summary = cmd_solve(&exp)?;
    for m in &summary.methods {
        match &m.error {
            Some(e) => eprintln!("{}: failed: {e}", m.method),
            None => println!(
                "{}: {} at dim {} with relative residual {:.3e}",
                m.method,
                m.status,
                m.final_dim.unwrap_or(0),
                m.final_rel_residual.unwrap_or(f64::NAN)
            ),
        }
    }
    match summary.failures() {
        0 => Ok(()),
        k => Err(CliError::Solver(format!("{k} method(s) failed"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Oracle(args) => {
            let spec = parse_benchmark(&args.benchmark)?;
            let f = cmd_oracle(&spec, args.oracle_cap, &args.out)?;
            println!(
                "wrote {} and {} (relative residual {:.3e})",
                f.solution.display(),
                f.singular_values.display(),
                f.rel_residual
            );
            Ok(())
        }
        Command::Verify(args) => {
            let mutation = Mutation {
                flip_pi_sign: args.flip_pi_sign,
            };
            let (checks, table) = cmd_verify(args.seed, mutation);
            print!("{table}");
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                k => Err(CliError::Property(format!("{k} check(s) failed"))),
            }
        }
        Command::BenchExport(args) => {
            let spec = parse_benchmark(&args.benchmark)?;
            let manifest = cmd_bench_export(&spec, &args.out)?;
            println!("wrote {}", manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
