//! Experiment configuration and the method-list syntax.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use genlyap::BenchmarkSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One solver entry of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    /// Greedy ALS in subspace mode.
    Als,
    /// BIRKA for every reduced order in `from..=to`.
    Birka { from: usize, to: usize },
    FixedPoint,
    /// Rational Krylov variant `A`–`F`.
    Rk(char),
}

impl MethodSpec {
    /// File stem used for the method's CSV.
    pub fn file_stem(&self) -> String {
        match self {
            Self::Als => "als".into(),
            Self::Birka { .. } => "birka".into(),
            Self::FixedPoint => "fixed-point".into(),
            Self::Rk(c) => format!("rk-{c}"),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Als => write!(f, "als"),
            Self::Birka { from, to } if from == to => write!(f, "birka:{from}"),
            Self::Birka { from, to } => write!(f, "birka:{from}-{to}"),
            Self::FixedPoint => write!(f, "fixed-point"),
            Self::Rk(c) => write!(f, "rk:{c}"),
        }
    }
}

/// Parses `als`, `birka:K`, `birka:K1-K2`, `fixed-point` and `rk:X` with
/// `X` in `A`–`F`.
impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |m: String| CliError::Usage(m);
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("als", None) => Ok(Self::Als),
            ("fixed-point" | "fixed_point" | "fp", None) => Ok(Self::FixedPoint),
            ("birka", Some(a)) => {
                let parse = |t: &str| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| bad(format!("invalid BIRKA order '{t}'")))
                };
                let (from, to) = match a.split_once('-') {
                    Some((x, y)) => (parse(x)?, parse(y)?),
                    None => {
                        let k = parse(a)?;
                        (k, k)
                    }
                };
                if from == 0 || to < from {
                    return Err(bad(format!("invalid BIRKA range '{a}'")));
                }
                Ok(Self::Birka { from, to })
            }
            ("rk", Some(a)) => {
                let mut chars = a.chars();
                match (chars.next().map(|c| c.to_ascii_uppercase()), chars.next()) {
                    (Some(c @ 'A'..='F'), None) => Ok(Self::Rk(c)),
                    _ => Err(bad(format!("unknown rational Krylov variant '{a}'"))),
                }
            }
            ("birka" | "rk", None) => Err(bad(format!("method '{name}' needs an argument"))),
            (_, Some(_)) if matches!(name, "als" | "fixed-point" | "fixed_point" | "fp") => {
                Err(bad(format!("method '{name}' takes no argument")))
            }
            _ => Err(bad(format!("unknown method '{s}'"))),
        }
    }
}

/// Comma-separated list of [`MethodSpec`]s; empty lists and duplicates are
/// rejected.
pub fn parse_method_list(s: &str) -> Result<Vec<MethodSpec>, CliError> {
    let mut out: Vec<MethodSpec> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: MethodSpec = part.parse()?;
        if out.iter().any(|q| q.file_stem() == m.file_stem()) {
            return Err(CliError::Usage(format!("method '{part}' listed twice")));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(CliError::Usage("at least one method is required".into()));
    }
    Ok(out)
}

pub fn parse_benchmark(s: &str) -> Result<BenchmarkSpec, CliError> {
    s.parse().map_err(|e: genlyap::Error| CliError::Usage(e.to_string()))
}

/// JSON experiment description. Every field has a command-line flag of the
/// same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Benchmark in `NAME:key=value,...` form.
    pub benchmark: String,
    /// Methods in the syntax of [`parse_method_list`].
    pub methods: Vec<String>,
    /// Compute the dense reference solution for error curves.
    pub oracle: bool,
    /// Largest dimension for which the reference solution is computed.
    pub oracle_cap: usize,
    pub out: PathBuf,
    pub seed: u64,
    /// Relative residual at which subspace methods stop.
    pub stop_tol: f64,
    /// Largest subspace dimension (rank for ALS).
    pub max_dim: usize,
    /// Fill the `millis` column. Off by default so output is reproducible.
    pub timing: bool,
    pub als_tol: f64,
    pub als_max_inner_iters: usize,
    pub birka_tol: f64,
    pub birka_max_iters: usize,
    pub fixed_point_max_iters: usize,
    /// Order of the BIRKA run that supplies the shifts of variant F.
    pub prescribed_order: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            benchmark: "heat2d:nx=8".into(),
            methods: Vec::new(),
            oracle: true,
            oracle_cap: 1024,
            out: PathBuf::from("out"),
            seed: 0,
            stop_tol: 1e-8,
            max_dim: 60,
            timing: false,
            als_tol: 1e-2,
            als_max_inner_iters: 20,
            birka_tol: 1e-3,
            birka_max_iters: 100,
            fixed_point_max_iters: 200,
            prescribed_order: 10,
        }
    }
}

/// Validated form of [`ExperimentConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub benchmark: BenchmarkSpec,
    pub methods: Vec<MethodSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn validate(self) -> Result<Experiment, CliError> {
        let benchmark = parse_benchmark(&self.benchmark)?;
        let methods = parse_method_list(&self.methods.join(","))?;
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{what} must be positive")))
            }
        };
        positive(self.stop_tol, "stop_tol")?;
        positive(self.als_tol, "als_tol")?;
        positive(self.birka_tol, "birka_tol")?;
        if self.max_dim == 0 || self.als_max_inner_iters == 0 || self.birka_max_iters == 0 {
            return Err(CliError::Usage(
                "max_dim and iteration limits must be positive".into(),
            ));
        }
        if self.prescribed_order == 0 {
            return Err(CliError::Usage("prescribed_order must be positive".into()));
        }
        Ok(Experiment {
            config: self,
            benchmark,
            methods,
        })
    }
}
