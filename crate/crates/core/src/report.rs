//! Per-iteration solver logs and their CSV form.

use std::fmt::Write as _;
use std::time::Instant;

use crate::linalg::{Mat, C64};

/// One row of a [`SolveReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Subspace dimension (rank for greedy methods, step for fixed point).
    pub dim: usize,
    /// `‖R‖_F / ‖BBᵀ‖_F`.
    pub rel_residual: f64,
    /// `‖X − X̂‖_F / ‖X‖_F` when a reference solution is known.
    pub rel_error: Option<f64>,
    /// Shift that produced the latest expansion.
    pub shift: Option<C64>,
    /// Columns kept in the latest expansion.
    pub kept: usize,
    /// Wall time since the start of the solve.
    pub millis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Residual tolerance met.
    Converged,
    /// Dimension or iteration budget exhausted first.
    BudgetExhausted,
    /// The basis could not be extended (no column survived orthogonalization).
    Stagnated,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::BudgetExhausted => "budget-exhausted",
            SolveStatus::Stagnated => "stagnated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
}

pub const CSV_HEADER: &str = "dim,rel_residual,rel_error,shift_re,shift_im,kept,millis";

impl SolveReport {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            status: SolveStatus::BudgetExhausted,
        }
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn final_rel_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.rel_residual)
    }

    /// CSV with the fixed header. With `timing = false` the `millis` column
    /// is left empty so that output is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:e},{},{},{},{},{}",
                r.dim,
                r.rel_residual,
                opt(r.rel_error),
                opt(r.shift.map(|z| z.re)),
                opt(r.shift.map(|z| z.im)),
                r.kept,
                if timing { format!("{:.3}", r.millis) } else { String::new() }
            );
        }
        s
    }
}

impl Default for SolveReport {
    fn default() -> Self {
        Self::new()
    }
}

/// Helper that stamps records with elapsed time and errors against an
/// optional reference solution.
pub(crate) struct Recorder<'a> {
    start: Instant,
    oracle: Option<&'a Mat>,
    oracle_norm: f64,
    pub report: SolveReport,
}

impl<'a> Recorder<'a> {
    pub fn new(oracle: Option<&'a Mat>) -> Self {
        Self {
            start: Instant::now(),
            oracle,
            oracle_norm: oracle.map_or(0.0, |x| x.norm()),
            report: SolveReport::new(),
        }
    }

    pub fn rel_error(&self, xhat: impl FnOnce() -> Mat) -> Option<f64> {
        self.oracle.map(|x| {
            let e = (x - xhat()).norm();
            if self.oracle_norm > 0.0 {
                e / self.oracle_norm
            } else {
                e
            }
        })
    }

    pub fn push(
        &mut self,
        dim: usize,
        rel_residual: f64,
        rel_error: Option<f64>,
        shift: Option<C64>,
        kept: usize,
    ) {
        let millis = self.start.elapsed().as_secs_f64() * 1e3;
        self.report.records.push(IterationRecord {
            dim,
            rel_residual,
            rel_error,
            shift,
            kept,
            millis,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_without_timing_is_stable() {
        let mut rep = SolveReport::new();
        rep.records.push(IterationRecord {
            dim: 2,
            rel_residual: 0.5,
            rel_error: None,
            shift: Some(C64::new(1.5, -2.0)),
            kept: 1,
            millis: 12.3,
        });
        let csv = rep.to_csv(false);
        assert_eq!(csv, format!("{CSV_HEADER}\n2,5e-1,,1.5e0,-2e0,1,\n"));
    }
}
