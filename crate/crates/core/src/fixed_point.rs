//! Fixed-point iteration `L(X̂ₖ₊₁) = −Π(X̂ₖ) − BBᵀ` and its residual form
//! `X̂ₖ₊₁ = X̂ₖ − L⁻¹(Rₖ)`.

use crate::error::{Error, Result};
use crate::galerkin::{extend_orthonormal, galerkin_residual, project, solve_projected, GalerkinSolution, SubspaceBasis};
use crate::linalg::{symmetrize, Mat};
use crate::lyapunov::LyapunovSolver;
use crate::operators::{pi_unchecked, residual};
use crate::report::{Recorder, SolveReport, SolveStatus};
use crate::singular::dominant_left_singular_vectors;
use crate::system::BilinearSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointMode {
    /// Solve `L(X̂ₖ₊₁) = −Π(X̂ₖ) − BBᵀ`.
    Splitting,
    /// Update `X̂ₖ₊₁ = X̂ₖ − L⁻¹(Rₖ)`.
    ResidualForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub max_iters: usize,
    /// Stop when `‖Rₖ‖_F/‖BBᵀ‖_F` is at most this.
    pub stop_tol: f64,
    pub mode: FixedPointMode,
    /// Keep all iterates and residuals in the outcome.
    pub keep_iterates: bool,
    /// Consecutive residual increases treated as divergence.
    pub divergence_window: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            stop_tol: 1e-8,
            mode: FixedPointMode::Splitting,
            keep_iterates: false,
            divergence_window: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub x: Mat,
    pub report: SolveReport,
    /// `X̂₀ = 0, X̂₁, …` when requested.
    pub iterates: Vec<Mat>,
    /// `R₀, R₁, …` when requested.
    pub residuals: Vec<Mat>,
}

pub fn fixed_point_solve(
    sys: &BilinearSystem,
    cfg: &FixedPointConfig,
    oracle: Option<&Mat>,
) -> Result<FixedPointOutcome> {
    if !(cfg.stop_tol > 0.0) {
        return Err(Error::InvalidArgument("stop_tol must be positive".into()));
    }
    sys.check_stable()?;
    let n = sys.dim();
    let lyap = LyapunovSolver::new(sys.a())?;
    let rhs = sys.rhs();
    let scale = rhs.norm();
    let rel = |r: &Mat| if scale > 0.0 { r.norm() / scale } else { r.norm() };
    let mut rec = Recorder::new(oracle);
    let mut x = Mat::zeros(n, n);
    let mut r = rhs.clone();
    let mut iterates = Vec::new();
    let mut residuals = Vec::new();
    if cfg.keep_iterates {
        iterates.push(x.clone());
        residuals.push(r.clone());
    }
    let e0 = rec.rel_error(|| x.clone());
    rec.push(0, rel(&r), e0, None, 0);
    let mut status = SolveStatus::BudgetExhausted;
    if rel(&r) <= cfg.stop_tol {
        status = SolveStatus::Converged;
    }
    let mut increases = 0;
    let mut prev = rel(&r);
    let mut k = 0;
    while status != SolveStatus::Converged && k < cfg.max_iters {
        k += 1;
        x = match cfg.mode {
            FixedPointMode::Splitting => lyap.solve(&(pi_unchecked(sys.n_list(), &x) + &rhs))?,
            FixedPointMode::ResidualForm => symmetrize(&(&x + lyap.solve(&r)?)),
        };
        r = residual(sys, &x)?;
        let rr = rel(&r);
        let e = rec.rel_error(|| x.clone());
        rec.push(k, rr, e, None, 0);
        if cfg.keep_iterates {
            iterates.push(x.clone());
            residuals.push(r.clone());
        }
        if rr <= cfg.stop_tol {
            status = SolveStatus::Converged;
        }
        if rr > prev {
            increases += 1;
            if increases >= cfg.divergence_window {
                return Err(Error::Diverged {
                    iterations: k,
                    residual: rr,
                });
            }
        } else {
            increases = 0;
        }
        if !rr.is_finite() {
            return Err(Error::Diverged {
                iterations: k,
                residual: rr,
            });
        }
        prev = rr;
    }
    rec.report.status = status;
    Ok(FixedPointOutcome {
        x,
        report: rec.report,
        iterates,
        residuals,
    })
}

/// Experimental: grow a Galerkin basis with the dominant left singular
/// vectors of `L⁻¹(Rₖ)`. Each step costs a full dense Lyapunov solve.
pub fn fixed_point_subspace(
    sys: &BilinearSystem,
    directions: usize,
    max_dim: usize,
    stop_tol: f64,
    oracle: Option<&Mat>,
) -> Result<(SolveReport, GalerkinSolution)> {
    sys.check_stable()?;
    let n = sys.dim();
    let lyap = LyapunovSolver::new(sys.a())?;
    let scale = sys.rhs().norm();
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let mut rec = Recorder::new(oracle);
    let mut basis = SubspaceBasis::empty(n);
    let mut sol = solve_projected(&project(sys, &basis)?)?;
    let mut res = galerkin_residual(sys, &sol)?;
    rec.push(0, rel(res.norm), rec.rel_error(|| sol.approximation()), None, 0);
    let mut status = if rel(res.norm) <= stop_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::BudgetExhausted
    };
    while status != SolveStatus::Converged && basis.k() < max_dim.min(n) {
        let r = match &res.dense {
            Some(d) => d.clone(),
            None => res.factored.to_dense(),
        };
        let corr = lyap.solve(&r)?;
        let count = directions.min(max_dim - basis.k());
        let dirs = match dominant_left_singular_vectors(&corr, count) {
            Ok(d) => d,
            Err(Error::RankDeficient { .. }) => {
                status = SolveStatus::Stagnated;
                break;
            }
            Err(e) => return Err(e),
        };
        let ext = extend_orthonormal(&basis, &dirs);
        if ext.kept == 0 {
            status = SolveStatus::Stagnated;
            break;
        }
        basis = ext.basis;
        sol = solve_projected(&project(sys, &basis)?)?;
        res = galerkin_residual(sys, &sol)?;
        let e = rec.rel_error(|| sol.approximation());
        rec.push(basis.k(), rel(res.norm), e, None, ext.kept);
        if rel(res.norm) <= stop_tol {
            status = SolveStatus::Converged;
        }
    }
    rec.report.status = status;
    Ok((rec.report, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::lyap_solve;

    fn scalar(a: f64, nu: f64, b: f64) -> BilinearSystem {
        BilinearSystem::new_symmetric(
            Mat::from_element(1, 1, a),
            vec![Mat::from_element(1, 1, nu)],
            Mat::from_element(1, 1, b),
        )
        .unwrap()
    }

    #[test]
    fn linear_case_one_step() {
        let a = Mat::from_row_slice(2, 2, &[-2.0, 0.5, 0.1, -1.0]);
        let b = Mat::from_row_slice(2, 1, &[1.0, -1.0]);
        let sys = BilinearSystem::new(a.clone(), vec![], b.clone()).unwrap();
        let out = fixed_point_solve(&sys, &FixedPointConfig::default(), None).unwrap();
        assert_eq!(out.report.records.len(), 2);
        let x = lyap_solve(&a, &(&b * b.transpose())).unwrap();
        assert!((out.x - x).norm() < 1e-14);
    }

    #[test]
    fn scalar_geometric_series() {
        let cfg = FixedPointConfig {
            keep_iterates: true,
            max_iters: 10,
            stop_tol: 1e-30,
            ..Default::default()
        };
        let out = fixed_point_solve(&scalar(-1.0, 1.0, 1.0), &cfg, None).unwrap();
        for (k, xk) in out.iterates.iter().enumerate() {
            let expect: f64 = (0..k).map(|j| 0.5f64.powi(j as i32 + 1)).sum();
            assert!((xk[(0, 0)] - expect).abs() < 1e-15, "k = {k}");
        }
    }

    #[test]
    fn divergence_detected() {
        let cfg = FixedPointConfig::default();
        // ρ = ν²/2 = 2 > 1
        assert!(matches!(
            fixed_point_solve(&scalar(-1.0, 2.0, 1.0), &cfg, None),
            Err(Error::Diverged { .. })
        ));
    }
}
