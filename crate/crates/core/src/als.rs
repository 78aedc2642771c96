//! Rank-one alternating linear scheme and the greedy methods built on it.

use nalgebra::DVector;

use crate::error::{dim_err, Error, Result};
use crate::galerkin::{extend_orthonormal, galerkin_residual, project, solve_projected, SubspaceBasis};
use crate::linalg::{lu_solve, symmetrize, Mat};
use crate::operators::residual;
use crate::report::{Recorder, SolveReport, SolveStatus};
use crate::singular::dominant_left_singular_vectors;
use crate::system::{BilinearSystem, LowRankFactorization};

/// How the change of a monitored scalar between sweeps is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeMeasure {
    Absolute,
    Relative,
}

impl ChangeMeasure {
    pub fn eval(&self, prev: f64, next: f64) -> f64 {
        let d = (next - prev).abs();
        match self {
            ChangeMeasure::Absolute => d,
            ChangeMeasure::Relative => {
                if next == 0.0 {
                    d
                } else {
                    d / next.abs()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlsConfig {
    /// Threshold on the change of `(vᵀAv/‖v‖² + wᵀAᵀw/‖w‖²)/2`.
    pub tol: f64,
    pub max_inner_iters: usize,
    pub max_outer_ranks: usize,
    pub change: ChangeMeasure,
}

impl Default for AlsConfig {
    fn default() -> Self {
        Self {
            tol: 1e-2,
            max_inner_iters: 20,
            max_outer_ranks: 50,
            change: ChangeMeasure::Absolute,
        }
    }
}

impl AlsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_inner_iters == 0 {
            return Err(Error::InvalidArgument(
                "ALS needs tol > 0 and at least one inner iteration".into(),
            ));
        }
        Ok(())
    }
}

/// Output of [`als_rank1`].
#[derive(Debug, Clone)]
pub struct AlsOutcome {
    pub v: DVector<f64>,
    pub w: DVector<f64>,
    /// Number of sweeps performed.
    pub iterations: usize,
    /// False when `max_inner_iters` was reached first.
    pub converged: bool,
    /// True when the iteration collapsed to the zero vector (e.g. `R = 0`).
    pub degenerate: bool,
    /// Whether the single-solve symmetric sweep was used.
    pub symmetric_sweeps: bool,
    /// Monitored quantity after each sweep, starting with the initial guess.
    pub quantity: Vec<f64>,
}

/// `J(v, w) = ⟨vwᵀ, vwᵀ⟩_M − 2 vᵀRw`.
pub fn als_objective(sys: &BilinearSystem, r: &Mat, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    let n = sys.dim();
    if v.len() != n || w.len() != n || r.shape() != (n, n) {
        return dim_err("v, w and R must match the system dimension");
    }
    let a = sys.a();
    let mut m = -(v.dot(&(a * v))) * w.dot(w) - v.dot(v) * w.dot(&(a * w));
    for ni in sys.n_list() {
        m -= v.dot(&(ni * v)) * w.dot(&(ni * w));
    }
    Ok(m - 2.0 * v.dot(&(r * w)))
}

fn rayleigh(a: &Mat, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x)) / x.dot(x)
}

fn monitored(a: &Mat, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    // wᵀAᵀw = wᵀAw
    0.5 * (rayleigh(a, v) + rayleigh(a, w))
}

/// `A + (uᵀAu) I + Σ (uᵀNᵢu) Nᵢ` for unit `u`.
fn shifted(sys: &BilinearSystem, u: &DVector<f64>) -> Mat {
    let n = sys.dim();
    let mut m = sys.a() + Mat::identity(n, n) * u.dot(&(sys.a() * u));
    for ni in sys.n_list() {
        m += ni * u.dot(&(ni * u));
    }
    m
}

/// Rank-one ALS for the correction equation with right-hand side `R`.
///
/// With `v0 = w0` and symmetric `R` both halves of a sweep coincide, so each
/// sweep is a single solve and `v = w` holds throughout. Otherwise the
/// two-solve alternating sweep is used.
pub fn als_rank1(
    sys: &BilinearSystem,
    r: &Mat,
    v0: &DVector<f64>,
    w0: &DVector<f64>,
    cfg: &AlsConfig,
) -> Result<AlsOutcome> {
    cfg.validate()?;
    let n = sys.dim();
    if v0.len() != n || w0.len() != n || r.shape() != (n, n) {
        return dim_err("v0, w0 and R must match the system dimension");
    }
    if v0.norm() == 0.0 || w0.norm() == 0.0 {
        return Err(Error::InvalidArgument("initial vectors must be nonzero".into()));
    }
    let symmetric = v0 == w0 && crate::linalg::is_symmetric(r, 1e-14);
    let degenerate_out = |iterations, quantity, symmetric_sweeps| AlsOutcome {
        v: DVector::zeros(n),
        w: DVector::zeros(n),
        iterations,
        converged: true,
        degenerate: true,
        symmetric_sweeps,
        quantity,
    };
    if r.norm() == 0.0 {
        return Ok(degenerate_out(0, vec![], symmetric));
    }
    let a = sys.a();
    let mut v = v0.clone();
    let mut w = w0.clone();
    let mut q_prev = monitored(a, &v, &w);
    let mut quantity = vec![q_prev];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_inner_iters {
        iterations += 1;
        w /= w.norm();
        if symmetric {
            let m = shifted(sys, &w);
            let rhs = -(r * &w);
            let u = lu_solve(&m, &Mat::from_column_slice(n, 1, rhs.as_slice()), "shifted matrix")?;
            let u = u.column(0).into_owned();
            if u.norm() == 0.0 {
                return Ok(degenerate_out(iterations, quantity, true));
            }
            w = u;
            v = w.clone();
        } else {
            let m1 = shifted(sys, &w);
            let rhs = -(r * &w);
            let x = lu_solve(&m1, &Mat::from_column_slice(n, 1, rhs.as_slice()), "shifted matrix")?;
            v = x.column(0).into_owned();
            if v.norm() == 0.0 {
                return Ok(degenerate_out(iterations, quantity, false));
            }
            v /= v.norm();
            let m2 = shifted(sys, &v);
            let rhs = -(r.tr_mul(&Mat::from_column_slice(n, 1, v.as_slice())));
            let x = lu_solve(&m2, &rhs, "shifted matrix")?;
            w = x.column(0).into_owned();
            if w.norm() == 0.0 {
                return Ok(degenerate_out(iterations, quantity, false));
            }
        }
        let q = monitored(a, &v, &w);
        quantity.push(q);
        let change = cfg.change.eval(q_prev, q);
        q_prev = q;
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }
    // balance so that ‖v‖ = ‖w‖ while keeping vwᵀ
    if symmetric {
        let s = w.norm().sqrt();
        let unit = &w / w.norm();
        v = &unit * s;
        w = v.clone();
    } else {
        let s = (w.norm() / v.norm()).sqrt();
        v *= s;
        w /= s;
    }
    Ok(AlsOutcome {
        v,
        w,
        iterations,
        converged,
        degenerate: false,
        symmetric_sweeps: symmetric,
        quantity,
    })
}

/// How the greedy method uses each rank-one correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsMode {
    /// `X̂ₖ₊₁ = X̂ₖ + vvᵀ`.
    RankOne,
    /// `v` extends a basis and the projected problem is re-solved.
    Subspace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    pub mode: AlsMode,
    /// Stop when `‖R‖_F/‖BBᵀ‖_F` falls to this value.
    pub rel_tol: f64,
    /// Keep every `X̂ₖ` and `Rₖ` in the outcome.
    pub keep_history: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            mode: AlsMode::Subspace,
            rel_tol: 1e-8,
            keep_history: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlsGreedyOutcome {
    pub report: SolveReport,
    pub approximation: LowRankFactorization,
    /// Inner ALS runs that hit `max_inner_iters`.
    pub inner_warnings: usize,
    /// `(X̂ₖ, Rₖ)` for k = 0, 1, … when requested.
    pub history: Vec<(Mat, Mat)>,
}

/// Greedy method driven by rank-one ALS corrections, started from `X̂₀ = 0`
/// with the dominant left singular vector of the residual as initial guess.
pub fn als_greedy(
    sys: &BilinearSystem,
    cfg: &AlsConfig,
    opts: &GreedyOptions,
    oracle: Option<&Mat>,
) -> Result<AlsGreedyOutcome> {
    cfg.validate()?;
    let n = sys.dim();
    let scale = sys.rhs().norm();
    let mut rec = Recorder::new(oracle);
    let mut history = Vec::new();
    let mut inner_warnings = 0;
    let mut xhat = Mat::zeros(n, n);
    let mut factors: Vec<DVector<f64>> = Vec::new();
    let mut basis = SubspaceBasis::empty(n);
    let mut y = Mat::zeros(0, 0);
    let mut r = sys.rhs();
    let rel = |r: &Mat| if scale > 0.0 { r.norm() / scale } else { r.norm() };
    let err0 = rec.rel_error(|| xhat.clone());
    rec.push(0, rel(&r), err0, None, 0);
    if opts.keep_history {
        history.push((xhat.clone(), r.clone()));
    }
    let mut status = SolveStatus::BudgetExhausted;
    if rel(&r) <= opts.rel_tol || scale == 0.0 {
        status = SolveStatus::Converged;
    }
    let mut rank = 0;
    while status != SolveStatus::Converged && rank < cfg.max_outer_ranks.min(n) {
        let start = dominant_left_singular_vectors(&r, 1)?.column(0).into_owned();
        let out = als_rank1(sys, &r, &start, &start, cfg)?;
        if !out.converged {
            inner_warnings += 1;
        }
        if out.degenerate {
            status = SolveStatus::Stagnated;
            break;
        }
        let kept = match opts.mode {
            AlsMode::RankOne => {
                let v = out.v.clone();
                xhat += &v * v.transpose();
                xhat = symmetrize(&xhat);
                factors.push(v);
                r = residual(sys, &xhat)?;
                1
            }
            AlsMode::Subspace => {
                let ext = extend_orthonormal(&basis, &Mat::from_column_slice(n, 1, out.v.as_slice()));
                if ext.kept == 0 {
                    status = SolveStatus::Stagnated;
                    break;
                }
                basis = ext.basis;
                let sol = solve_projected(&project(sys, &basis)?)?;
                let res = galerkin_residual(sys, &sol)?;
                xhat = sol.approximation();
                y = sol.y;
                r = res
                    .dense
                    .ok_or_else(|| Error::CapExceeded { n, cap: crate::galerkin::DENSE_RESIDUAL_MAX })?;
                ext.kept
            }
        };
        rank += kept;
        let e = rec.rel_error(|| xhat.clone());
        rec.push(rank, rel(&r), e, None, kept);
        if opts.keep_history {
            history.push((xhat.clone(), r.clone()));
        }
        if rel(&r) <= opts.rel_tol {
            status = SolveStatus::Converged;
        }
    }
    rec.report.status = status;
    let approximation = match opts.mode {
        AlsMode::RankOne => {
            if factors.is_empty() {
                LowRankFactorization::zero(n)
            } else {
                LowRankFactorization::from_factor(Mat::from_columns(&factors))
            }
        }
        AlsMode::Subspace => LowRankFactorization {
            z: basis.v().clone(),
            d: y,
        },
    };
    Ok(AlsGreedyOutcome {
        report: rec.report,
        approximation,
        inner_warnings,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, nu: f64, b: f64) -> BilinearSystem {
        BilinearSystem::new_symmetric(
            Mat::from_element(1, 1, a),
            vec![Mat::from_element(1, 1, nu)],
            Mat::from_element(1, 1, b),
        )
        .unwrap()
    }

    #[test]
    fn objective_trivial_cases() {
        let s = scalar(-1.0, 0.0, 1.0);
        let r = Mat::from_element(1, 1, 1.0);
        let one = DVector::from_element(1, 1.0);
        assert_eq!(als_objective(&s, &r, &DVector::zeros(1), &one).unwrap(), 0.0);
        assert!((als_objective(&s, &r, &one, &one).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn zero_residual_is_degenerate() {
        let s = scalar(-1.0, 0.0, 1.0);
        let one = DVector::from_element(1, 1.0);
        let out = als_rank1(&s, &Mat::zeros(1, 1), &one, &one, &AlsConfig::default()).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.v.norm(), 0.0);
    }

    #[test]
    fn scalar_greedy_reaches_solution() {
        let s = scalar(-1.0, 0.5, 1.0);
        for mode in [AlsMode::RankOne, AlsMode::Subspace] {
            let opts = GreedyOptions {
                mode,
                rel_tol: 1e-12,
                keep_history: false,
            };
            let out = als_greedy(&s, &AlsConfig::default(), &opts, None).unwrap();
            let x = out.approximation.to_dense()[(0, 0)];
            assert!((x - 4.0 / 7.0).abs() < 1e-12, "{mode:?}: {x}");
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let s = BilinearSystem::new_symmetric(-Mat::identity(3, 3), vec![], Mat::zeros(3, 1)).unwrap();
        let out = als_greedy(&s, &AlsConfig::default(), &GreedyOptions::default(), None).unwrap();
        assert_eq!(out.report.status, SolveStatus::Converged);
        assert_eq!(out.approximation.to_dense().norm(), 0.0);
    }
}
