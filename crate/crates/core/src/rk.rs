//! Residual-based rational Krylov type Galerkin solver.
//!
//! The search space is grown by `(A − σₖI)⁻¹ rₖ₋₁`, where `rₖ₋₁` is a
//! dominant left singular vector of the current Galerkin residual (or a
//! tangential direction, or `B`), and `σₖ` comes from one of several shift
//! rules.

use nalgebra::{DVector, SymmetricEigen, SVD};

use crate::birka::{birka, birka_initial_basis, BirkaConfig};
use crate::error::{Error, Result};
use crate::galerkin::{
    extend_orthonormal, galerkin_residual, project, solve_projected, Extension, GalerkinSolution,
    SubspaceBasis,
};
use crate::linalg::{containment_gap, lu_solve, lu_solve_complex, orth, to_complex, CMat, Mat, C64};
use crate::report::{Recorder, SolveReport, SolveStatus};
use crate::system::{BilinearSystem, LowRankFactorization};

/// Sampling of the real shift search interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Logarithmic,
}

/// Greedy search over `[lower·σ_min, upper·σ_max]`, where `σ_min`, `σ_max`
/// are the negated extreme real parts of the spectrum of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyGrid {
    pub lower_factor: f64,
    pub upper_factor: f64,
    pub points: usize,
    pub spacing: GridSpacing,
}

impl Default for GreedyGrid {
    fn default() -> Self {
        Self {
            lower_factor: 0.99,
            upper_factor: 1.01,
            points: 200,
            spacing: GridSpacing::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftRule {
    /// Maximize the deflated residual along the current direction.
    GreedyResidual(GreedyGrid),
    /// Maximize `1/|𝔯(z)|` on the boundary of the mirrored Ritz hull.
    RitzRational { samples: usize },
    /// Use the given shifts cyclically.
    Prescribed { shifts: Vec<C64> },
    /// Greedy shifts with `B` as the expansion direction (classical
    /// rational Krylov).
    RhsDriven(GreedyGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftStrategy {
    pub rule: ShiftRule,
    pub tangential: bool,
    pub directions_per_step: usize,
}

impl ShiftStrategy {
    pub fn new(rule: ShiftRule) -> Self {
        Self {
            rule,
            tangential: false,
            directions_per_step: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.directions_per_step == 0 {
            return Err(Error::InvalidArgument("directions_per_step must be at least 1".into()));
        }
        match &self.rule {
            ShiftRule::GreedyResidual(g) | ShiftRule::RhsDriven(g) => {
                if g.points < 2 {
                    return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
                }
                if !(g.lower_factor > 0.0 && g.upper_factor > 0.0) {
                    return Err(Error::InvalidArgument("interval factors must be positive".into()));
                }
            }
            ShiftRule::RitzRational { samples } => {
                if *samples == 0 {
                    return Err(Error::InvalidArgument("boundary sample count must be positive".into()));
                }
            }
            ShiftRule::Prescribed { shifts } => {
                if shifts.is_empty() {
                    return Err(Error::InvalidArgument("prescribed shift list is empty".into()));
                }
                if shifts.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
                    return Err(Error::InvalidArgument("prescribed shifts must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

/// Strategy for one of the labelled variants `A`–`F`. Variant `F` needs the
/// prescribed shift list (see [`prescribed_shifts_from_birka`]).
pub fn variant(label: char, prescribed: Option<&[C64]>) -> Result<ShiftStrategy> {
    let greedy = ShiftRule::GreedyResidual(GreedyGrid::default());
    let ritz = ShiftRule::RitzRational { samples: 500 };
    let (rule, tangential) = match label.to_ascii_uppercase() {
        'A' => (greedy, false),
        'B' => (greedy, true),
        'C' => (ritz, false),
        'D' => (ritz, true),
        'E' => (ShiftRule::RhsDriven(GreedyGrid::default()), false),
        'F' => {
            let shifts = prescribed
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::InvalidArgument("variant F needs prescribed shifts".into()))?;
            (
                ShiftRule::Prescribed {
                    shifts: shifts.to_vec(),
                },
                false,
            )
        }
        other => return Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
    };
    Ok(ShiftStrategy {
        rule,
        tangential,
        directions_per_step: 1,
    })
}

/// Mirror eigenvalues to the right half plane, keep one member of each
/// conjugate pair (`Im ≥ 0`) and sort ascending by real part.
pub fn prescribed_shifts_from_birka(eigenvalues: &[C64]) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for z in eigenvalues {
        let scale = z.norm().max(f64::MIN_POSITIVE);
        let im = if z.im.abs() <= 1e-12 * scale { 0.0 } else { z.im.abs() };
        let s = C64::new(z.re.abs(), im);
        if !out.iter().any(|t| (t - s).norm() <= 1e-10 * scale) {
            out.push(s);
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Run BIRKA with `k` columns and return its mirrored eigenvalues as a
/// prescribed shift list.
pub fn birka_shift_list(sys: &BilinearSystem, k: usize, seed: u64) -> Result<Vec<C64>> {
    let k = k.min(sys.dim());
    let v0 = birka_initial_basis(sys.dim(), k, seed);
    let out = birka(sys, &v0, &v0, &BirkaConfig::new(k))?;
    Ok(prescribed_shifts_from_birka(&out.eigenvalues))
}

/// Shift search interval `[σ_min, σ_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftInterval {
    pub lo: f64,
    pub hi: f64,
}

/// Mirrored spectral interval of a stable `A`, widened by the grid factors.
pub fn shift_interval(a: &Mat, grid: &GreedyGrid) -> Result<ShiftInterval> {
    let ev = crate::linalg::sorted_eigenvalues(a);
    let (Some(first), Some(last)) = (ev.first(), ev.last()) else {
        return Err(Error::InvalidArgument("empty matrix".into()));
    };
    if last.re >= 0.0 {
        return Err(Error::Unstable(last.re));
    }
    Ok(ShiftInterval {
        lo: -last.re * grid.lower_factor,
        hi: -first.re * grid.upper_factor,
    })
}

fn grid_points(interval: &ShiftInterval, grid: &GreedyGrid) -> Vec<f64> {
    let m = grid.points.max(2);
    (0..m)
        .map(|i| {
            let t = i as f64 / (m - 1) as f64;
            match grid.spacing {
                GridSpacing::Linear => interval.lo + t * (interval.hi - interval.lo),
                GridSpacing::Logarithmic => interval.lo * (interval.hi / interval.lo).powf(t),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyShift {
    pub sigma: f64,
    /// Objective value at `sigma`.
    pub value: f64,
    /// The objective vanished on the whole grid.
    pub degenerate: bool,
}

/// `‖r − (A − σI)V(VᵀAV − σI)⁻¹Vᵀr‖_F`, or `None` when the projected
/// shifted matrix is singular.
pub fn greedy_objective(a: &Mat, basis: &SubspaceBasis, r: &Mat, sigma: f64) -> Option<f64> {
    let v = basis.v();
    let av = a * v;
    let ak = v.tr_mul(&av);
    let vtr = v.tr_mul(r);
    greedy_objective_pre(&av, v, &ak, &vtr, r, sigma)
}

fn greedy_objective_pre(av: &Mat, v: &Mat, ak: &Mat, vtr: &Mat, r: &Mat, sigma: f64) -> Option<f64> {
    let k = ak.nrows();
    if k == 0 {
        return Some(r.norm());
    }
    let shifted = ak - Mat::identity(k, k) * sigma;
    let y = lu_solve(&shifted, vtr, "projected shift").ok()?;
    let val = (r - av * &y + v * &y * sigma).norm();
    val.is_finite().then_some(val)
}

/// Grid maximizer of [`greedy_objective`]; ties go to the first point.
pub fn shift_greedy(
    sys: &BilinearSystem,
    basis: &SubspaceBasis,
    r: &Mat,
    interval: &ShiftInterval,
    grid: &GreedyGrid,
) -> Result<GreedyShift> {
    let v = basis.v();
    let av = sys.a() * v;
    let ak = v.tr_mul(&av);
    let vtr = v.tr_mul(r);
    let mut best: Option<(f64, f64)> = None;
    for s in grid_points(interval, grid) {
        if let Some(val) = greedy_objective_pre(&av, v, &ak, &vtr, r, s) {
            if best.is_none_or(|(_, b)| val > b) {
                best = Some((s, val));
            }
        }
    }
    let (sigma, value) =
        best.ok_or_else(|| Error::Singular("projected matrix singular at every grid point".into()))?;
    let rn = r.norm();
    if value <= 1e-12 * rn || rn == 0.0 {
        return Ok(GreedyShift {
            sigma: interval.lo,
            value,
            degenerate: true,
        });
    }
    Ok(GreedyShift {
        sigma,
        value,
        degenerate: false,
    })
}

/// Convex hull (counter-clockwise, no repeated points) of points in the
/// complex plane.
pub fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut p: Vec<C64> = points
        .iter()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .cloned()
        .collect();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup_by(|a, b| (*a - *b).norm() <= 1e-14 * (1.0 + a.norm()));
    if p.len() <= 2 {
        return p;
    }
    let cross = |o: C64, a: C64, b: C64| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let mut lower: Vec<C64> = Vec::new();
    for &z in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], z) <= 0.0 {
            lower.pop();
        }
        lower.push(z);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &z in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], z) <= 0.0 {
            upper.pop();
        }
        upper.push(z);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `count` points equally spaced by arc length along the closed boundary of
/// a hull. Segments are traversed both ways; a single point is repeated.
pub fn sample_boundary(hull: &[C64], count: usize) -> Vec<C64> {
    if hull.is_empty() || count == 0 {
        return Vec::new();
    }
    if hull.len() == 1 {
        return vec![hull[0]; count];
    }
    let m = hull.len();
    let lens: Vec<f64> = (0..m).map(|i| (hull[(i + 1) % m] - hull[i]).norm()).collect();
    let total: f64 = lens.iter().sum();
    if total == 0.0 {
        return vec![hull[0]; count];
    }
    let mut out = Vec::with_capacity(count);
    let mut edge = 0;
    let mut start = 0.0;
    for i in 0..count {
        let s = total * i as f64 / count as f64;
        while edge + 1 < m && start + lens[edge] < s {
            start += lens[edge];
            edge += 1;
        }
        let t = if lens[edge] > 0.0 { ((s - start) / lens[edge]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(hull[edge] + (hull[(edge + 1) % m] - hull[edge]) * t);
    }
    out
}

/// `log(1/|𝔯(z)|) = Σ log|z − σₗ| − Σ log|z − λⱼ|`.
pub fn log_inverse_rational(z: C64, ritz: &[C64], poles: &[C64]) -> f64 {
    let num: f64 = poles.iter().map(|s| (z - s).norm().ln()).sum();
    let den: f64 = ritz.iter().map(|l| (z - l).norm().ln()).sum();
    num - den
}

/// Maximizer of `1/|𝔯(z)|` over samples of the boundary of the hull of
/// `hull_points`; ties go to the first sample.
pub fn shift_ritz_on_hull(hull_points: &[C64], ritz: &[C64], poles: &[C64], samples: usize) -> Result<C64> {
    let hull = convex_hull(hull_points);
    let pts = sample_boundary(&hull, samples);
    let mut best: Option<(C64, f64)> = None;
    for z in pts {
        let val = log_inverse_rational(z, ritz, poles);
        if val.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| val > b) {
            best = Some((z, val));
        }
    }
    best.map(|(z, _)| z)
        .ok_or_else(|| Error::InvalidArgument("no boundary samples".into()))
}

/// Shift from the hull of the mirrored Ritz values `−λ̄ⱼ`.
pub fn shift_ritz(ritz: &[C64], poles: &[C64], samples: usize) -> Result<C64> {
    if ritz.is_empty() {
        return Err(Error::InvalidArgument("at least one Ritz value is required".into()));
    }
    let mirrored: Vec<C64> = ritz.iter().map(|z| -z.conj()).collect();
    shift_ritz_on_hull(&mirrored, ritz, poles, samples)
}

fn thin_qr(z: &Mat) -> (Mat, Mat) {
    let qr = z.clone().qr();
    (qr.q(), qr.r())
}

/// Leading `count` left singular vectors of a residual `Z D Zᵀ`.
pub fn dominant_residual_directions(res: &LowRankFactorization, count: usize) -> Result<Mat> {
    let n = res.dim();
    if res.inner_dim() == 0 {
        return Err(Error::RankDeficient {
            requested: count,
            rank: 0,
        });
    }
    let (q, t) = thin_qr(&res.z);
    let core = &t * &res.d * t.transpose();
    let core = (&core + core.transpose()) * 0.5;
    let eig = SymmetricEigen::new(core);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let smax = idx.first().map_or(0.0, |&i| eig.eigenvalues[i].abs());
    let rank = idx
        .iter()
        .filter(|&&i| smax > 0.0 && eig.eigenvalues[i].abs() > 1e-12 * smax)
        .count();
    if count > rank {
        return Err(Error::RankDeficient {
            requested: count,
            rank,
        });
    }
    let u = Mat::from_fn(q.ncols(), count, |i, j| eig.eigenvectors[(i, idx[j])]);
    let out = &q * u;
    debug_assert_eq!(out.nrows(), n);
    Ok(out)
}

/// Leading left singular vectors of the deflated residual
/// `R − (A − σI)V(VᵀAV − σI)⁻¹VᵀR`, for `R = Z D Zᵀ`.
pub fn tangential_directions(
    sys: &BilinearSystem,
    basis: &SubspaceBasis,
    res: &LowRankFactorization,
    sigma: C64,
    count: usize,
) -> Result<CMat> {
    let n = sys.dim();
    let v = basis.v();
    let k = v.ncols();
    let (_, t) = thin_qr(&res.z);
    let zd = &res.z * &res.d * t.transpose();
    let av = sys.a() * v;
    let ak = v.tr_mul(&av);
    let g: CMat = if sigma.im == 0.0 {
        let s = sigma.re;
        let g = if k == 0 {
            zd
        } else {
            let y = lu_solve(&(&ak - Mat::identity(k, k) * s), &v.tr_mul(&zd), "projected shift")?;
            &zd - (&av - v * s) * y
        };
        let svd = crate::linalg::svd_thin(&g);
        let rank = rank_of(&svd.s);
        if count > rank {
            return Err(Error::RankDeficient {
                requested: count,
                rank,
            });
        }
        return Ok(to_complex(&svd.u.columns(0, count).into_owned()));
    } else if k == 0 {
        to_complex(&zd)
    } else {
        let shifted = to_complex(&ak) - CMat::identity(k, k) * sigma;
        let rhs = to_complex(&v.tr_mul(&zd));
        let y = lu_solve_complex(&shifted, &rhs, "projected shift")?;
        to_complex(&zd) - (to_complex(&av) - to_complex(v) * sigma) * y
    };
    // QR first: the bidiagonal SVD is only trusted on the square factor
    let cols = g.ncols().min(n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let svd = SVD::new(r.clone(), true, true);
    let (Some(ur), Some(vt)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        return Err(Error::Eigen("SVD failed".into()));
    };
    let recon = (ur * CMat::from_diagonal(&svd.singular_values.map(|x| C64::new(x, 0.0))) * vt - &r).norm();
    if recon > 1e-10 * r.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Eigen("inconsistent SVD factors".into()));
    }
    let rank = rank_of(&svd.singular_values);
    if count > rank {
        return Err(Error::RankDeficient {
            requested: count,
            rank,
        });
    }
    let u = q * ur;
    debug_assert_eq!(u.shape(), (n, cols));
    Ok(u.columns(0, count).into_owned())
}

fn rank_of(s: &DVector<f64>) -> usize {
    let smax = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&x| smax > 0.0 && x > 1e-12 * smax).count()
}

/// `(A − σI)⁻¹ D`, appended as real columns: the solution itself for real
/// data, otherwise its real and imaginary parts.
pub fn expand_with_shift(
    sys: &BilinearSystem,
    basis: &SubspaceBasis,
    directions: &CMat,
    sigma: C64,
) -> Result<Extension> {
    let n = sys.dim();
    let real_dirs = directions.iter().all(|z| z.im == 0.0);
    let candidates = if sigma.im == 0.0 && real_dirs {
        let d = directions.map(|z| z.re);
        lu_solve(&(sys.a() - Mat::identity(n, n) * sigma.re), &d, "shifted matrix")?
    } else {
        let shifted = to_complex(sys.a()) - CMat::identity(n, n) * sigma;
        let x = lu_solve_complex(&shifted, directions, "shifted matrix")?;
        let mut c = Mat::zeros(n, 2 * x.ncols());
        for j in 0..x.ncols() {
            for i in 0..n {
                c[(i, 2 * j)] = x[(i, j)].re;
                c[(i, 2 * j + 1)] = x[(i, j)].im;
            }
        }
        c
    };
    Ok(extend_orthonormal(basis, &candidates))
}

#[derive(Debug, Clone)]
pub struct RkOutcome {
    pub report: SolveReport,
    pub solution: GalerkinSolution,
    /// Shifts in the order they were used.
    pub shifts: Vec<C64>,
}

/// Grow the search space until `‖Rₖ‖_F/‖BBᵀ‖_F ≤ stop_tol`, the dimension
/// reaches `max_dim`, or an expansion adds no columns.
pub fn rk_solve(
    sys: &BilinearSystem,
    strategy: &ShiftStrategy,
    stop_tol: f64,
    max_dim: usize,
    oracle: Option<&Mat>,
) -> Result<RkOutcome> {
    strategy.validate()?;
    if !(stop_tol > 0.0) {
        return Err(Error::InvalidArgument("stop_tol must be positive".into()));
    }
    sys.check_stable()?;
    let n = sys.dim();
    let scale = sys.rhs().norm();
    let mut rec = Recorder::new(oracle);
    let interval = match &strategy.rule {
        ShiftRule::GreedyResidual(g) | ShiftRule::RhsDriven(g) => Some(shift_interval(sys.a(), g)?),
        ShiftRule::RitzRational { .. } => Some(shift_interval(sys.a(), &GreedyGrid::default())?),
        ShiftRule::Prescribed { .. } => None,
    };
    let mut basis = extend_orthonormal(&SubspaceBasis::empty(n), sys.b()).basis;
    let mut shifts: Vec<C64> = Vec::new();
    let mut poles: Vec<C64> = Vec::new();
    let mut last_shift: Option<C64> = None;
    let mut last_kept = basis.k();
    let mut step = 0;
    loop {
        let sol = solve_projected(&project(sys, &basis)?)?;
        let res = galerkin_residual(sys, &sol)?;
        let rel = if scale > 0.0 { res.norm / scale } else { res.norm };
        let err = rec.rel_error(|| sol.approximation());
        rec.push(basis.k(), rel, err, last_shift, last_kept);
        if rel <= stop_tol || scale == 0.0 {
            rec.report.status = SolveStatus::Converged;
            return Ok(RkOutcome {
                report: rec.report,
                solution: sol,
                shifts,
            });
        }
        if basis.k() >= max_dim.min(n) {
            rec.report.status = SolveStatus::BudgetExhausted;
            return Ok(RkOutcome {
                report: rec.report,
                solution: sol,
                shifts,
            });
        }
        let r = match &strategy.rule {
            ShiftRule::RhsDriven(_) => sys.b().clone(),
            _ => dominant_residual_directions(&res.factored, 1)?,
        };
        let sigma = match &strategy.rule {
            ShiftRule::GreedyResidual(g) | ShiftRule::RhsDriven(g) => {
                let iv = interval.expect("interval computed");
                C64::new(shift_greedy(sys, &basis, &r, &iv, g)?.sigma, 0.0)
            }
            ShiftRule::RitzRational { samples } => {
                let iv = interval.expect("interval computed");
                let ak = basis.v().tr_mul(&(sys.a() * basis.v()));
                let ritz: Vec<C64> = ak.complex_eigenvalues().iter().cloned().collect();
                let mut hull: Vec<C64> = ritz.iter().map(|z| -z.conj()).collect();
                hull.push(C64::new(iv.lo, 0.0));
                hull.push(C64::new(iv.hi, 0.0));
                let z = shift_ritz_on_hull(&hull, &ritz, &poles, *samples)?;
                let tiny = 1e-10 * z.norm();
                if z.im.abs() <= tiny {
                    C64::new(z.re, 0.0)
                } else {
                    z
                }
            }
            ShiftRule::Prescribed { shifts: list } => list[step % list.len()],
        };
        let dirs: CMat = if strategy.tangential {
            let count = strategy.directions_per_step.min(n);
            match tangential_directions(sys, &basis, &res.factored, sigma, count) {
                Ok(d) => d,
                Err(Error::RankDeficient { rank, .. }) if rank > 0 => {
                    tangential_directions(sys, &basis, &res.factored, sigma, rank)?
                }
                Err(Error::RankDeficient { .. }) => to_complex(&r),
                Err(e) => return Err(e),
            }
        } else if strategy.directions_per_step > 1 && !matches!(strategy.rule, ShiftRule::RhsDriven(_)) {
            let count = strategy.directions_per_step.min(n);
            match dominant_residual_directions(&res.factored, count) {
                Ok(d) => to_complex(&d),
                Err(_) => to_complex(&r),
            }
        } else {
            to_complex(&r)
        };
        let mut ext = expand_with_shift(sys, &basis, &dirs, sigma)?;
        let cap = max_dim.min(n);
        if ext.basis.k() > cap {
            // the last expansion overshoots the budget; keep its leading columns
            ext.kept -= ext.basis.k() - cap;
            ext.basis = SubspaceBasis::from_columns(&ext.basis.v().columns(0, cap).into_owned())
                .with_drop_tol(basis.drop_tol());
        }
        step += 1;
        shifts.push(sigma);
        poles.push(sigma);
        if sigma.im != 0.0 {
            poles.push(sigma.conj());
        }
        if ext.kept == 0 {
            rec.report.status = SolveStatus::Stagnated;
            return Ok(RkOutcome {
                report: rec.report,
                solution: sol,
                shifts,
            });
        }
        basis = ext.basis;
        last_shift = Some(sigma);
        last_kept = ext.kept;
    }
}

/// Orthonormal basis of `span{B, (A − s₁I)⁻¹B, …, (A − s_kI)⁻¹B}` for
/// distinct shifts. Built with continuation vectors: each solve is applied
/// to the most recent basis block, which spans the same space but avoids
/// orthogonalizing nearly parallel solves against each other. A complex
/// shift contributes the real and imaginary parts of its solve.
pub fn rational_krylov_basis(a: &Mat, b: &Mat, shifts: &[C64]) -> Result<SubspaceBasis> {
    let n = a.nrows();
    let mut basis = extend_orthonormal(&SubspaceBasis::empty(n), b).basis;
    let r = basis.k();
    let ac = to_complex(a);
    for &s in shifts {
        let k = basis.k();
        if k == 0 || k >= n {
            break;
        }
        let q = basis.v().columns(k - r.min(k), r.min(k)).into_owned();
        let shifted = &ac - CMat::identity(n, n) * s;
        let x = lu_solve_complex(&shifted, &to_complex(&q), "shifted matrix")?;
        let real = s.im == 0.0;
        let per = if real { 1 } else { 2 };
        let mut c = Mat::zeros(n, per * x.ncols());
        for j in 0..x.ncols() {
            for i in 0..n {
                c[(i, per * j)] = x[(i, j)].re;
                if !real {
                    c[(i, per * j + 1)] = x[(i, j)].im;
                }
            }
        }
        basis = extend_orthonormal(&basis, &c).basis;
    }
    Ok(basis)
}

/// Galerkin residual of a linear system on a rational Krylov space, in the
/// cancellation-free form `FYVᵀ + VYFᵀ` with `F = (I − VVᵀ)AV`. For finite
/// poles `F` has rank at most `r = rank B`; truncating its SVD to that rank
/// removes rounding noise that `Y` would otherwise amplify.
fn linear_galerkin_residual(a: &Mat, v: &Mat, y: &Mat, r: usize) -> Mat {
    let av = a * v;
    let mut f = &av - v * v.tr_mul(&av);
    f -= v * v.tr_mul(&f);
    if r < f.ncols() {
        let svd = crate::linalg::svd_thin(&f);
        let r = r.min(svd.s.len());
        f = svd.u.columns(0, r) * Mat::from_diagonal(&svd.s.rows(0, r).into_owned()) * svd.vt.rows(0, r);
    }
    let fyv = f * y * v.transpose();
    &fyv + fyv.transpose()
}

/// Measurements for one step `k` of the span theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanStep {
    pub k: usize,
    /// `‖Rₖ‖_F/‖BBᵀ‖_F` for the Galerkin residual on `Kₖ`.
    pub residual_rel: f64,
    /// Containment gap of `range((A − sₖ₊₁I)⁻¹Rₖ)` in `Kₖ₊₁`.
    pub gap_next: f64,
    /// Containment gap of the same range in `Kₖ`.
    pub gap_current: f64,
    /// `‖R − (A − sI)V(VᵀAV − sI)⁻¹VᵀR‖_F/‖BBᵀ‖_F` with `V` a basis of `Kₖ₊₁`.
    pub lemma_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanTheoremReport {
    pub steps: Vec<SpanStep>,
    /// Largest principal-angle sine between the classical rational Krylov
    /// space and the space spanned by the shifted residual ranges.
    pub space_distance: f64,
}

impl SpanTheoremReport {
    /// Containment holds at every step.
    pub fn containment_holds(&self, tol: f64) -> bool {
        self.steps.iter().all(|s| s.gap_next <= tol)
    }

    /// Every step whose range already lies in `Kₖ` has a vanishing residual.
    pub fn zero_residual_holds(&self, tol: f64) -> bool {
        self.steps
            .iter()
            .filter(|s| s.gap_current <= tol)
            .all(|s| s.residual_rel <= tol)
    }

    /// Number of steps in which the range already lies in `Kₖ`.
    pub fn triggered(&self, tol: f64) -> usize {
        self.steps.iter().filter(|s| s.gap_current <= tol).count()
    }

    pub fn lemma_holds(&self, tol: f64) -> bool {
        self.steps.iter().all(|s| s.lemma_defect <= tol)
    }
}

/// Measure the linear-case span theorem for real shifts `s₁, …, s_K`:
/// for `k = 0, …, K−1`, the Galerkin residual `Rₖ` on
/// `Kₖ = span{B, (A − s₁I)⁻¹B, …, (A − sₖI)⁻¹B}` is compared against
/// `Kₖ₊₁`. With bilinear terms present the same quantities are reported but
/// containment is not expected.
pub fn verify_span_theorem(sys: &BilinearSystem, shifts: &[f64]) -> Result<SpanTheoremReport> {
    let n = sys.dim();
    let a = sys.a();
    let scale = sys.rhs().norm();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let cs: Vec<C64> = shifts.iter().map(|&s| C64::new(s, 0.0)).collect();
    let mut steps = Vec::new();
    let mut hat_cols: Vec<Mat> = vec![sys.b().clone()];
    for k in 0..shifts.len() {
        let vk = rational_krylov_basis(a, sys.b(), &cs[..k])?;
        let vk1 = rational_krylov_basis(a, sys.b(), &cs[..k + 1])?;
        let sol = solve_projected(&project(sys, &vk)?)?;
        let r = if sys.num_bilinear() == 0 {
            linear_galerkin_residual(a, vk.v(), &sol.y, sys.num_inputs())
        } else {
            crate::operators::residual(sys, &sol.approximation())?
        };
        let s = shifts[k];
        let shifted = a - Mat::identity(n, n) * s;
        let x = lu_solve(&shifted, &r, "shifted matrix")?;
        let (gap_next, gap_current) = if r.norm() <= 1e-14 * scale {
            (0.0, 0.0)
        } else {
            (containment_gap(&x, vk1.v()), containment_gap(&x, vk.v()))
        };
        let v = vk1.v();
        let kk = v.ncols();
        let ak = v.tr_mul(&(a * v)) - Mat::identity(kk, kk) * s;
        let y = lu_solve(&ak, &v.tr_mul(&r), "projected shift")?;
        let lemma = (&r - &shifted * v * y).norm() / scale;
        steps.push(SpanStep {
            k,
            residual_rel: r.norm() / scale,
            gap_next,
            gap_current,
            lemma_defect: lemma,
        });
        hat_cols.push(x);
    }
    let full = rational_krylov_basis(a, sys.b(), &cs)?;
    let refs: Vec<&Mat> = hat_cols.iter().collect();
    let hat = orth(&crate::linalg::hcat(&refs), 1e-10);
    let space_distance = if hat.ncols() == full.k() {
        crate::linalg::subspace_distance(full.v(), &hat)
    } else {
        1.0
    };
    Ok(SpanTheoremReport {
        steps,
        space_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_distance;

    fn diag_sys(d: &[f64], b: &[f64]) -> BilinearSystem {
        let n = d.len();
        BilinearSystem::new(
            Mat::from_diagonal(&DVector::from_column_slice(d)),
            vec![],
            Mat::from_column_slice(n, 1, b),
        )
        .unwrap()
    }

    #[test]
    fn greedy_constant_objective_picks_lower_end() {
        let sys = diag_sys(&[-1.0, -10.0], &[1.0, 1.0]);
        let g = GreedyGrid::default();
        let iv = shift_interval(sys.a(), &g).unwrap();
        assert!((iv.lo - 0.99).abs() < 1e-14 && (iv.hi - 10.1).abs() < 1e-14);
        let r = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
        let s = shift_greedy(&sys, &SubspaceBasis::empty(2), &r, &iv, &g).unwrap();
        assert_eq!(s.sigma, iv.lo);
        assert!(!s.degenerate);
    }

    #[test]
    fn greedy_matches_fine_grid() {
        let sys = diag_sys(&[-1.0, -10.0], &[1.0, 1.0]);
        let g = GreedyGrid::default();
        let iv = shift_interval(sys.a(), &g).unwrap();
        let basis = SubspaceBasis::from_columns(&Mat::from_column_slice(2, 1, &[1.0, 0.0]));
        let r = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
        let s = shift_greedy(&sys, &basis, &r, &iv, &g).unwrap();
        let fine = GreedyGrid { points: 10_000, ..g };
        let f = shift_greedy(&sys, &basis, &r, &iv, &fine).unwrap();
        let spacing = (iv.hi - iv.lo) / 199.0;
        assert!((s.sigma - f.sigma).abs() <= spacing);
    }

    #[test]
    fn greedy_degenerate_on_invariant_span() {
        let sys = diag_sys(&[-1.0, -10.0, -3.0], &[1.0, 0.0, 0.0]);
        let g = GreedyGrid::default();
        let iv = shift_interval(sys.a(), &g).unwrap();
        let basis = SubspaceBasis::from_columns(&Mat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
        let r = Mat::from_column_slice(3, 1, &[2.0, 0.0, 0.0]);
        let s = shift_greedy(&sys, &basis, &r, &iv, &g).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.sigma, iv.lo);
    }

    #[test]
    fn ritz_single_value() {
        let z = shift_ritz(&[C64::new(-2.0, 0.0)], &[], 500).unwrap();
        assert_eq!(z, C64::new(2.0, 0.0));
    }

    #[test]
    fn ritz_real_spectrum_gives_real_shift() {
        let ritz = [C64::new(-1.0, 0.0), C64::new(-4.0, 0.0), C64::new(-9.0, 0.0)];
        let z = shift_ritz(&ritz, &[C64::new(2.0, 0.0)], 500).unwrap();
        assert_eq!(z.im, 0.0);
        assert!(z.re >= 1.0 && z.re <= 9.0);
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = [
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 1.0),
            C64::new(0.5, 0.5),
        ];
        assert_eq!(convex_hull(&pts).len(), 4);
        let s = sample_boundary(&convex_hull(&pts), 8);
        assert_eq!(s.len(), 8);
        assert!((s[1] - C64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expansion_at_zero_shift() {
        let sys = diag_sys(&[-1.0, -2.0], &[1.0, 1.0]);
        let ext = expand_with_shift(&sys, &SubspaceBasis::empty(2), &to_complex(sys.b()), C64::new(0.0, 0.0))
            .unwrap();
        let expect = Mat::from_column_slice(2, 1, &[-1.0, -0.5]).normalize();
        assert!(subspace_distance(ext.basis.v(), &expect) < 1e-14);
    }

    #[test]
    fn complex_expansion_matches_conjugate_pair() {
        let a = Mat::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, -2.0, -1.0, 0.5, 0.0, 0.3, -3.0]);
        let b = Mat::from_column_slice(3, 1, &[1.0, 0.5, -0.2]);
        let sys = BilinearSystem::new(a.clone(), vec![], b.clone()).unwrap();
        let s = C64::new(1.5, 2.0);
        let ext = expand_with_shift(&sys, &SubspaceBasis::empty(3), &to_complex(&b), s).unwrap();
        assert_eq!(ext.kept, 2);
        let x1 = lu_solve_complex(&(to_complex(&a) - CMat::identity(3, 3) * s), &to_complex(&b), "").unwrap();
        let x2 = x1.map(|z| z.conj());
        let mut c = CMat::zeros(3, 2);
        c.set_column(0, &x1.column(0));
        c.set_column(1, &x2.column(0));
        // the real span of the pair lies in the basis
        for j in 0..2 {
            let col = c.column(j).into_owned();
            let re = col.map(|z| z.re);
            let im = col.map(|z| z.im);
            let v = ext.basis.v();
            assert!((&re - v * v.tr_mul(&re)).norm() < 1e-10 * re.norm());
            assert!((&im - v * v.tr_mul(&im)).norm() < 1e-10 * im.norm().max(1e-300));
        }
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let sys = diag_sys(&[-1.0, -2.0], &[0.0, 0.0]);
        let out = rk_solve(&sys, &variant('A', None).unwrap(), 1e-8, 10, None).unwrap();
        assert_eq!(out.report.status, SolveStatus::Converged);
        assert!(out.solution.approximation().norm() == 0.0);
    }

    #[test]
    fn variant_labels() {
        let a = variant('A', None).unwrap();
        assert!(!a.tangential && matches!(a.rule, ShiftRule::GreedyResidual(_)));
        assert!(variant('B', None).unwrap().tangential);
        assert!(matches!(variant('E', None).unwrap().rule, ShiftRule::RhsDriven(_)));
        assert!(variant('F', None).is_err());
        assert!(variant('G', None).is_err());
    }

    #[test]
    fn prescribed_list_is_mirrored_and_sorted() {
        let ev = [
            C64::new(-3.0, 1.0),
            C64::new(-3.0, -1.0),
            C64::new(-0.5, 0.0),
            C64::new(-2.0, 0.0),
        ];
        let s = prescribed_shifts_from_birka(&ev);
        assert_eq!(s, vec![C64::new(0.5, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 1.0)]);
    }
}
