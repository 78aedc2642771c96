//! Reference solver for the full equation, the contraction check and the
//! H2 norm.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{symmetrize, unvectorize, vectorize, Mat};
use crate::lyapunov::LyapunovSolver;
use crate::operators::{lyap_kron, pi_kron, pi_unchecked, residual};
use crate::system::{BilinearSystem, Tolerances};

/// Settings for [`direct_solve_with`].
#[derive(Debug, Clone, Copy)]
pub struct DirectOptions {
    /// Largest accepted state dimension.
    pub cap: usize,
    /// Up to this dimension the n²×n² Kronecker system is factored densely;
    /// above it GMRES preconditioned by the Lyapunov solver is used.
    pub kron_max: usize,
    pub tol: Tolerances,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            cap: 500,
            kron_max: 24,
            tol: Tolerances::default(),
        }
    }
}

/// Solve `L(X) + Π(X) + BBᵀ = 0` to relative residual `1e-10`.
pub fn direct_solve(sys: &BilinearSystem) -> Result<Mat> {
    direct_solve_with(sys, &DirectOptions::default())
}

pub fn direct_solve_with(sys: &BilinearSystem, opts: &DirectOptions) -> Result<Mat> {
    let n = sys.dim();
    if n > opts.cap {
        return Err(Error::CapExceeded { n, cap: opts.cap });
    }
    let rhs = sys.rhs();
    let scale = rhs.norm();
    if scale == 0.0 {
        return Ok(Mat::zeros(n, n));
    }
    let target = opts.tol.oracle_residual;
    let mut x = if n <= opts.kron_max {
        kron_solve(sys, &rhs)?
    } else {
        let lyap = LyapunovSolver::new(sys.a())?;
        preconditioned_solve(sys, &lyap, &rhs, 1e-3 * target)?
    };
    // iterative refinement on the exact residual
    let mut rel = residual(sys, &x)?.norm() / scale;
    let mut lyap: Option<LyapunovSolver> = None;
    for _ in 0..4 {
        if rel <= target {
            break;
        }
        let r = residual(sys, &x)?;
        let corr = if n <= opts.kron_max {
            kron_solve(sys, &r)?
        } else {
            if lyap.is_none() {
                lyap = Some(LyapunovSolver::new(sys.a())?);
            }
            preconditioned_solve(sys, lyap.as_ref().unwrap(), &r, 1e-3 * target)?
        };
        let next = symmetrize(&(&x + corr));
        let next_rel = residual(sys, &next)?.norm() / scale;
        if next_rel >= rel {
            break;
        }
        x = next;
        rel = next_rel;
    }
    if !(rel <= target) {
        return Err(Error::NotConverged(format!(
            "direct solve reached relative residual {rel:e}, above {target:e}"
        )));
    }
    Ok(x)
}

/// Dense Kronecker solve of `L(X) + Π(X) + RHS = 0`.
fn kron_solve(sys: &BilinearSystem, rhs: &Mat) -> Result<Mat> {
    let n = sys.dim();
    let kl = lyap_kron(sys);
    let kp = pi_kron(sys);
    let tiny = 1e-13 * (kl.amax() + kp.amax());
    let k = kl + kp;
    let lu = k.lu();
    if lu.u().diagonal().iter().any(|d| d.abs() <= tiny) {
        return Err(Error::Singular(
            "Kronecker matrix is singular; the equation is ill-posed".into(),
        ));
    }
    let v = lu.solve(&(-vectorize(rhs))).ok_or_else(|| {
        Error::Singular("Kronecker matrix is singular; the equation is ill-posed".into())
    })?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular(
            "Kronecker matrix is singular; the equation is ill-posed".into(),
        ));
    }
    Ok(symmetrize(&unvectorize(&v, n, n)))
}

/// GMRES on `X − T(X) = X₀` with `T(X) = −L⁻¹Π(X)` and `X₀ = −L⁻¹(RHS)`.
fn preconditioned_solve(
    sys: &BilinearSystem,
    lyap: &LyapunovSolver,
    rhs: &Mat,
    tol: f64,
) -> Result<Mat> {
    let n = sys.dim();
    let x0 = lyap.solve(rhs)?;
    if sys.num_bilinear() == 0 {
        return Ok(x0);
    }
    let mut err: Option<Error> = None;
    let op = |v: &DVector<f64>| -> DVector<f64> {
        let x = unvectorize(v, n, n);
        match lyap.solve(&pi_unchecked(sys.n_list(), &x)) {
            Ok(tx) => vectorize(&(x - tx)),
            Err(e) => {
                err.get_or_insert(e);
                DVector::zeros(n * n)
            }
        }
    };
    let b = vectorize(&x0);
    let (sol, _rel) = gmres(op, &b, tol, 120.min(n * n), 20);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(symmetrize(&unvectorize(&sol, n, n)))
}

/// Restarted GMRES with zero initial guess. Returns the iterate and its
/// relative residual estimate.
pub(crate) fn gmres(
    mut op: impl FnMut(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    tol: f64,
    restart: usize,
    max_restarts: usize,
) -> (DVector<f64>, f64) {
    let nb = b.norm();
    let mut x = DVector::zeros(b.len());
    if nb == 0.0 {
        return (x, 0.0);
    }
    let restart = restart.max(1);
    let mut rel = 1.0;
    for cycle in 0..max_restarts {
        let r = if cycle == 0 { b.clone() } else { b - op(&x) };
        let beta = r.norm();
        rel = beta / nb;
        if rel <= tol {
            break;
        }
        let mut basis: Vec<DVector<f64>> = vec![r / beta];
        let mut h = Mat::zeros(restart + 1, restart);
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = DVector::zeros(restart + 1);
        g[0] = beta;
        let mut used = 0;
        for j in 0..restart {
            let mut w = op(&basis[j]);
            for _ in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let c = vi.dot(&w);
                    h[(i, j)] += c;
                    w.axpy(-c, vi, 1.0);
                }
            }
            let hn = w.norm();
            h[(j + 1, j)] = hn;
            for i in 0..j {
                let t = cs[i] * h[(i, j)] + sn[i] * h[(i + 1, j)];
                h[(i + 1, j)] = -sn[i] * h[(i, j)] + cs[i] * h[(i + 1, j)];
                h[(i, j)] = t;
            }
            let (a, bb) = (h[(j, j)], h[(j + 1, j)]);
            let d = a.hypot(bb);
            if d == 0.0 {
                used = j;
                break;
            }
            cs[j] = a / d;
            sn[j] = bb / d;
            h[(j, j)] = d;
            h[(j + 1, j)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            rel = g[j + 1].abs() / nb;
            if rel <= tol || hn == 0.0 {
                break;
            }
            basis.push(w / hn);
        }
        if used == 0 {
            break;
        }
        let mut y = DVector::zeros(used);
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[(i, k)] * y[k];
            }
            y[i] = s / h[(i, i)];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &basis[i], 1.0);
        }
        if rel <= tol {
            // confirm with the true residual on the next pass
            let true_rel = (b - op(&x)).norm() / nb;
            rel = true_rel;
            if true_rel <= tol * 10.0 {
                break;
            }
        }
    }
    (x, rel)
}

/// Spectral radius of `L⁻¹Π`; errors for unstable `A`.
pub fn check_contraction(sys: &BilinearSystem) -> Result<f64> {
    if sys.num_bilinear() == 0 {
        return Ok(0.0);
    }
    sys.check_stable()?;
    let n = sys.dim();
    if n <= 12 {
        let kl = lyap_kron(sys);
        let kp = pi_kron(sys);
        let m = kl
            .lu()
            .solve(&kp)
            .ok_or_else(|| Error::Singular("Lyapunov operator".into()))?;
        return Ok(m
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max));
    }
    let lyap = LyapunovSolver::new(sys.a())?;
    contraction_arnoldi(sys, &lyap)
}

/// Restarted Arnoldi on `T(X) = −L⁻¹Π(X)`. `T` maps the PSD cone into itself,
/// so its spectral radius is a real eigenvalue and the restart vector can be
/// kept real.
fn contraction_arnoldi(sys: &BilinearSystem, lyap: &LyapunovSolver) -> Result<f64> {
    let n = sys.dim();
    let dim = n * n;
    let m = 30.min(dim);
    let apply = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let x = unvectorize(v, n, n);
        Ok(vectorize(&lyap.solve(&pi_unchecked(sys.n_list(), &x))?))
    };
    let mut v0 = vectorize(&Mat::identity(n, n));
    v0 /= v0.norm();
    let mut theta = 0.0;
    for _restart in 0..40 {
        let mut basis = vec![v0.clone()];
        let mut h = Mat::zeros(m + 1, m);
        let mut k = m;
        for j in 0..m {
            let mut w = apply(&basis[j])?;
            for _ in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let c = vi.dot(&w);
                    h[(i, j)] += c;
                    w.axpy(-c, vi, 1.0);
                }
            }
            let hn = w.norm();
            h[(j + 1, j)] = hn;
            if hn <= 1e-14 * h.column(j).norm().max(f64::MIN_POSITIVE) {
                k = j + 1;
                break;
            }
            basis.push(w / hn);
        }
        let hk = h.view((0, 0), (k, k)).into_owned();
        let ev = hk.complex_eigenvalues();
        let (idx, _) = ev
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty");
        let lam = ev[idx];
        theta = lam.norm();
        if theta == 0.0 {
            return Ok(0.0);
        }
        // Ritz vector for the real part of the dominant Ritz value
        let shifted = &hk - Mat::identity(k, k) * lam.re;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("v_t requested");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let y = vt.row(imin).transpose();
        let resid = if k < m || k == dim {
            0.0
        } else {
            (h[(k, k - 1)] * y[k - 1]).abs()
        };
        if resid <= 1e-10 * theta {
            break;
        }
        let mut next = DVector::zeros(dim);
        for i in 0..k {
            next.axpy(y[i], &basis[i], 1.0);
        }
        let nn = next.norm();
        if nn == 0.0 {
            break;
        }
        v0 = next / nn;
    }
    Ok(theta)
}

/// Both trace formulas `trace(CPCᵀ)` and `trace(BᵀQB)`.
pub fn h2_norm_squared_pair(sys: &BilinearSystem) -> Result<(f64, f64)> {
    let p = direct_solve(sys)?;
    let q = direct_solve(&sys.dual())?;
    let c = sys.c();
    let t1 = (&*c * &p * c.transpose()).trace();
    let t2 = (sys.b().transpose() * &q * sys.b()).trace();
    Ok((t1, t2))
}

/// Squared H2 norm `trace(BᵀQB)`, cross-checked against `trace(CPCᵀ)`.
pub fn h2_norm_squared(sys: &BilinearSystem) -> Result<f64> {
    let (t1, t2) = h2_norm_squared_pair(sys)?;
    let scale = t1.abs().max(t2.abs());
    if (t1 - t2).abs() > 1e-8 * scale {
        return Err(Error::NotConverged(format!(
            "Gramian trace formulas disagree: {t1:e} vs {t2:e}"
        )));
    }
    Ok(t2)
}
