//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;
pub type C64 = Complex<f64>;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Mat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            let mut blk = out.view_mut((i * br, j * bc), (br, bc));
            blk.zip_apply(b, |o, v| *o = s * v);
        }
    }
    out
}

/// Column-major vectorization.
pub fn vectorize(m: &Mat) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &DVector<f64>, rows: usize, cols: usize) -> Mat {
    Mat::from_column_slice(rows, cols, v.as_slice())
}

/// `(m + mᵀ)/2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// `‖m − mᵀ‖_F`.
pub fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).norm()
}

/// True when `‖m − mᵀ‖_F ≤ rel·max(1, ‖m‖_F)`.
pub fn is_symmetric(m: &Mat, rel: f64) -> bool {
    m.is_square() && asymmetry(m) <= rel * m.norm().max(1.0)
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eig_sym(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Largest real part of the spectrum of a square matrix.
pub fn max_real_eigenvalue(a: &Mat) -> f64 {
    if a.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    if is_symmetric(a, 1e-14) {
        return SymmetricEigen::new(symmetrize(a))
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalues of a square real matrix, sorted lexicographically by (re, im).
pub fn sorted_eigenvalues(a: &Mat) -> Vec<C64> {
    let mut ev: Vec<C64> = if is_symmetric(a, 1e-14) {
        SymmetricEigen::new(symmetrize(a))
            .eigenvalues
            .iter()
            .map(|&x| C64::new(x, 0.0))
            .collect()
    } else {
        a.complex_eigenvalues().iter().cloned().collect()
    };
    sort_complex(&mut ev);
    ev
}

/// Lexicographic sort by (re, im).
pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Thin SVD `m = U diag(s) Vᵀ` with `s` sorted in non-increasing order,
/// `U` of size `rows × p` and `Vᵀ` of size `p × cols`, `p = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Mat,
    pub s: DVector<f64>,
    pub vt: Mat,
}

impl ThinSvd {
    pub fn recompose(&self) -> Mat {
        &self.u * Mat::from_diagonal(&self.s) * &self.vt
    }
}

/// Thin SVD with verified factors.
///
/// nalgebra's bidiagonal SVD can return inconsistent singular vectors for
/// rank-deficient rectangular input with exactly zero singular values. The
/// factorization is therefore checked and, if the reconstruction is off,
/// recomputed with one-sided Jacobi.
pub fn svd_thin(m: &Mat) -> ThinSvd {
    let (r, c) = m.shape();
    let p = r.min(c);
    if p == 0 {
        return ThinSvd {
            u: Mat::zeros(r, 0),
            s: DVector::zeros(0),
            vt: Mat::zeros(0, c),
        };
    }
    let scale = m.norm();
    let svd = SVD::new(m.clone(), true, true);
    if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let out = ThinSvd {
            u: Mat::from_fn(r, p, |i, j| u[(i, idx[j])]),
            s: DVector::from_fn(p, |j, _| svd.singular_values[idx[j]]),
            vt: Mat::from_fn(p, c, |i, j| vt[(idx[i], j)]),
        };
        let orth_u = (out.u.tr_mul(&out.u) - Mat::identity(p, p)).norm();
        let orth_v = (&out.vt * out.vt.transpose() - Mat::identity(p, p)).norm();
        let recon = (out.recompose() - m).norm();
        if recon <= 1e-12 * scale.max(f64::MIN_POSITIVE) && orth_u <= 1e-10 && orth_v <= 1e-10 {
            return out;
        }
    }
    if r >= c {
        jacobi_svd(m)
    } else {
        let t = jacobi_svd(&m.transpose());
        ThinSvd {
            u: t.vt.transpose(),
            s: t.s,
            vt: t.u.transpose(),
        }
    }
}

/// One-sided Jacobi SVD of a matrix with at least as many rows as columns.
fn jacobi_svd(m: &Mat) -> ThinSvd {
    let (r, c) = m.shape();
    let mut w = m.clone();
    let mut v = Mat::identity(c, c);
    for _ in 0..60 {
        let mut rotated = false;
        for i in 0..c {
            for j in i + 1..c {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for (mat, rows) in [(&mut w, r), (&mut v, c)] {
                    for k in 0..rows {
                        let a = mat[(k, i)];
                        let b = mat[(k, j)];
                        mat[(k, i)] = cs * a - sn * b;
                        mat[(k, j)] = sn * a + cs * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..c).map(|j| w.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..c).collect();
    idx.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let smax = norms[idx[0]];
    let signal = idx
        .iter()
        .take_while(|&&j| norms[j] > 0.0 && norms[j] > f64::EPSILON * smax * r as f64)
        .count();
    let mut cols: Vec<DVector<f64>> = idx[..signal].iter().map(|&j| w.column(j) / norms[j]).collect();
    // complete U with unit vectors for the null directions
    let mut e = 0;
    while cols.len() < c {
        let mut x = DVector::zeros(r);
        x[e % r] = 1.0;
        e += 1;
        for _ in 0..2 {
            for q in &cols {
                let h = q.dot(&x);
                x.axpy(-h, q, 1.0);
            }
        }
        let nx = x.norm();
        if nx > 0.5 {
            cols.push(x / nx);
        }
    }
    ThinSvd {
        u: Mat::from_columns(&cols),
        s: DVector::from_fn(c, |k, _| if k < signal { norms[idx[k]] } else { 0.0 }),
        vt: Mat::from_fn(c, c, |i, j| v[(j, idx[i])]),
    }
}

/// Orthonormal basis of the column space of `m`, dropping directions with
/// singular value below `rel_tol·σ_max`.
pub fn orth(m: &Mat, rel_tol: f64) -> Mat {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return Mat::zeros(n, 0);
    }
    let svd = svd_thin(m);
    let smax = svd.s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Mat::zeros(n, 0);
    }
    let keep = svd.s.iter().filter(|&&x| x > rel_tol * smax).count();
    svd.u.columns(0, keep).into_owned()
}

/// Leading `k` left singular vectors of `m` (sorted descending).
pub fn leading_left_singular_vectors(m: &Mat, k: usize) -> Mat {
    let svd = svd_thin(m);
    svd.u.columns(0, k.min(svd.u.ncols())).into_owned()
}

/// Relative distance of `range(x)` from `span(v)` for orthonormal `v`:
/// `‖(I − VVᵀ)X‖₂ / ‖X‖₂`, the sine of the largest angle between a
/// dominant direction of `x` and the subspace.
pub fn containment_gap(x: &Mat, v: &Mat) -> f64 {
    let nx = spectral_norm(x);
    if nx == 0.0 {
        return 0.0;
    }
    let proj = if v.ncols() == 0 {
        x.clone()
    } else {
        x - v * (v.transpose() * x)
    };
    spectral_norm(&proj) / nx
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases. Unequal dimensions give 1.
pub fn subspace_distance(u: &Mat, v: &Mat) -> f64 {
    if u.ncols() != v.ncols() {
        return 1.0;
    }
    if u.ncols() == 0 {
        return 0.0;
    }
    let a = spectral_norm(&(u - v * (v.transpose() * u)));
    let b = spectral_norm(&(v - u * (u.transpose() * v)));
    a.max(b).min(1.0)
}

/// Angle in radians between the lines spanned by two vectors.
pub fn line_angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return if nu == nv { 0.0 } else { std::f64::consts::FRAC_PI_2 };
    }
    // sin-based formula stays accurate for tiny angles
    let c = u.dot(v) / (nu * nv);
    let w = u / nu - v * (c.signum() / nv);
    let s = w.norm() / 2.0;
    2.0 * s.min(1.0).asin()
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> Mat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> Mat {
    m.map(|z| z.im)
}

/// Horizontal concatenation.
pub fn hcat(parts: &[&Mat]) -> Mat {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        out.view_mut((0, c), (rows, p.ncols())).copy_from(p);
        c += p.ncols();
    }
    out
}

/// Block-diagonal matrix.
pub fn block_diag(parts: &[&Mat]) -> Mat {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for p in parts {
        out.view_mut((r, c), p.shape()).copy_from(p);
        r += p.nrows();
        c += p.ncols();
    }
    out
}

/// Solve a square real system by LU, reporting singularity.
pub fn lu_solve(a: &Mat, b: &Mat, what: &str) -> Result<Mat> {
    let lu = a.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{what}: matrix is singular")))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(format!("{what}: non-finite solution")));
    }
    Ok(x)
}

/// Solve a square complex system by LU, reporting singularity.
pub fn lu_solve_complex(a: &CMat, b: &CMat, what: &str) -> Result<CMat> {
    let lu = a.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{what}: matrix is singular")))?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular(format!("{what}: non-finite solution")));
    }
    Ok(x)
}

/// Estimate of the 2-norm condition number.
pub fn condition_number(a: &Mat) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let s = SVD::new(a.clone(), false, false).singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}
