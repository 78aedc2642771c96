//! Bilinear iterative rational Krylov algorithm, its generalized Sylvester
//! inner solves and the H2 error quantities used to check it.

use nalgebra::{DVector, SymmetricEigen, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::als::ChangeMeasure;
use crate::direct::{direct_solve, gmres, h2_norm_squared};
use crate::error::{dim_err, Error, Result};
use crate::instances::random_orthonormal;
use crate::linalg::{
    block_diag, condition_number, hcat, imag_part, is_symmetric, kron, lu_solve, real_part,
    sort_complex, symmetrize, to_complex, CMat, Mat, C64,
};
use crate::operators::m_inner;
use crate::system::BilinearSystem;

/// Dimension `k·n` above which the inner solves switch from a dense
/// Kronecker factorization to preconditioned GMRES.
const DENSE_SYLVESTER_MAX: usize = 800;

/// Solve `Ṽ Λ + A Ṽ + Σ Nᵢ Ṽ Mᵢ + RHS = 0` where `Mᵢ = N̂ᵢᵀ`
/// (k × k, possibly complex).
pub fn gen_sylvester_solve(
    a: &Mat,
    lambda: &CMat,
    n_list: &[Mat],
    nhat_t_list: &[CMat],
    rhs: &CMat,
) -> Result<CMat> {
    let n = a.nrows();
    let k = lambda.nrows();
    if rhs.shape() != (n, k) || !lambda.is_square() || nhat_t_list.len() != n_list.len() {
        return dim_err("inconsistent generalized Sylvester operands");
    }
    if nhat_t_list.iter().any(|m| m.shape() != (k, k)) {
        return dim_err("right factors must be k x k");
    }
    if k == 0 || n == 0 {
        return Ok(CMat::zeros(n, k));
    }
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok(CMat::zeros(n, k));
    }
    let ac = to_complex(a);
    let nc: Vec<CMat> = n_list.iter().map(to_complex).collect();
    let apply = |x: &CMat| -> CMat {
        let mut out = &ac * x + x * lambda;
        for (ni, mi) in nc.iter().zip(nhat_t_list) {
            out += ni * x * mi;
        }
        out
    };
    let lambda_diag = {
        let off: f64 = (lambda - CMat::from_diagonal(&lambda.diagonal())).norm();
        off == 0.0
    };
    let x = if n * k <= DENSE_SYLVESTER_MAX || !lambda_diag {
        let ik = CMat::identity(k, k);
        let in_ = CMat::identity(n, n);
        let mut op = ckron(&ik, &ac) + ckron(&lambda.transpose(), &in_);
        for (ni, mi) in nc.iter().zip(nhat_t_list) {
            op += ckron(&mi.transpose(), ni);
        }
        let tiny = 1e-13 * op.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lu = op.lu();
        if lu.u().diagonal().iter().any(|d| d.norm() <= tiny) {
            return Err(Error::Singular(
                "generalized Sylvester operator (−Λ meets the spectrum)".into(),
            ));
        }
        let b = -CMat::from_column_slice(n * k, 1, rhs.as_slice());
        let v = lu
            .solve(&b)
            .ok_or_else(|| Error::Singular("generalized Sylvester operator".into()))?;
        CMat::from_column_slice(n, k, v.as_slice())
    } else {
        // column-wise preconditioner (A + λⱼI)⁻¹
        let mut lus = Vec::with_capacity(k);
        for j in 0..k {
            let shifted = &ac + CMat::identity(n, n) * lambda[(j, j)];
            let lu = shifted.lu();
            if !lu.is_invertible() {
                return Err(Error::Singular(
                    "generalized Sylvester operator (−Λ meets the spectrum)".into(),
                ));
            }
            lus.push(lu);
        }
        let precond = |x: &CMat| -> CMat {
            let mut out = x.clone();
            for (j, lu) in lus.iter().enumerate() {
                let col = x.column(j).into_owned();
                let s = lu.solve(&col).unwrap_or(col);
                out.set_column(j, &s);
            }
            out
        };
        let to_real = |x: &CMat| -> DVector<f64> {
            let mut v = DVector::zeros(2 * n * k);
            for (i, z) in x.iter().enumerate() {
                v[i] = z.re;
                v[n * k + i] = z.im;
            }
            v
        };
        let from_real = |v: &DVector<f64>| -> CMat {
            CMat::from_fn(n, k, |i, j| {
                let idx = j * n + i;
                C64::new(v[idx], v[n * k + idx])
            })
        };
        let b = to_real(&precond(&(-rhs)));
        let op = |v: &DVector<f64>| -> DVector<f64> {
            let x = from_real(v);
            let mut coupled = CMat::zeros(n, k);
            for (ni, mi) in nc.iter().zip(nhat_t_list) {
                coupled += ni * &x * mi;
            }
            to_real(&(&x + precond(&coupled)))
        };
        let (sol, _) = gmres(op, &b, 1e-13, 200, 20);
        from_real(&sol)
    };
    let res = apply(&x) + rhs;
    let rel = res.norm() / rhs_norm;
    if !(rel <= 1e-9) {
        return Err(Error::NotConverged(format!(
            "generalized Sylvester residual {rel:e}"
        )));
    }
    Ok(x)
}

fn ckron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            let mut blk = out.view_mut((i * br, j * bc), (br, bc));
            blk.zip_apply(b, |o, v| *o = s * v);
        }
    }
    out
}

/// Eigenvalues (sorted by (re, im)) and unit eigenvectors of a real matrix,
/// each normalized so that its largest entry is real and positive.
pub fn diagonalize(m: &Mat) -> Result<(Vec<C64>, CMat)> {
    let k = m.nrows();
    if k == 0 {
        return Ok((vec![], CMat::zeros(0, 0)));
    }
    if k == 1 {
        return Ok((vec![C64::new(m[(0, 0)], 0.0)], CMat::identity(1, 1)));
    }
    if is_symmetric(m, 1e-12) {
        let eig = SymmetricEigen::new(symmetrize(m));
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&i| C64::new(eig.eigenvalues[i], 0.0)).collect();
        let mut r = CMat::from_fn(k, k, |i, j| C64::new(eig.eigenvectors[(i, idx[j])], 0.0));
        normalize_columns(&mut r);
        return Ok((vals, r));
    }
    let mut vals: Vec<C64> = m.complex_eigenvalues().iter().cloned().collect();
    sort_complex(&mut vals);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mc = to_complex(m);
    let mut r = CMat::zeros(k, k);
    let mut j = 0;
    while j < k {
        // cluster numerically equal eigenvalues
        let mut p = 1;
        while j + p < k && (vals[j + p] - vals[j]).norm() <= 1e-8 * scale {
            p += 1;
        }
        let shifted = &mc - CMat::identity(k, k) * vals[j];
        let svd = SVD::new(shifted, false, true);
        let vt = svd.v_t.ok_or_else(|| Error::Eigen("SVD failed".into()))?;
        let s = &svd.singular_values;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        for c in 0..p {
            let row = vt.row(order[c]).adjoint();
            r.set_column(j + c, &row);
        }
        j += p;
    }
    normalize_columns(&mut r);
    let lu = r.clone().lu();
    let rc = {
        // condition of the complex matrix via its real embedding [[Re, −Im], [Im, Re]]
        let re = real_part(&r);
        let im = imag_part(&r);
        let top = hcat(&[&re, &-im.clone()]);
        let bottom = hcat(&[&im, &re]);
        let full = Mat::from_fn(2 * k, 2 * k, |i, jj| if i < k { top[(i, jj)] } else { bottom[(i - k, jj)] });
        condition_number(&full)
    };
    let lam = CMat::from_diagonal(&DVector::from_vec(vals.clone()));
    let eig_res = (&mc * &r - &r * lam).norm();
    if !lu.is_invertible() || rc > 1e12 || eig_res > 1e-8 * scale {
        return Err(Error::Eigen(format!(
            "matrix is defective or nearly so (eigenvector condition {rc:e})"
        )));
    }
    Ok((vals, r))
}

fn normalize_columns(r: &mut CMat) {
    for mut col in r.column_iter_mut() {
        let nrm = col.norm();
        if nrm == 0.0 {
            continue;
        }
        let (imax, _) = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty");
        let z = col[imax];
        let phase = z.conj() / z.norm();
        for x in col.iter_mut() {
            *x = *x * phase / nrm;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirkaConfig {
    pub k: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub change: ChangeMeasure,
}

impl BirkaConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            tol: 1e-3,
            max_iters: 100,
            change: ChangeMeasure::Relative,
        }
    }
}

/// Diagnostics of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BirkaStep {
    /// Change of the sorted eigenvalues of Ã against the previous iterate.
    pub change: f64,
    /// Condition number of `WᵀV` used in the update.
    pub cond_wtv: f64,
    /// True when the eigenvector matrix was exactly the identity, i.e. the
    /// diagonalizing transformation left Ñᵢ, B̃, C̃ unchanged.
    pub transform_identity: bool,
    /// True when realification/orthonormalization changed nothing but the
    /// length of a single column.
    pub orth_is_scaling: bool,
}

#[derive(Debug, Clone)]
pub struct BirkaOutcome {
    /// Orthonormal basis of the right projection space.
    pub v: Mat,
    /// Orthonormal basis of the left projection space.
    pub w: Mat,
    /// `(Ã, Ñᵢ, B̃)` with output `C̃` for the final `V`, `W`.
    pub reduced: BilinearSystem,
    /// Sorted eigenvalues of the final Ã.
    pub eigenvalues: Vec<C64>,
    pub iterations: usize,
    pub converged: bool,
    pub steps: Vec<BirkaStep>,
}

/// Orthonormal random start with `k` columns.
pub fn birka_initial_basis(n: usize, k: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_orthonormal(n, k, &mut rng)
}

struct Petrov {
    a: Mat,
    n: Vec<Mat>,
    b: Mat,
    c: Mat,
    cond: f64,
}

fn petrov(sys: &BilinearSystem, v: &Mat, w: &Mat) -> Result<Petrov> {
    let wtv = w.tr_mul(v);
    let cond = condition_number(&wtv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Singular(format!("WᵀV is singular (condition {cond:e})")));
    }
    let solve = |m: &Mat| lu_solve(&wtv, &w.tr_mul(m), "WᵀV");
    Ok(Petrov {
        a: solve(&(sys.a() * v))?,
        n: sys
            .n_list()
            .iter()
            .map(|ni| solve(&(ni * v)))
            .collect::<Result<_>>()?,
        b: solve(sys.b())?,
        c: &*sys.c() * v,
        cond,
    })
}

fn eig_change(measure: ChangeMeasure, prev: &[C64], next: &[C64]) -> f64 {
    let d: f64 = prev
        .iter()
        .zip(next)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    match measure {
        ChangeMeasure::Absolute => d,
        ChangeMeasure::Relative => {
            let s: f64 = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if s == 0.0 {
                d
            } else {
                d / s
            }
        }
    }
}

/// Real orthonormal basis for the span of a complex basis with conjugate
/// column pairs.
fn realify(x: &CMat, k: usize) -> (Mat, bool) {
    let re = real_part(x);
    let im = imag_part(x);
    if im.norm() <= 1e-14 * re.norm() {
        if k == 1 {
            let nrm = re.norm();
            return (re / nrm, true);
        }
        return (re.qr().q().columns(0, k).into_owned(), false);
    }
    let both = hcat(&[&re, &im]);
    (crate::linalg::svd_thin(&both).u.columns(0, k).into_owned(), false)
}

/// Iterate the interpolation subspaces from `(V₀, W₀)` until the sorted
/// eigenvalues of Ã change by at most `tol`.
pub fn birka(sys: &BilinearSystem, v0: &Mat, w0: &Mat, cfg: &BirkaConfig) -> Result<BirkaOutcome> {
    let n = sys.dim();
    let k = cfg.k;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("reduced order k = {k} must be in 1..={n}")));
    }
    if v0.shape() != (n, k) || w0.shape() != (n, k) {
        return dim_err(format!("initial bases must be {n}x{k}"));
    }
    let mut v = v0.clone();
    let mut w = w0.clone();
    let mut red = petrov(sys, &v, &w)?;
    let (mut lam, mut rmat) = diagonalize(&red.a)?;
    let mut steps = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let c_full = sys.c().into_owned();
    let at = sys.a().transpose();
    let nt: Vec<Mat> = sys.n_list().iter().map(|x| x.transpose()).collect();
    while iterations < cfg.max_iters {
        iterations += 1;
        let identity = rmat == CMat::identity(k, k);
        let rinv = rmat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Eigen("eigenvector matrix is singular".into()))?;
        let lambda = CMat::from_diagonal(&DVector::from_vec(lam.clone()));
        let nhat: Vec<CMat> = red.n.iter().map(|ni| &rinv * to_complex(ni) * &rmat).collect();
        let bhat = &rinv * to_complex(&red.b);
        let chat = to_complex(&red.c) * &rmat;
        let nhat_t: Vec<CMat> = nhat.iter().map(|x| x.transpose()).collect();
        let vt = gen_sylvester_solve(
            sys.a(),
            &lambda,
            sys.n_list(),
            &nhat_t,
            &(to_complex(sys.b()) * bhat.transpose()),
        )?;
        let wt = gen_sylvester_solve(
            &at,
            &lambda,
            &nt,
            &nhat,
            &(to_complex(&c_full.transpose()) * &chat),
        )?;
        let (vn, vs) = realify(&vt, k);
        let (wn, ws) = realify(&wt, k);
        v = vn;
        w = wn;
        red = petrov(sys, &v, &w)?;
        let (lam_new, r_new) = diagonalize(&red.a)?;
        let change = eig_change(cfg.change, &lam, &lam_new);
        steps.push(BirkaStep {
            change,
            cond_wtv: red.cond,
            transform_identity: identity,
            orth_is_scaling: vs && ws,
        });
        lam = lam_new;
        rmat = r_new;
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }
    let reduced = BilinearSystem::new(red.a.clone(), red.n.clone(), red.b.clone())?.with_output(red.c.clone())?;
    Ok(BirkaOutcome {
        v,
        w,
        reduced,
        eigenvalues: lam,
        iterations,
        converged,
        steps,
    })
}

/// The four quantities relating the energy-norm error of the projected
/// solution to H2 norms of the full, reduced and error systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2ErrorTerms {
    /// `‖X − V X̂ Vᵀ‖²_M`.
    pub m_norm_error_sq: f64,
    /// `‖Σ‖²_H2`.
    pub h2_full_sq: f64,
    /// `‖Σ̂‖²_H2`.
    pub h2_reduced_sq: f64,
    /// `‖Σ − Σ̂‖²_H2`.
    pub h2_error_system_sq: f64,
}

/// Evaluate [`H2ErrorTerms`] for a symmetric system with `C = Bᵀ` and an
/// orthonormal `V`.
pub fn reduced_h2_error_terms(sys: &BilinearSystem, v: &Mat) -> Result<H2ErrorTerms> {
    if !sys.is_symmetric() {
        return Err(Error::NotSymmetric("H2 error terms need a symmetric system".into()));
    }
    if let Some(c) = sys.c_explicit() {
        if (c - sys.b().transpose()).norm() > 1e-12 * c.norm().max(1.0) {
            return Err(Error::InvalidArgument("H2 error terms need C = Bᵀ".into()));
        }
    }
    if v.nrows() != sys.dim() {
        return dim_err("V must have n rows");
    }
    let k = v.ncols();
    let x = direct_solve(sys)?;
    let ah = symmetrize(&v.tr_mul(&(sys.a() * v)));
    let nh: Vec<Mat> = sys.n_list().iter().map(|ni| symmetrize(&v.tr_mul(&(ni * v)))).collect();
    let bh = v.tr_mul(sys.b());
    let red = BilinearSystem::new_symmetric(ah.clone(), nh.clone(), bh.clone())?;
    let xh = if k == 0 { Mat::zeros(0, 0) } else { direct_solve(&red)? };
    let e = &x - v * &xh * v.transpose();
    let m_norm_error_sq = m_inner(sys, &e, &e)?;
    let h2_full_sq = h2_norm_squared(sys)?;
    let h2_reduced_sq = if k == 0 { 0.0 } else { (bh.transpose() * &xh * &bh).trace() };
    // error system diag(A, Â), diag(Nᵢ, N̂ᵢ), [B; B̂], [C, −Ĉ]
    let ae = block_diag(&[sys.a(), &ah]);
    let ne: Vec<Mat> = sys.n_list().iter().zip(&nh).map(|(a, b)| block_diag(&[a, b])).collect();
    let mut be = Mat::zeros(sys.dim() + k, sys.num_inputs());
    be.rows_mut(0, sys.dim()).copy_from(sys.b());
    be.rows_mut(sys.dim(), k).copy_from(&bh);
    let ce = hcat(&[&sys.b().transpose(), &-bh.transpose()]);
    let err_sys = BilinearSystem::new(ae, ne, be)?;
    let pe = direct_solve(&err_sys)?;
    let h2_error_system_sq = (&ce * pe * ce.transpose()).trace();
    Ok(H2ErrorTerms {
        m_norm_error_sq,
        h2_full_sq,
        h2_reduced_sq,
        h2_error_system_sq,
    })
}

/// Kronecker matrix `𝐕ᵀ𝐌𝐕` of the energy operator restricted to
/// `span(V ⊗ V)`.
pub fn reduced_m_kron(sys: &BilinearSystem, v: &Mat) -> Mat {
    let vv = kron(v, v);
    vv.transpose() * crate::operators::m_kron(sys) * vv
}
