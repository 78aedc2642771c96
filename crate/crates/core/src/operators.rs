//! The operators `L(X) = AX + XAᵀ`, `Π(X) = Σ NᵢXNᵢᵀ`, `M = −L − Π`, the
//! residual, the energy inner product and their Kronecker matrices.

use crate::error::{dim_err, Error, Result};
use crate::linalg::{kron, symmetrize, Mat};
use crate::system::BilinearSystem;

fn check_square(sys: &BilinearSystem, x: &Mat, what: &str) -> Result<()> {
    let n = sys.dim();
    if x.shape() != (n, n) {
        return dim_err(format!(
            "{what} is {}x{}, expected {n}x{n}",
            x.nrows(),
            x.ncols()
        ));
    }
    Ok(())
}

/// `AX + XAᵀ`.
pub fn apply_lyap(sys: &BilinearSystem, x: &Mat) -> Result<Mat> {
    check_square(sys, x, "X")?;
    Ok(lyap_unchecked(sys.a(), x))
}

pub(crate) fn lyap_unchecked(a: &Mat, x: &Mat) -> Mat {
    a * x + x * a.transpose()
}

/// `Σ NᵢXNᵢᵀ`.
pub fn apply_pi(sys: &BilinearSystem, x: &Mat) -> Result<Mat> {
    check_square(sys, x, "X")?;
    Ok(pi_unchecked(sys.n_list(), x))
}

pub(crate) fn pi_unchecked(n_list: &[Mat], x: &Mat) -> Mat {
    let n = x.nrows();
    let mut out = Mat::zeros(n, n);
    for ni in n_list {
        out += ni * x * ni.transpose();
    }
    out
}

/// `M(X) = −L(X) − Π(X)`.
pub fn apply_m(sys: &BilinearSystem, x: &Mat) -> Result<Mat> {
    Ok(-(apply_lyap(sys, x)? + apply_pi(sys, x)?))
}

/// `L(X̂) + Π(X̂) + BBᵀ`, symmetrized when `X̂` is symmetric.
pub fn residual(sys: &BilinearSystem, xhat: &Mat) -> Result<Mat> {
    check_square(sys, xhat, "X")?;
    let mut r = lyap_unchecked(sys.a(), xhat) + pi_unchecked(sys.n_list(), xhat);
    r += sys.b() * sys.b().transpose();
    if crate::linalg::is_symmetric(xhat, 1e-12) {
        r = symmetrize(&r);
    }
    Ok(r)
}

/// `‖R‖_F / ‖BBᵀ‖_F` (or `‖R‖_F` when `B = 0`).
pub fn relative_residual(sys: &BilinearSystem, xhat: &Mat) -> Result<f64> {
    let r = residual(sys, xhat)?;
    let scale = sys.rhs().norm();
    Ok(if scale > 0.0 { r.norm() / scale } else { r.norm() })
}

/// Energy inner product `trace(Xᵀ M(Y))` of a symmetric system.
pub fn m_inner(sys: &BilinearSystem, x: &Mat, y: &Mat) -> Result<f64> {
    if !sys.is_symmetric() {
        return Err(Error::NotSymmetric(
            "the energy inner product needs a symmetric system".into(),
        ));
    }
    check_square(sys, x, "X")?;
    let my = apply_m(sys, y)?;
    Ok(x.dot(&my))
}

/// Kronecker matrix of `L`: `I⊗A + A⊗I`.
pub fn lyap_kron(sys: &BilinearSystem) -> Mat {
    let n = sys.dim();
    let id = Mat::identity(n, n);
    kron(&id, sys.a()) + kron(sys.a(), &id)
}

/// Kronecker matrix of `Π`: `Σ Nᵢ⊗Nᵢ`.
pub fn pi_kron(sys: &BilinearSystem) -> Mat {
    let n = sys.dim();
    let mut k = Mat::zeros(n * n, n * n);
    for ni in sys.n_list() {
        k += kron(ni, ni);
    }
    k
}

/// Kronecker matrix of `M = −L − Π`.
pub fn m_kron(sys: &BilinearSystem) -> Mat {
    -(lyap_kron(sys) + pi_kron(sys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unvectorize, vectorize};

    fn sys1(a: f64, nu: f64, b: f64) -> BilinearSystem {
        BilinearSystem::new_symmetric(
            Mat::from_element(1, 1, a),
            vec![Mat::from_element(1, 1, nu)],
            Mat::from_element(1, 1, b),
        )
        .unwrap()
    }

    #[test]
    fn lyap_identity_case() {
        let s = BilinearSystem::new(-Mat::identity(2, 2), vec![], Mat::zeros(2, 1)).unwrap();
        assert_eq!(apply_lyap(&s, &Mat::identity(2, 2)).unwrap(), -2.0 * Mat::identity(2, 2));
    }

    #[test]
    fn lyap_diagonal_case() {
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let s = BilinearSystem::new(a, vec![], Mat::zeros(2, 1)).unwrap();
        let out = apply_lyap(&s, &Mat::identity(2, 2)).unwrap();
        assert_eq!(out, Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, -4.0])));
    }

    #[test]
    fn pi_trivial_cases() {
        let x = Mat::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        let s0 = BilinearSystem::new(Mat::identity(3, 3), vec![Mat::zeros(3, 3)], Mat::zeros(3, 1)).unwrap();
        assert_eq!(apply_pi(&s0, &x).unwrap(), Mat::zeros(3, 3));
        let s1 = BilinearSystem::new(Mat::identity(3, 3), vec![Mat::identity(3, 3)], Mat::zeros(3, 1)).unwrap();
        assert_eq!(apply_pi(&s1, &x).unwrap(), x);
    }

    #[test]
    fn residual_scalar() {
        let s = sys1(-1.0, 0.0, 1.0);
        let r = residual(&s, &Mat::from_element(1, 1, 0.25)).unwrap();
        assert!((r[(0, 0)] - 0.5).abs() < 1e-15);
        let r0 = residual(&s, &Mat::zeros(1, 1)).unwrap();
        assert_eq!(r0[(0, 0)], 1.0);
    }

    #[test]
    fn m_inner_identity_case() {
        let s = BilinearSystem::new_symmetric(-0.5 * Mat::identity(3, 3), vec![], Mat::zeros(3, 1)).unwrap();
        let x = Mat::from_fn(3, 3, |i, j| (i + j) as f64);
        assert!((m_inner(&s, &x, &x).unwrap() - x.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn m_inner_refuses_nonsymmetric() {
        let s = BilinearSystem::new(-Mat::identity(2, 2), vec![], Mat::zeros(2, 1)).unwrap();
        assert!(m_inner(&s, &Mat::identity(2, 2), &Mat::identity(2, 2)).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let s = sys1(-1.0, 0.0, 1.0);
        assert!(apply_lyap(&s, &Mat::zeros(2, 2)).is_err());
        assert!(apply_pi(&s, &Mat::zeros(1, 2)).is_err());
    }

    #[test]
    fn kron_forms_match_small() {
        let a = Mat::from_fn(3, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let n1 = Mat::from_fn(3, 3, |i, j| ((i + 2 * j) % 3) as f64 * 0.5);
        let s = BilinearSystem::new(a, vec![n1], Mat::zeros(3, 1)).unwrap();
        let x = Mat::from_fn(3, 3, |i, j| (i as f64 - j as f64).cos());
        let l = unvectorize(&(lyap_kron(&s) * vectorize(&x)), 3, 3);
        assert!((l - apply_lyap(&s, &x).unwrap()).norm() < 1e-12);
        let p = unvectorize(&(pi_kron(&s) * vectorize(&x)), 3, 3);
        assert!((p - apply_pi(&s, &x).unwrap()).norm() < 1e-12);
    }
}
