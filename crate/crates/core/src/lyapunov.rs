//! Dense Lyapunov solver: real Schur reduction plus block back-substitution.

use nalgebra::Schur;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{symmetrize, Mat};

/// Precomputed real Schur form `A = Q T Qᵀ` for repeated solves of
/// `AX + XAᵀ + RHS = 0`.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    q: Mat,
    t: Mat,
    blocks: Vec<(usize, usize)>,
}

impl LyapunovSolver {
    pub fn new(a: &Mat) -> Result<Self> {
        if !a.is_square() {
            return dim_err(format!("A is {}x{}, expected square", a.nrows(), a.ncols()));
        }
        let n = a.nrows();
        if n == 0 {
            return Ok(Self {
                q: Mat::zeros(0, 0),
                t: Mat::zeros(0, 0),
                blocks: vec![],
            });
        }
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 200 * n.max(10))
            .or_else(|| Schur::try_new(a.clone(), 1e-13, 1000 * n.max(10)))
            .ok_or_else(|| Error::Eigen("real Schur iteration did not converge".into()))?;
        let (q, mut t) = schur.unpack();
        let blocks = partition(&mut t)?;
        Ok(Self { q, t, blocks })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// `X` with `AX + XAᵀ + RHS = 0`; symmetrized when `RHS` is symmetric.
    pub fn solve(&self, rhs: &Mat) -> Result<Mat> {
        let n = self.dim();
        if rhs.shape() != (n, n) {
            return dim_err(format!("RHS is {}x{}, expected {n}x{n}", rhs.nrows(), rhs.ncols()));
        }
        if n == 0 {
            return Ok(Mat::zeros(0, 0));
        }
        let c = -(self.q.transpose() * rhs * &self.q);
        let y = solve_quasi_triangular(&self.t, &self.blocks, &self.t, &self.blocks, &c)?;
        let x = &self.q * y * self.q.transpose();
        Ok(if crate::linalg::is_symmetric(rhs, 1e-12) {
            symmetrize(&x)
        } else {
            x
        })
    }
}

/// Solve `AX + XAᵀ + RHS = 0` (one-shot).
pub fn lyap_solve(a: &Mat, rhs: &Mat) -> Result<Mat> {
    LyapunovSolver::new(a)?.solve(rhs)
}

/// Diagonal block structure of a quasi-upper-triangular matrix. Negligible
/// subdiagonal entries are zeroed.
fn partition(t: &mut Mat) -> Result<Vec<(usize, usize)>> {
    let n = t.nrows();
    for i in 0..n.saturating_sub(1) {
        let s = t[(i + 1, i)];
        if s != 0.0 && s.abs() <= f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs()) {
            t[(i + 1, i)] = 0.0;
        }
        for k in (i + 2)..n {
            t[(k, i)] = 0.0;
        }
    }
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            if i + 2 < n && t[(i + 2, i + 1)] != 0.0 {
                return Err(Error::Eigen("Schur form has an unreduced 3x3 block".into()));
            }
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    Ok(blocks)
}

/// Solve `T Y + Y Sᵀ = C` for quasi-upper-triangular `T`, `S`.
fn solve_quasi_triangular(
    t: &Mat,
    tb: &[(usize, usize)],
    s: &Mat,
    sb: &[(usize, usize)],
    c: &Mat,
) -> Result<Mat> {
    let (p, q) = c.shape();
    let mut y = Mat::zeros(p, q);
    let scale = t.amax() + s.amax();
    let tiny = 8.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    for &(j0, jq) in sb.iter().rev() {
        let mut cj = c.columns(j0, jq).into_owned();
        let after = j0 + jq;
        if after < q {
            let s_row = s.view((j0, after), (jq, q - after));
            cj -= y.columns(after, q - after) * s_row.transpose();
        }
        for &(i0, ip) in tb.iter().rev() {
            let ia = i0 + ip;
            let mut rhs = cj.rows(i0, ip).into_owned();
            if ia < p {
                rhs -= t.view((i0, ia), (ip, p - ia)) * y.view((ia, j0), (p - ia, jq));
            }
            let tii = t.view((i0, i0), (ip, ip));
            let sjj = s.view((j0, j0), (jq, jq));
            let blk = solve_small(&tii.into_owned(), &sjj.into_owned(), &rhs, tiny)?;
            y.view_mut((i0, j0), (ip, jq)).copy_from(&blk);
        }
    }
    Ok(y)
}

/// `T Y + Y Sᵀ = C` for blocks of order ≤ 2.
fn solve_small(t: &Mat, s: &Mat, c: &Mat, tiny: f64) -> Result<Mat> {
    let (p, q) = (t.nrows(), s.nrows());
    if p == 1 && q == 1 {
        let d = t[(0, 0)] + s[(0, 0)];
        if d.abs() <= tiny {
            return Err(Error::Singular(
                "Lyapunov operator: eigenvalues λᵢ + λⱼ = 0".into(),
            ));
        }
        return Ok(Mat::from_element(1, 1, c[(0, 0)] / d));
    }
    let ip = Mat::identity(p, p);
    let iq = Mat::identity(q, q);
    let k = crate::linalg::kron(&iq, t) + crate::linalg::kron(s, &ip);
    let lu = k.clone().lu();
    let u = lu.u();
    if u.diagonal().iter().any(|d| d.abs() <= tiny) {
        return Err(Error::Singular(
            "Lyapunov operator: eigenvalues λᵢ + λⱼ = 0".into(),
        ));
    }
    let rhs = crate::linalg::vectorize(c);
    let v = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator block".into()))?;
    Ok(crate::linalg::unvectorize(&v, p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, unvectorize, vectorize};

    fn random_like(n: usize, seed: u64) -> Mat {
        let mut s = seed;
        Mat::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn identity_case() {
        let x = lyap_solve(&-Mat::identity(3, 3), &(2.0 * Mat::identity(3, 3))).unwrap();
        assert!((x - Mat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn zero_rhs() {
        let a = random_like(5, 3) - 3.0 * Mat::identity(5, 5);
        assert_eq!(lyap_solve(&a, &Mat::zeros(5, 5)).unwrap().norm(), 0.0);
    }

    #[test]
    fn matches_kronecker_for_nonsymmetric() {
        for seed in 0..5 {
            let n = 7 + seed as usize;
            // rotation-heavy matrix so the Schur form carries 2x2 blocks
            let g = random_like(n, seed);
            let a = (&g - g.transpose()) * 3.0 + g - 2.0 * Mat::identity(n, n);
            let rhs = random_like(n, seed + 100);
            let x = lyap_solve(&a, &rhs).unwrap();
            let id = Mat::identity(n, n);
            let k = kron(&id, &a) + kron(&a, &id);
            let xk = unvectorize(&k.lu().solve(&(-vectorize(&rhs))).unwrap(), n, n);
            assert!((&x - &xk).norm() <= 1e-10 * xk.norm(), "seed {seed}");
            let res = &a * &x + &x * a.transpose() + &rhs;
            assert!(res.norm() <= 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn singular_operator_detected() {
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(
            lyap_solve(&a, &Mat::identity(2, 2)),
            Err(Error::Singular(_))
        ));
    }
}
